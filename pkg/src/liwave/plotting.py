"""Figure rendering for the report commands.

Every report command emits delimited data first; these helpers render the
same tables to PNG next to them.  Import is kept lazy-friendly by selecting
the Agg backend before pyplot loads, so figure generation works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _styled_axes(xlabel: str, ylabel: str, logx: bool = False):
    fig, ax = plt.subplots(figsize=(6.4, 4.4), dpi=150)
    ax.set_xlabel(xlabel, fontsize=11)
    ax.set_ylabel(ylabel, fontsize=11)
    if logx:
        ax.set_xscale("log")
    ax.grid(True, which="both", alpha=0.25, linewidth=0.5)
    ax.tick_params(labelsize=10)
    return fig, ax


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_cross_section(u, sigma, path):
    """Total collision cross section versus beam velocity."""
    fig, ax = _styled_axes("beam velocity u (m/s)", r"$\langle\sigma\rangle$ (m$^2$)", logx=True)
    ax.plot(u, sigma, "-", color="tab:blue", lw=1.4)
    return _finish(fig, path)


def plot_scaled_index(u, re_scaled, im_scaled, path):
    """u^(7/5)-scaled real and imaginary index parts versus velocity."""
    fig, ax = _styled_axes("beam velocity u (m/s)",
                           r"$u^{7/5}\,(n-1)/n_{gas}$  (m$^3$ (m/s)$^{7/5}$)")
    ax.plot(u, re_scaled, "-", color="tab:red", lw=1.4, label="real part")
    ax.plot(u, im_scaled, "-", color="tab:blue", lw=1.4, label="imaginary part")
    ax.legend(fontsize=10)
    return _finish(fig, path)


def plot_rho(u, rho, path):
    """Ratio of real to imaginary index parts versus velocity."""
    fig, ax = _styled_axes("beam velocity u (m/s)", r"$\rho$ = Re / Im")
    ax.plot(u, rho, "-", color="tab:green", lw=1.4)
    ax.axhline(np.tan(np.pi / 5.0), color="gray", ls="--", lw=0.9,
               label=r"pure $r^{-6}$ limit")
    ax.legend(fontsize=10)
    return _finish(fig, path)


def plot_density_series(n_gas, phi, phi_err, minus_ln_t, lnt_err, fits, path):
    """Phase shift and attenuation versus density with regression lines.

    ``fits`` is ((slope_phi, icpt_phi), (slope_lnt, icpt_lnt)).
    """
    fig, ax = _styled_axes(r"gas density $n_{gas}$ (m$^{-3}$)", "")
    x = np.asarray(n_gas)
    xs = np.linspace(0.0, 1.05 * x.max(), 50)
    (s_phi, b_phi), (s_lnt, b_lnt) = fits
    ax.errorbar(x, phi, yerr=phi_err, fmt="o", ms=4, color="tab:red",
                label=r"$\varphi$ (rad)")
    ax.plot(xs, s_phi * xs + b_phi, "-", color="tab:red", lw=1.0)
    ax.errorbar(x, minus_ln_t, yerr=lnt_err, fmt="s", ms=4, color="tab:blue",
                label=r"$-\ln t$")
    ax.plot(xs, s_lnt * xs + b_lnt, "-", color="tab:blue", lw=1.0)
    ax.legend(fontsize=10)
    return _finish(fig, path)
