"""Inverse pipeline: fringe fits -> (phi, t) per run -> density regression.

Each sweep is fit to

    lambda(n) = dwell * { I_B + I0 [1 + V cos(a + b n + c n^2)] }

by weighted nonlinear least squares with Poisson weights (residuals
(y - lambda)/sqrt(lambda)), I_B held fixed at the background-record mean.
A run reduces to

    phi = a2 - (a1 + a3)/2            (cancels linear interferometer drift)
    t   = I02 V2 / mean(I01 V1, I03 V3)

with first-order error propagation from the fit covariances.  Runs at
several pressures form a density series; weighted straight-line fits of phi
and -ln t versus n_gas, divided by k_lab * L, give the measured complex
index per unit density.  Intercepts are left free and reported as
diagnostics rather than forced through the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares

from .cell import CellGeometry, GasState, density, effective_length
from .constants import HBAR
from .errors import ConfigError, ConvergenceError
from .fringes import ExperimentRun, FringeScan, load_run
from .thermal import BeamSpec

_V_UPPER = 1.05  # small visibility overshoot tolerated, flagged
_LAMBDA_FLOOR = 1e-9


@dataclass(frozen=True)
class FringeFit:
    """Best-fit sweep parameters; covariance ordered (I0, V, a, b, c)."""

    i0: float
    visibility: float
    a: float
    b: float
    c: float
    i_bg: float
    cov: np.ndarray
    chi2_dof: float
    v_pinned: bool
    n_points: int

    def var(self, name: str) -> float:
        idx = {"i0": 0, "v": 1, "a": 2, "b": 3, "c": 4}[name]
        return float(self.cov[idx, idx])


@dataclass(frozen=True)
class RunReduction:
    phi: float
    phi_err: float
    t: float
    t_err: float
    p_meas: float
    flags: tuple = ()


@dataclass(frozen=True)
class DensitySeries:
    """Per-pressure (n_gas, phi, -ln t) with errors, regression-ready."""

    n_gas: np.ndarray
    phi: np.ndarray
    phi_err: np.ndarray
    minus_ln_t: np.ndarray
    minus_ln_t_err: np.ndarray
    u_mean: float
    k_lab: float
    length: float
    flags: tuple = ()

    def __post_init__(self):
        if np.any(np.diff(self.n_gas) <= 0.0):
            raise ValueError("n_gas must be strictly increasing")
        if np.any(self.phi_err <= 0.0) or np.any(self.minus_ln_t_err <= 0.0):
            raise ValueError("series errors must be > 0")


@dataclass(frozen=True)
class MeasuredIndex:
    """Measured (n-1)/n_gas with regression diagnostics."""

    u_mean: float
    re_per_density: float
    im_per_density: float
    rho: float
    k_lab: float
    re_err: float
    im_err: float
    rho_err: float
    phi_intercept: float
    phi_intercept_err: float
    lnt_intercept: float
    lnt_intercept_err: float
    r2_phi: float
    r2_lnt: float
    length: float
    n_runs: int


# ---------------------------------------------------------------------------
# Sweep fitting

def _model_rates(theta, n, dwell, i_bg):
    i0, v, a, b, c = theta
    return dwell * (i_bg + i0 * (1.0 + v * np.cos(a + b * n + c * n * n)))


def _model_jacobian(theta, n, dwell, i_bg):
    i0, v, a, b, c = theta
    psi = a + b * n + c * n * n
    cos_psi = np.cos(psi)
    sin_psi = np.sin(psi)
    d_i0 = dwell * (1.0 + v * cos_psi)
    d_v = dwell * i0 * cos_psi
    d_a = -dwell * i0 * v * sin_psi
    return np.column_stack([d_i0, d_v, d_a, d_a * n, d_a * n * n])


def _fft_init(counts, dwell, i_bg):
    """Deterministic start values from the dominant Fourier component."""
    y = counts.astype(float)
    n = y.size
    z = y - y.mean()
    spec = np.fft.rfft(z)
    mags = np.abs(spec)
    mags[0] = 0.0
    k_pk = int(np.argmax(mags))
    if k_pk == 0:
        k_pk = 1
    # parabolic peak interpolation for a better frequency start
    if 1 <= k_pk < mags.size - 1:
        alpha, beta, gamma = mags[k_pk - 1], mags[k_pk], mags[k_pk + 1]
        denom = alpha - 2.0 * beta + gamma
        shift = 0.5 * (alpha - gamma) / denom if denom != 0.0 else 0.0
        shift = float(np.clip(shift, -0.5, 0.5))
    else:
        shift = 0.0
    b0 = 2.0 * math.pi * (k_pk + shift) / n
    a0 = float(np.angle(spec[k_pk]))
    amp = 2.0 * mags[k_pk] / n
    i0_0 = max((y.mean() / dwell) - i_bg, 1e-6)
    v0 = float(np.clip(amp / dwell / i0_0, 0.0, 1.0))
    return np.array([i0_0, v0, a0, b0, 0.0])


def fit_sweep(scan, i_bg: float, dwell: float = 0.3) -> FringeFit:
    """Weighted NLLS fit of one sweep; I_B fixed, V bounded to [0, 1.05].

    ``scan`` may be a FringeScan or a bare count array (noiseless synthetic
    rates are accepted as floats).
    """
    counts = np.asarray(getattr(scan, "counts", scan), dtype=float)
    n = np.arange(counts.size, dtype=float)
    theta0 = _fft_init(counts, dwell, i_bg)

    def residuals(theta):
        lam = _model_rates(theta, n, dwell, i_bg)
        lam_safe = np.maximum(lam, _LAMBDA_FLOOR)
        return (counts - lam) / np.sqrt(lam_safe)

    def jac(theta):
        lam = _model_rates(theta, n, dwell, i_bg)
        lam_safe = np.maximum(lam, _LAMBDA_FLOOR)
        jm = _model_jacobian(theta, n, dwell, i_bg)
        w = 1.0 / np.sqrt(lam_safe) + (counts - lam) / (2.0 * lam_safe**1.5)
        return -jm * w[:, None]

    lower = np.array([1e-12, 0.0, -np.inf, -np.inf, -np.inf])
    upper = np.array([np.inf, _V_UPPER, np.inf, np.inf, np.inf])
    size = counts.size
    res = least_squares(
        residuals, theta0, jac=jac, bounds=(lower, upper), method="trf",
        xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=400,
        x_scale=[max(theta0[0], 1.0), 0.1, 1.0, 1.0 / size, 1.0 / size**2],
    )
    if res.status <= 0:
        raise ConvergenceError(
            "sweep fit did not converge",
            {"status": res.status, "nfev": res.nfev, "cost": res.cost,
             "optimality": res.optimality},
        )
    i0, v, a, b, c = res.x
    # wrap the phase origin into (-pi, pi] for branch consistency downstream
    a_wrapped = a - 2.0 * math.pi * math.floor((a + math.pi) / (2.0 * math.pi))

    lam = _model_rates(res.x, n, dwell, i_bg)
    lam_safe = np.maximum(lam, _LAMBDA_FLOOR)
    j_gn = _model_jacobian(res.x, n, dwell, i_bg) / np.sqrt(lam_safe)[:, None]
    # equilibrate columns before inverting: parameter scales span ~10 orders
    col = np.sqrt((j_gn**2).sum(axis=0))
    col[col == 0.0] = 1.0
    jn = j_gn / col
    cov = np.linalg.pinv(jn.T @ jn) / np.outer(col, col)
    chi2 = float(np.sum((counts - lam) ** 2 / lam_safe))
    dof = max(counts.size - 5, 1)
    v_pinned = bool(v >= _V_UPPER - 1e-9 or v <= 1e-12)
    return FringeFit(
        i0=float(i0), visibility=float(v), a=float(a_wrapped), b=float(b),
        c=float(c), i_bg=float(i_bg), cov=cov, chi2_dof=chi2 / dof,
        v_pinned=v_pinned, n_points=counts.size,
    )


def background_level(background: FringeScan, dwell: float) -> float:
    """Detector background rate (counts/s) from the flagged-beam record."""
    return float(np.mean(background.counts)) / dwell


# ---------------------------------------------------------------------------
# Run reduction

def _product_variance(fit: FringeFit) -> tuple[float, float]:
    """Value and variance of the product I0 * V from one fit."""
    p = fit.i0 * fit.visibility
    g = np.array([fit.visibility, fit.i0])
    sub = fit.cov[:2, :2]
    return p, float(g @ sub @ g)


def reduce_run(run: ExperimentRun, fits: tuple[FringeFit, FringeFit, FringeFit]) -> RunReduction:
    """Three-sweep estimators of the gas phase shift and transmission."""
    f1, f2, f3 = fits
    # bring a3 onto a1's branch, then a2 onto the empty mean's branch
    a1 = f1.a
    a3 = a1 + _wrap_pi(f3.a - a1)
    mean_empty = 0.5 * (a1 + a3)
    phi = _wrap_pi(f2.a - mean_empty)
    var_phi = f2.var("a") + 0.25 * (f1.var("a") + f3.var("a"))

    p1, var_p1 = _product_variance(f1)
    p2, var_p2 = _product_variance(f2)
    p3, var_p3 = _product_variance(f3)
    denom = 0.5 * (p1 + p3)
    if denom <= 0.0:
        raise ValueError("empty-sweep fringe products must be positive")
    t = p2 / denom
    var_t = t * t * (var_p2 / p2**2 + 0.25 * (var_p1 + var_p3) / denom**2)

    flags = []
    if any(f.v_pinned for f in fits):
        flags.append("visibility_pinned")
    if t > 1.0 + 0.05:
        flags.append("transmission_above_unity")
    return RunReduction(
        phi=float(phi), phi_err=math.sqrt(var_phi),
        t=float(t), t_err=math.sqrt(var_t),
        p_meas=run.p_meas, flags=tuple(flags),
    )


def _wrap_pi(x: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    return x - 2.0 * math.pi * math.floor((x + math.pi) / (2.0 * math.pi))


# ---------------------------------------------------------------------------
# Density series and extraction

def build_series(reductions, states, beam: BeamSpec, geom: CellGeometry) -> DensitySeries:
    """Assemble the regression series, sorted by density, phases unwrapped.

    Consecutive phase steps are assumed below pi in magnitude; steps closer
    than 0.3 rad to that bound are flagged as unwrap-ambiguous.  Duplicate
    densities cannot be ordered for unwrapping and are a domain error.
    """
    if len(reductions) != len(states):
        raise ValueError("one GasState per run is required")
    if len(reductions) < 2:
        raise ValueError("need at least two pressures")
    n_gas = np.array([s.n_gas for s in states])
    order = np.argsort(n_gas)
    n_gas = n_gas[order]
    if np.any(np.diff(n_gas) == 0.0):
        raise ValueError("duplicate gas densities: pressure series is not monotone")
    red = [reductions[i] for i in order]

    flags = []
    phis = np.empty(len(red))
    prev = 0.0
    for i, r in enumerate(red):
        step = _wrap_pi(r.phi - prev)
        if abs(step) > math.pi - 0.3:
            flags.append(f"unwrap_ambiguous_at_{i}")
        phis[i] = prev + step
        prev = phis[i]
        if r.t <= 0.0:
            raise ValueError("non-positive transmission cannot be log-transformed")

    minus_ln_t = np.array([-math.log(r.t) for r in red])
    lnt_err = np.array([r.t_err / r.t for r in red])
    phi_err = np.array([r.phi_err for r in red])
    all_flags = tuple(flags) + tuple(f for r in red for f in r.flags)
    return DensitySeries(
        n_gas=n_gas, phi=phis, phi_err=phi_err,
        minus_ln_t=minus_ln_t, minus_ln_t_err=lnt_err,
        u_mean=beam.u_mean, k_lab=beam.m_projectile * beam.u_mean / HBAR,
        length=effective_length(geom), flags=all_flags,
    )


def weighted_line_fit(x, y, sigma):
    """WLS straight line y = slope*x + intercept with absolute errors.

    Returns (slope, intercept, var_slope, var_intercept, r_squared).
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    w = 1.0 / np.asarray(sigma, float) ** 2
    s = w.sum()
    sx = (w * x).sum()
    sy = (w * y).sum()
    sxx = (w * x * x).sum()
    sxy = (w * x * y).sum()
    delta = s * sxx - sx * sx
    slope = (s * sxy - sx * sy) / delta
    intercept = (sxx * sy - sx * sxy) / delta
    var_slope = s / delta
    var_intercept = sxx / delta
    yhat = slope * x + intercept
    ybar = sy / s
    ss_res = (w * (y - yhat) ** 2).sum()
    ss_tot = (w * (y - ybar) ** 2).sum()
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return slope, intercept, var_slope, var_intercept, r2


def extract_index(series: DensitySeries) -> MeasuredIndex:
    """Regress the series against density and convert slopes to the index."""
    s_phi, b_phi, var_s_phi, var_b_phi, r2_phi = weighted_line_fit(
        series.n_gas, series.phi, series.phi_err
    )
    s_lnt, b_lnt, var_s_lnt, var_b_lnt, r2_lnt = weighted_line_fit(
        series.n_gas, series.minus_ln_t, series.minus_ln_t_err
    )
    kl = series.k_lab * series.length
    re = s_phi / kl
    im = s_lnt / kl
    re_err = math.sqrt(var_s_phi) / kl
    im_err = math.sqrt(var_s_lnt) / kl
    rho = re / im
    rho_err = abs(rho) * math.sqrt((re_err / re) ** 2 + (im_err / im) ** 2)
    return MeasuredIndex(
        u_mean=series.u_mean,
        re_per_density=re, im_per_density=im, rho=rho, k_lab=series.k_lab,
        re_err=re_err, im_err=im_err, rho_err=rho_err,
        phi_intercept=b_phi, phi_intercept_err=math.sqrt(var_b_phi),
        lnt_intercept=b_lnt, lnt_intercept_err=math.sqrt(var_b_lnt),
        r2_phi=r2_phi, r2_lnt=r2_lnt,
        length=series.length, n_runs=int(series.n_gas.size),
    )


# ---------------------------------------------------------------------------
# File-level orchestration

def analyze_run(run: ExperimentRun) -> RunReduction:
    dwell = run.sweep_configs[0].dwell
    i_bg = background_level(run.background, dwell)
    fits = tuple(fit_sweep(scan, i_bg, dwell) for scan in run.scans)
    return reduce_run(run, fits)


def analyze_run_files(run_paths, geom: CellGeometry, gas, beam: BeamSpec):
    """Fit, reduce, and regress a directory's worth of run files.

    Returns (MeasuredIndex, DensitySeries).
    """
    runs = [load_run(p) for p in run_paths]
    if len(runs) < 2:
        raise ConfigError("need at least two run files to build a series")
    reductions = [analyze_run(r) for r in runs]
    states = [density(r.p_meas, geom, gas) for r in runs]
    series = build_series(reductions, states, beam, geom)
    return extract_index(series), series


def find_run_files(directory) -> list[Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise ConfigError(f"run directory not found: {directory}")
    paths = sorted(directory.glob("run_*.json"))
    if not paths:
        raise ConfigError(f"no run_*.json files in {directory}")
    return paths
