"""Velocity averaging: target-gas thermal motion and beam velocity spread.

Two quadratures are provided, both Gauss-Legendre on a truncated support
with weights renormalized to sum to one:

* relative speed between a projectile at fixed speed v and a
  Maxwell-Boltzmann target,
      P(v_r) ~ (v_r / v) [exp(-(v_r - v)^2 / v_th^2) - exp(-(v_r + v)^2 / v_th^2)],
      v_th = sqrt(2 k_B T / m_target);
* the beam speed distribution of a seeded supersonic expansion,
      P(v) ~ v^3 exp(-(v - u)^2 / (2 s^2)),   s = u * fwhm / (2 sqrt(2 ln 2)).

The exact relative-speed density is used rather than a mean-speed shortcut
because the averaged observables carry velocity-sensitive glory structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import KB, M_LI7

_FWHM_TO_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))
_SUPPORT_HALF_WIDTH = 6.0  # in units of the distribution scale parameter


@dataclass(frozen=True)
class TargetGasSpec:
    """Target gas species at thermal equilibrium."""

    species: str
    m_target: float          # kg
    temperature: float = 298.0  # K

    def __post_init__(self):
        if self.m_target <= 0.0:
            raise ValueError("target mass must be > 0")
        if self.temperature <= 0.0:
            raise ValueError("temperature must be > 0")

    @property
    def v_thermal(self) -> float:
        """Most probable target speed sqrt(2 k_B T / m) (m/s)."""
        return math.sqrt(2.0 * KB * self.temperature / self.m_target)


@dataclass(frozen=True)
class BeamSpec:
    """Projectile beam: mass, mean speed, fractional FWHM of the speed spread."""

    m_projectile: float = M_LI7  # kg
    u_mean: float = 1075.0       # m/s
    fwhm_fraction: float = 0.25

    def __post_init__(self):
        if self.m_projectile <= 0.0:
            raise ValueError("projectile mass must be > 0")
        if self.u_mean <= 0.0:
            raise ValueError("u_mean must be > 0")
        if not (0.0 <= self.fwhm_fraction < 1.0):
            raise ValueError("fwhm_fraction must be in [0, 1)")


def _gauss_legendre_weighted(density, lo: float, hi: float, n_nodes: int):
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    nodes = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    weights = w * density(nodes)
    total = weights.sum()
    if not (total > 0.0):
        raise ValueError("quadrature weights vanished; support truncation is wrong")
    return nodes, weights / total


def relative_speed_nodes(beam_v: float, gas: TargetGasSpec, n_nodes: int = 48):
    """Quadrature nodes and weights over the projectile-target relative speed.

    The projectile moves at fixed speed ``beam_v`` through a
    Maxwell-Boltzmann gas; weights sum to one.
    """
    if n_nodes < 2:
        raise ValueError("n_nodes must be >= 2")
    if beam_v <= 0.0:
        raise ValueError("beam_v must be > 0")
    vth = gas.v_thermal
    if _SUPPORT_HALF_WIDTH * vth < 1e-9 * beam_v:
        # support narrower than anything resolvable: exact stationary limit
        return [(beam_v, 1.0)]

    def density(vr):
        return (vr / beam_v) * (
            np.exp(-((vr - beam_v) ** 2) / vth**2)
            - np.exp(-((vr + beam_v) ** 2) / vth**2)
        )

    lo = max(0.0, beam_v - _SUPPORT_HALF_WIDTH * vth)
    hi = beam_v + _SUPPORT_HALF_WIDTH * vth
    nodes, weights = _gauss_legendre_weighted(density, lo, hi, n_nodes)
    return list(zip(nodes.tolist(), weights.tolist()))


def beam_nodes(beam: BeamSpec, n_nodes: int = 48):
    """Quadrature nodes and weights over the beam speed distribution."""
    if n_nodes < 1:
        raise ValueError("n_nodes must be >= 1")
    if beam.fwhm_fraction == 0.0:
        return [(beam.u_mean, 1.0)]
    u = beam.u_mean
    s = u * beam.fwhm_fraction / _FWHM_TO_SIGMA

    def density(v):
        return v**3 * np.exp(-((v - u) ** 2) / (2.0 * s * s))

    lo = max(0.0, u - _SUPPORT_HALF_WIDTH * s)
    hi = u + _SUPPORT_HALF_WIDTH * s
    nodes, weights = _gauss_legendre_weighted(density, lo, hi, n_nodes)
    return list(zip(nodes.tolist(), weights.tolist()))


def doubled_node_check(functional, n_nodes: int) -> float:
    """Relative change of a node-count-parameterized functional under doubling.

    ``functional(n)`` must return a scalar computed on an n-node quadrature.
    """
    a = functional(n_nodes)
    b = functional(2 * n_nodes)
    scale = max(abs(a), abs(b), 1e-300)
    return abs(b - a) / scale
