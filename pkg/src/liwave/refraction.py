"""Complex index of refraction per unit gas density.

For a projectile of lab wavevector k_lab = m u / hbar crossing a dilute gas,

    (n - 1) / n_gas = (2 pi / k_lab) < (v_r / v) f(k_rel, 0) / k_rel >,

where the brackets average over the relative-speed distribution of the
moving targets, k_rel = mu v_rel / hbar, and the flux factor v_r/v makes the
imaginary part reproduce the kinetic attenuation n_gas <sigma v_r> / v
through the optical theorem (it can be disabled by policy for comparisons).
At zero target temperature the average collapses to the single-amplitude
formula (n-1)/n_gas = 2 pi f(k_rel)/(k_lab k_rel).

The real part tracks the phase shift, the imaginary part the attenuation;
their ratio rho is the potential-sensitive observable.  Both fall roughly
like u^(-7/5) with glory oscillations superimposed, which the scan helper
exposes by scaling columns with u^(7/5).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .constants import HBAR
from .potentials import CollisionSystem
from .scattering import RadialPolicy, build_table, forward_amplitude
from .thermal import BeamSpec, TargetGasSpec, beam_nodes, relative_speed_nodes

GLORY_SCALING_EXPONENT = 1.4  # = 7/5, the velocity power removed in scans


@dataclass(frozen=True)
class IndexPolicy:
    """Averaging and integration controls for index calculations."""

    target_nodes: int = 48
    beam_velocity_nodes: int = 32
    include_beam_spread: bool = False
    flux_weighting: bool = True
    radial: RadialPolicy = RadialPolicy()


DEFAULT_INDEX_POLICY = IndexPolicy()


@dataclass(frozen=True)
class IndexResult:
    """(n-1)/n_gas split into real and imaginary parts (m^3), plus rho."""

    u_mean: float           # m/s
    re_per_density: float   # m^3
    im_per_density: float   # m^3
    rho: float
    k_lab: float            # 1/m
    re_err: float | None = None
    im_err: float | None = None
    rho_err: float | None = None

    def __post_init__(self):
        expected = self.re_per_density / self.im_per_density
        if not math.isclose(self.rho, expected, rel_tol=1e-12, abs_tol=0.0):
            raise ValueError("rho must equal re_per_density / im_per_density")


def make_index_result(u_mean, re_per_density, im_per_density, k_lab,
                      re_err=None, im_err=None, rho_err=None) -> IndexResult:
    return IndexResult(
        u_mean=u_mean,
        re_per_density=re_per_density,
        im_per_density=im_per_density,
        rho=re_per_density / im_per_density,
        k_lab=k_lab,
        re_err=re_err,
        im_err=im_err,
        rho_err=rho_err,
    )


@lru_cache(maxsize=512)
def _cached_amplitude(system: CollisionSystem, k_rel: float, policy: RadialPolicy):
    return forward_amplitude(build_table(system, k_rel, policy))


def amplitude_at(system: CollisionSystem, k_rel: float,
                 policy: RadialPolicy = RadialPolicy()):
    """Forward amplitude with memoization over (system, k, policy)."""
    return _cached_amplitude(system, k_rel, policy)


def index_stationary(system: CollisionSystem, u: float, m_projectile: float | None = None,
                     policy: RadialPolicy = RadialPolicy()) -> IndexResult:
    """Index per density against stationary targets (the T -> 0 limit)."""
    m_p = system.m_projectile if m_projectile is None else m_projectile
    k_lab = m_p * u / HBAR
    k_rel = system.mu * u / HBAR
    f = amplitude_at(system, k_rel, policy)
    scale = 2.0 * math.pi / (k_lab * k_rel)
    return make_index_result(u, scale * f.f_re, scale * f.f_im, k_lab)


def index_per_density(system: CollisionSystem, beam: BeamSpec, gas: TargetGasSpec,
                      policy: IndexPolicy = DEFAULT_INDEX_POLICY) -> IndexResult:
    """Thermally averaged complex index per unit gas density."""
    if not math.isclose(beam.m_projectile, system.m_projectile, rel_tol=1e-9):
        raise ValueError("beam and collision system disagree on the projectile mass")
    if not math.isclose(gas.m_target, system.m_target, rel_tol=1e-9):
        raise ValueError("gas spec and collision system disagree on the target mass")

    u = beam.u_mean
    k_lab = beam.m_projectile * u / HBAR
    mu = system.mu

    if policy.include_beam_spread and beam.fwhm_fraction > 0.0:
        outer = beam_nodes(beam, policy.beam_velocity_nodes)
    else:
        outer = [(u, 1.0)]

    re_terms: list[float] = []
    im_terms: list[float] = []
    for v, w_beam in outer:
        inner = relative_speed_nodes(v, gas, policy.target_nodes)
        for v_r, w in inner:
            k_r = mu * v_r / HBAR
            f = amplitude_at(system, k_r, policy.radial)
            weight = w_beam * w / k_r
            if policy.flux_weighting:
                weight *= v_r / v
            re_terms.append(weight * f.f_re)
            im_terms.append(weight * f.f_im)

    scale = 2.0 * math.pi / k_lab
    re = scale * math.fsum(re_terms)
    im = scale * math.fsum(im_terms)
    return make_index_result(u, re, im, k_lab)


def sigma_eff(result: IndexResult) -> float:
    """Effective total cross section 2 Im[(n-1)/n_gas] k_lab (m^2)."""
    return 2.0 * result.im_per_density * result.k_lab


@dataclass(frozen=True)
class GloryScan:
    """Velocity scan of the index with the u^(7/5) trend removed."""

    u: np.ndarray
    re_per_density: np.ndarray
    im_per_density: np.ndarray
    re_scaled: np.ndarray   # u^(7/5) * re_per_density
    im_scaled: np.ndarray   # u^(7/5) * im_per_density
    rho: np.ndarray
    sigma: np.ndarray

    def rows(self):
        return zip(self.u, self.re_scaled, self.im_scaled, self.rho, self.sigma)


def convergence_scenarios():
    """Named scenarios for quadrature-convergence regression checks.

    Each entry is (name, functional) where functional(n_nodes) returns the
    imaginary index per density computed with an n-node thermal average.
    The systems are light so the whole set runs in seconds; they exercise
    both the target-gas average and the beam-spread average.
    """
    from .constants import AMU
    from .potentials import LennardJones

    # shallow well so 32 thermal nodes fully resolve the glory structure of
    # the averaged integrand at every listed velocity
    light = CollisionSystem(7.016 * AMU, 39.948 * AMU, LennardJones(1.2e-21, 2.0e-10))
    gas = TargetGasSpec("argon", 39.948 * AMU, 298.0)
    cold = TargetGasSpec("argon", 39.948 * AMU, 1e-30)
    policy_radial = RadialPolicy(delta_tol=1e-5)

    def target_avg(u):
        def functional(n):
            pol = IndexPolicy(target_nodes=n, radial=policy_radial)
            beam = BeamSpec(light.m_projectile, u, 0.0)
            return index_per_density(light, beam, gas, pol).im_per_density
        return functional

    def beam_avg(u):
        # cold target isolates the beam-speed quadrature being probed
        def functional(n):
            pol = IndexPolicy(target_nodes=2, beam_velocity_nodes=n,
                              include_beam_spread=True, radial=policy_radial)
            beam = BeamSpec(light.m_projectile, u, 0.25)
            return index_per_density(light, beam, cold, pol).im_per_density
        return functional

    return [
        ("target_average_u900", target_avg(900.0)),
        ("target_average_u1200", target_avg(1200.0)),
        ("target_average_u1800", target_avg(1800.0)),
        ("beam_average_u1000", beam_avg(1000.0)),
    ]


def glory_scan(system: CollisionSystem, gas: TargetGasSpec, u_min: float, u_max: float,
               n_points: int = 60, policy: IndexPolicy = DEFAULT_INDEX_POLICY,
               fwhm_fraction: float = 0.0) -> GloryScan:
    """Scan the thermally averaged index over a log-spaced velocity grid."""
    if not (0.0 < u_min < u_max):
        raise ValueError("need 0 < u_min < u_max")
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    us = np.geomspace(u_min, u_max, n_points)
    re = np.empty_like(us)
    im = np.empty_like(us)
    sig = np.empty_like(us)
    for i, u in enumerate(us):
        beam = BeamSpec(system.m_projectile, float(u), fwhm_fraction)
        res = index_per_density(system, beam, gas, policy)
        re[i] = res.re_per_density
        im[i] = res.im_per_density
        sig[i] = sigma_eff(res)
    scale = us**GLORY_SCALING_EXPONENT
    return GloryScan(
        u=us,
        re_per_density=re,
        im_per_density=im,
        re_scaled=scale * re,
        im_scaled=scale * im,
        rho=re / im,
        sigma=sig,
    )
