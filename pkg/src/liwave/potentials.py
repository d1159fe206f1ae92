"""Interatomic potential models feeding the scattering engine.

All potentials are pure value types evaluating V(r) in joules for r in
meters.  Four variants are supported:

* ``LennardJones``:        V(r) = eps * [ (r_m/r)^12 - 2 (r_m/r)^6 ]
* ``BuckinghamCorner``:    V(r) = A exp(-b r) - D(r) (C6/r^6 + C8/r^8),
  with damping D(r) = exp(-4 (r_m/r - 1)^3) for r < r_m and D = 1 beyond.
* ``Dispersion``:          V(r) = -C6/r^6 - C8/r^8 - C10/r^10 for r >= r_cut,
  hard wall (+inf) below r_cut.
* ``SquareWell``:          V(r) = -depth for r < radius, 0 beyond.  Mostly a
  test vehicle: its s-wave phase shift has a closed form.

Parameters load from JSON config files with explicit unit tags; nothing
numeric about a specific atom pair is hardcoded here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from .constants import target_mass
from .errors import ConfigError, NoMinimumError
from .units import to_si

_ArrayLike = "float | np.ndarray"


def _check_r(r):
    arr = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        # r = 0 is tolerated only where a variant is finite there; the
        # vectorized evaluators below special-case it themselves.
        bad = arr[~(np.isfinite(arr) & (arr > 0.0))]
        raise ValueError(f"r must be finite and > 0, got {bad[:3]}")
    return arr


@dataclass(frozen=True)
class LennardJones:
    """12-6 potential parameterized by well depth and well position."""

    epsilon: float  # J, well depth (> 0)
    r_m: float      # m, well position

    def __post_init__(self):
        if not (self.epsilon > 0.0 and self.r_m > 0.0):
            raise ValueError("LennardJones requires epsilon > 0 and r_m > 0")

    def __call__(self, r):
        r = _check_r(r)
        x6 = (self.r_m / r) ** 6
        return self.epsilon * (x6 * x6 - 2.0 * x6)

    def dispersion_coefficients(self):
        return 2.0 * self.epsilon * self.r_m**6, 0.0, 0.0

    def core_scale(self) -> float:
        return self.r_m

    def breakpoints(self):
        return ()

    def hard_wall(self):
        return None


@dataclass(frozen=True)
class BuckinghamCorner:
    """Exponential repulsion with damped C6 + C8 dispersion attraction."""

    A: float    # J
    b: float    # 1/m
    C6: float   # J*m^6
    C8: float   # J*m^8
    r_m: float  # m, damping reference radius

    def __post_init__(self):
        if not (self.A > 0.0 and self.b > 0.0 and self.C6 > 0.0 and self.r_m > 0.0):
            raise ValueError("BuckinghamCorner requires A, b, C6, r_m > 0")
        if self.C8 < 0.0:
            raise ValueError("BuckinghamCorner requires C8 >= 0")

    def __call__(self, r):
        scalar = np.isscalar(r)
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if not np.all(np.isfinite(r)) or np.any(r < 0.0):
            raise ValueError("r must be finite and >= 0")
        v = self.A * np.exp(-self.b * r)
        # Damped dispersion.  Inside ~r_m/6 the damping underflows anyway
        # (exp(-500) at r_m/r = 6), so the term is set to zero there, which
        # also keeps r = 0 finite.
        out = np.zeros_like(r)
        live = r > self.r_m / 6.0
        rl = r[live]
        disp = self.C6 / rl**6 + self.C8 / rl**8
        damp = np.ones_like(rl)
        inner = rl < self.r_m
        x = self.r_m / rl[inner] - 1.0
        damp[inner] = np.exp(-4.0 * x**3)
        out[live] = damp * disp
        result = v - out
        return float(result[0]) if scalar else result

    def dispersion_coefficients(self):
        return self.C6, self.C8, 0.0

    def core_scale(self) -> float:
        return self.r_m

    def breakpoints(self):
        return ()

    def hard_wall(self):
        return None


@dataclass(frozen=True)
class Dispersion:
    """Pure long-range attraction with a hard-wall inner cutoff.

    The hard wall regularizes the r^-6 singularity; scattering observables
    built on this variant are insensitive to r_cut once the wall sits far
    inside the wavelength scale.
    """

    C6: float     # J*m^6
    C8: float     # J*m^8
    C10: float    # J*m^10
    r_cut: float  # m, wall radius

    def __post_init__(self):
        if self.r_cut <= 0.0:
            raise ValueError("Dispersion requires r_cut > 0")
        if min(self.C6, self.C8, self.C10) < 0.0:
            raise ValueError("Dispersion coefficients must be >= 0")

    def __call__(self, r):
        scalar = np.isscalar(r)
        r = np.atleast_1d(_check_r(r))
        out = np.full_like(r, np.inf)
        ok = r >= self.r_cut
        ro = r[ok]
        out[ok] = -(self.C6 / ro**6 + self.C8 / ro**8 + self.C10 / ro**10)
        return float(out[0]) if scalar else out

    def dispersion_coefficients(self):
        return self.C6, self.C8, self.C10

    def core_scale(self) -> float:
        return self.r_cut

    def breakpoints(self):
        return ()

    def hard_wall(self):
        return self.r_cut


@dataclass(frozen=True)
class SquareWell:
    """Attractive square well: -depth inside ``radius``, zero outside."""

    depth: float   # J (> 0, attraction)
    radius: float  # m

    def __post_init__(self):
        if not (self.depth > 0.0 and self.radius > 0.0):
            raise ValueError("SquareWell requires depth > 0 and radius > 0")

    def __call__(self, r):
        scalar = np.isscalar(r)
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if not np.all(np.isfinite(r)) or np.any(r < 0.0):
            raise ValueError("r must be finite and >= 0")
        out = np.where(r < self.radius, -self.depth, 0.0)
        return float(out[0]) if scalar else out

    def dispersion_coefficients(self):
        return 0.0, 0.0, 0.0

    def core_scale(self) -> float:
        return self.radius

    def breakpoints(self):
        return (self.radius,)

    def hard_wall(self):
        return None


PotentialSpec = LennardJones | BuckinghamCorner | Dispersion | SquareWell


def evaluate(spec, r):
    """V(r) in joules; r in meters (scalar or array); pure and deterministic."""
    return spec(r)


def well_parameters(spec, rtol: float = 1e-10):
    """Locate the potential minimum numerically.

    Returns (epsilon_eff, r_min) with epsilon_eff = -V(r_min) > 0.  Bracketed
    1-D minimization refined to relative tolerance ``rtol`` on the radius.
    Raises NoMinimumError for monotonic variants (pure Dispersion) and for
    the degenerate flat-bottom SquareWell.
    """
    if isinstance(spec, (Dispersion, SquareWell)):
        raise NoMinimumError(f"{type(spec).__name__} has no unique interior minimum")
    guess = spec.core_scale()
    grid = np.geomspace(0.05 * guess, 20.0 * guess, 4000)
    vals = spec(grid)
    i = int(np.argmin(vals))
    if i == 0 or i == len(grid) - 1 or vals[i] >= 0.0:
        raise NoMinimumError("no interior minimum found on the bracketing grid")
    # minimize in r/guess: scipy's brent carries an absolute floor tolerance
    # that would dominate at SI atomic length scales
    res = minimize_scalar(
        lambda x: spec(x * guess),
        bracket=(grid[i - 1] / guess, grid[i] / guess, grid[i + 1] / guess),
        method="brent",
        options={"xtol": rtol},
    )
    r_min = float(res.x) * guess
    return -float(spec(r_min)), r_min


# ---------------------------------------------------------------------------
# Collision system

@dataclass(frozen=True)
class CollisionSystem:
    """Projectile + target masses and the pair potential between them."""

    m_projectile: float  # kg
    m_target: float      # kg
    potential: PotentialSpec

    def __post_init__(self):
        if not (self.m_projectile > 0.0 and self.m_target > 0.0):
            raise ValueError("masses must be > 0")

    @property
    def mu(self) -> float:
        """Reduced mass (kg)."""
        return self.m_projectile * self.m_target / (self.m_projectile + self.m_target)


# ---------------------------------------------------------------------------
# Config files

_VARIANTS = {
    "lennard_jones": (
        LennardJones,
        {"epsilon": "energy", "r_m": "length"},
    ),
    "buckingham_corner": (
        BuckinghamCorner,
        {"A": "energy", "b": "inverse_length", "C6": "c6", "C8": "c8", "r_m": "length"},
    ),
    "dispersion": (
        Dispersion,
        {"C6": "c6", "C8": "c8", "C10": "c10", "r_cut": "length"},
    ),
    "square_well": (
        SquareWell,
        {"depth": "energy", "radius": "length"},
    ),
}


def load_potential(path) -> tuple[PotentialSpec, dict]:
    """Load a potential config file.

    Returns (spec, meta) where meta holds the raw envelope (pair label,
    provenance note, ...) for reporting.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"potential config not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"potential config {path} is not valid JSON: {exc}") from None
    return potential_from_dict(raw, origin=str(path))


def potential_from_dict(raw: dict, origin: str = "<dict>") -> tuple[PotentialSpec, dict]:
    for key in ("variant", "params"):
        if key not in raw:
            raise ConfigError(f"{origin}: missing required key {key!r}")
    variant = raw["variant"]
    if variant not in _VARIANTS:
        raise ConfigError(
            f"{origin}: unknown variant {variant!r}; supported: {sorted(_VARIANTS)}"
        )
    cls, dims = _VARIANTS[variant]
    params = raw["params"]
    units = raw.get("units", {})
    missing = set(dims) - set(params)
    if missing:
        raise ConfigError(f"{origin}: variant {variant} missing params {sorted(missing)}")
    si = {}
    for name, dim in dims.items():
        unit = units.get(name, _default_unit(dim))
        try:
            si[name] = to_si(params[name], unit, dim)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{origin}: param {name!r}: {exc}") from None
    try:
        spec = cls(**si)
    except ValueError as exc:
        raise ConfigError(f"{origin}: {exc}") from None
    meta = {
        "pair": raw.get("pair", ""),
        "variant": variant,
        "provenance": raw.get("provenance", ""),
    }
    return spec, meta


def _default_unit(dim: str) -> str:
    return {
        "energy": "J",
        "length": "m",
        "inverse_length": "1/m",
        "c6": "J*m^6",
        "c8": "J*m^8",
        "c10": "J*m^10",
        "dimensionless": "",
    }[dim]


def system_from_config(path, projectile_mass: float, gas: str) -> tuple[CollisionSystem, dict]:
    """Build a CollisionSystem from a potential config and a target species."""
    spec, meta = load_potential(path)
    return CollisionSystem(projectile_mass, target_mass(gas), spec), meta
