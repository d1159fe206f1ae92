"""Unit tags for configuration files.

Config files declare the unit of every parameter explicitly; values are
converted to strict SI at load time so the numeric core never sees a unit
tag.  Each tag maps to a multiplicative SI factor.
"""

from .constants import BOHR_RADIUS, C_LIGHT, H_PLANCK, HARTREE, KB

_EV = 1.602176634e-19  # J (exact)

UNIT_TO_SI = {
    # energy
    "J": 1.0,
    "eV": _EV,
    "meV": 1e-3 * _EV,
    "cm^-1": H_PLANCK * C_LIGHT * 100.0,
    "K": KB,
    "hartree": HARTREE,
    # length
    "m": 1.0,
    "mm": 1e-3,
    "um": 1e-6,
    "nm": 1e-9,
    "angstrom": 1e-10,
    "bohr": BOHR_RADIUS,
    # inverse length
    "1/m": 1.0,
    "1/angstrom": 1e10,
    "1/bohr": 1.0 / BOHR_RADIUS,
    # dispersion coefficients (au = hartree * bohr^n)
    "J*m^6": 1.0,
    "au_c6": HARTREE * BOHR_RADIUS**6,
    "J*m^8": 1.0,
    "au_c8": HARTREE * BOHR_RADIUS**8,
    "J*m^10": 1.0,
    "au_c10": HARTREE * BOHR_RADIUS**10,
    # pressure
    "Pa": 1.0,
    "mbar": 100.0,
    # temperature is always kelvin; dimensionless values carry ""
    "": 1.0,
}

# Which tags are acceptable for each parameter dimension.
DIMENSIONS = {
    "energy": {"J", "eV", "meV", "cm^-1", "K", "hartree"},
    "length": {"m", "mm", "um", "nm", "angstrom", "bohr"},
    "inverse_length": {"1/m", "1/angstrom", "1/bohr"},
    "c6": {"J*m^6", "au_c6"},
    "c8": {"J*m^8", "au_c8"},
    "c10": {"J*m^10", "au_c10"},
    "pressure": {"Pa", "mbar"},
    "dimensionless": {""},
}

MBAR = 100.0  # Pa


def to_si(value: float, unit: str, dimension: str) -> float:
    """Convert ``value`` with unit tag ``unit`` to SI, checking the dimension."""
    allowed = DIMENSIONS.get(dimension)
    if allowed is None:
        raise ValueError(f"unknown dimension {dimension!r}")
    if unit not in allowed:
        raise ValueError(
            f"unit {unit!r} not valid for {dimension} (allowed: {sorted(allowed)})"
        )
    return float(value) * UNIT_TO_SI[unit]
