"""Physical constants and species masses (strict SI).

Single source of truth for every numeric constant in the package; no other
module hardcodes physical constants.  CODATA 2018 values, 10 significant
digits where available.  k_B is exact by the 2019 SI redefinition.
"""

HBAR = 1.054571817e-34      # J*s
KB = 1.380649e-23           # J/K (exact)
AMU = 1.66053906660e-27     # kg
H_PLANCK = 6.62607015e-34   # J*s (exact)
C_LIGHT = 2.99792458e8      # m/s (exact)
BOHR_RADIUS = 5.291772109e-11   # m
HARTREE = 4.359744722e-18       # J

# Projectile: lithium-7 isotope mass.
M_LI7 = 7.0160034 * AMU

# Targets: natural-abundance mean atomic weights (the rare gases as bottled).
M_ARGON = 39.948 * AMU
M_KRYPTON = 83.798 * AMU
M_XENON = 131.293 * AMU

TARGET_MASSES = {
    "argon": M_ARGON,
    "krypton": M_KRYPTON,
    "xenon": M_XENON,
}

_ALIASES = {"ar": "argon", "kr": "krypton", "xe": "xenon"}


def target_mass(species: str) -> float:
    """Mass (kg) of a supported target gas species, by name or symbol."""
    key = species.strip().lower()
    key = _ALIASES.get(key, key)
    try:
        return TARGET_MASSES[key]
    except KeyError:
        raise ValueError(
            f"unknown target species {species!r}; supported: "
            + ", ".join(sorted(TARGET_MASSES))
        ) from None


def canonical_species(species: str) -> str:
    key = species.strip().lower()
    key = _ALIASES.get(key, key)
    if key not in TARGET_MASSES:
        raise ValueError(f"unknown target species {species!r}")
    return key
