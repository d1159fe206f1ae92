"""liwave: complex index of refraction of dilute gases for atomic matter waves.

Forward path: interatomic potential -> partial-wave phase shifts -> forward
scattering amplitude -> thermally averaged index of refraction (n-1)/n_gas.
Inverse path: simulated interferometer fringe sweeps -> sweep fits -> phase
shift and transmission per pressure -> density regression -> measured index.
"""

__version__ = "0.1.0"

from . import analysis, cell, fringes, potentials, refraction, scattering, thermal  # noqa: F401
