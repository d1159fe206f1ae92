import numpy as np
import pytest

from liwave.cli import builtin_config
from liwave.constants import AMU, M_LI7, M_XENON
from liwave.potentials import CollisionSystem, LennardJones, load_potential
from liwave.refraction import IndexPolicy, glory_scan
from liwave.scattering import RadialPolicy
from liwave.thermal import TargetGasSpec


@pytest.fixture(scope="session")
def li_xe_system():
    spec, _ = load_potential(builtin_config("li_xe_buckingham_corner.json"))
    return CollisionSystem(M_LI7, M_XENON, spec)


@pytest.fixture(scope="session")
def xenon_gas():
    return TargetGasSpec("xenon", M_XENON, 298.0)


@pytest.fixture(scope="session")
def mini_system():
    # Light, shallow system: full pipeline physics at a fraction of the cost.
    return CollisionSystem(7.016 * AMU, 39.948 * AMU, LennardJones(2.5e-21, 2.0e-10))


@pytest.fixture(scope="session")
def li_xe_thermal_scan(li_xe_system, xenon_gas):
    """Thermally averaged velocity scan shared by the glory-structure tests."""
    policy = IndexPolicy(target_nodes=16, radial=RadialPolicy(delta_tol=1e-5))
    return glory_scan(li_xe_system, xenon_gas, 700.0, 3300.0, 22, policy)


def count_interior_extrema(y):
    """(maxima, minima) strictly inside the sampled range."""
    s = np.sign(np.diff(np.asarray(y)))
    s = s[s != 0]
    maxima = int(np.sum((s[:-1] > 0) & (s[1:] < 0)))
    minima = int(np.sum((s[:-1] < 0) & (s[1:] > 0)))
    return maxima, minima
