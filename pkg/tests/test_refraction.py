import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from liwave.constants import AMU, HBAR
from liwave.potentials import CollisionSystem
from liwave.refraction import (
    IndexPolicy,
    amplitude_at,
    convergence_scenarios,
    glory_scan,
    index_per_density,
    index_stationary,
    make_index_result,
    sigma_eff,
)
from liwave.scattering import RadialPolicy, build_table, total_cross_section
from liwave.thermal import BeamSpec, TargetGasSpec

ARGON_MASS = 39.948 * AMU


def argon_gas(T=298.0):
    return TargetGasSpec("argon", ARGON_MASS, T)


@given(st.floats(1e-31, 1e-27), st.floats(1e-31, 1e-27))
def test_rho_identity(re, im):
    res = make_index_result(1000.0, re, im, 1e11)
    assert res.rho == re / im


def test_rho_identity_enforced():
    from liwave.refraction import IndexResult
    with pytest.raises(ValueError):
        IndexResult(1000.0, 1e-29, 2e-29, 0.3, 1e11)


def test_stationary_reduction_exact_at_degenerate_temperature(mini_system):
    beam = BeamSpec(mini_system.m_projectile, 1000.0, 0.0)
    cold = index_per_density(mini_system, beam, argon_gas(1e-30),
                             IndexPolicy(target_nodes=8))
    direct = index_stationary(mini_system, 1000.0)
    assert cold.re_per_density == pytest.approx(direct.re_per_density, rel=1e-10)
    assert cold.im_per_density == pytest.approx(direct.im_per_density, rel=1e-10)
    assert cold.rho == pytest.approx(direct.rho, rel=1e-10)


def test_stationary_reduction_low_temperature(mini_system):
    beam = BeamSpec(mini_system.m_projectile, 1000.0, 0.0)
    cold = index_per_density(mini_system, beam, argon_gas(1e-4),
                             IndexPolicy(target_nodes=32))
    direct = index_stationary(mini_system, 1000.0)
    assert cold.re_per_density == pytest.approx(direct.re_per_density, rel=1e-6)
    assert cold.im_per_density == pytest.approx(direct.im_per_density, rel=1e-6)


def test_sigma_eff_identities():
    res = make_index_result(1075.0, 1.82e-29, 2.40e-29, 1.1876e11)
    assert sigma_eff(res) == 2.0 * 2.40e-29 * 1.1876e11
    doubled = make_index_result(1075.0, 1.82e-29, 4.80e-29, 1.1876e11)
    assert sigma_eff(doubled) == pytest.approx(2.0 * sigma_eff(res), rel=1e-14)
    zero = make_index_result(1075.0, 1.0e-29, 5e-300, 1.1876e11)
    assert sigma_eff(zero) == pytest.approx(0.0, abs=1e-280)


def test_sigma_eff_matches_cross_section_at_zero_temperature(mini_system):
    u = 1000.0
    beam = BeamSpec(mini_system.m_projectile, u, 0.0)
    res = index_per_density(mini_system, beam, argon_gas(1e-30),
                            IndexPolicy(target_nodes=8))
    k_rel = mini_system.mu * u / HBAR
    sigma = total_cross_section(build_table(mini_system, k_rel))
    # sigma_eff uses k_lab; the optical-theorem chain ties it back to the
    # relative-motion cross section
    assert sigma_eff(res) == pytest.approx(sigma, rel=1e-6)


def test_thermal_averaging_damps_glory_contrast(mini_system):
    policy = IndexPolicy(target_nodes=12, radial=RadialPolicy(delta_tol=1e-5))
    warm = glory_scan(mini_system, argon_gas(298.0), 500.0, 2000.0, 12, policy)
    cold = glory_scan(mini_system, argon_gas(1.0), 500.0, 2000.0, 12, policy)
    assert np.ptp(warm.im_scaled) < np.ptp(cold.im_scaled)


def test_glory_scan_columns(mini_system):
    policy = IndexPolicy(target_nodes=6, radial=RadialPolicy(delta_tol=1e-4))
    scan = glory_scan(mini_system, argon_gas(), 600.0, 1200.0, 5, policy)
    assert np.all(np.diff(scan.u) > 0)
    np.testing.assert_allclose(scan.re_scaled, scan.u**1.4 * scan.re_per_density, rtol=1e-14)
    np.testing.assert_allclose(scan.im_scaled, scan.u**1.4 * scan.im_per_density, rtol=1e-14)
    np.testing.assert_allclose(scan.rho, scan.re_per_density / scan.im_per_density, rtol=1e-14)
    assert np.all(scan.im_per_density > 0.0)


def test_mass_consistency_required(mini_system):
    beam = BeamSpec(2.0 * AMU, 1000.0, 0.0)
    with pytest.raises(ValueError):
        index_per_density(mini_system, beam, argon_gas())
    beam = BeamSpec(mini_system.m_projectile, 1000.0, 0.0)
    wrong_gas = TargetGasSpec("argon", 10.0 * AMU, 298.0)
    with pytest.raises(ValueError):
        index_per_density(mini_system, beam, wrong_gas)


def test_amplitude_cache_reuses(mini_system):
    k = mini_system.mu * 777.0 / HBAR
    a = amplitude_at(mini_system, k)
    b = amplitude_at(mini_system, k)
    assert a is b


def test_convergence_scenarios_run():
    names = [name for name, _ in convergence_scenarios()]
    assert len(names) == len(set(names)) >= 4


def test_li_xe_rho_at_reference_velocity(li_xe_system, xenon_gas):
    policy = IndexPolicy(target_nodes=16, radial=RadialPolicy(delta_tol=1e-5))
    beam = BeamSpec(li_xe_system.m_projectile, 1075.0, 0.25)
    res = index_per_density(li_xe_system, beam, xenon_gas, policy)
    assert 0.6 <= res.rho <= 0.8
    assert res.im_per_density > 0.0


def test_pure_c6_scaled_im_is_flat(xenon_gas):
    # exact u^(-7/5) law for an r^-6 potential: the scaled column is flat to a
    # few percent once thermal averaging suppresses the hard-wall artifact
    from liwave.cli import builtin_config
    from liwave.potentials import load_potential
    spec, _ = load_potential(builtin_config("li_xe_dispersion_c6.json"))
    system = CollisionSystem(
        7.0160034 * AMU, 131.293 * AMU, spec)
    policy = IndexPolicy(target_nodes=10, radial=RadialPolicy(delta_tol=1e-4))
    scan = glory_scan(system, xenon_gas, 1000.0, 3000.0, 5, policy)
    assert np.ptp(scan.im_scaled) / np.mean(scan.im_scaled) < 0.05


def test_beam_spread_shifts_index(mini_system):
    gas = argon_gas()
    radial = RadialPolicy(delta_tol=1e-5)
    narrow = index_per_density(
        mini_system, BeamSpec(mini_system.m_projectile, 900.0, 0.0), gas,
        IndexPolicy(target_nodes=12, radial=radial))
    spread = index_per_density(
        mini_system, BeamSpec(mini_system.m_projectile, 900.0, 0.25), gas,
        IndexPolicy(target_nodes=12, beam_velocity_nodes=16,
                    include_beam_spread=True, radial=radial))
    assert spread.im_per_density != narrow.im_per_density
    assert spread.im_per_density == pytest.approx(narrow.im_per_density, rel=0.2)
