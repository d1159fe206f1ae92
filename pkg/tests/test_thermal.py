import math

import numpy as np
import pytest

from liwave.constants import KB, M_LI7, M_XENON
from liwave.thermal import (
    BeamSpec,
    TargetGasSpec,
    beam_nodes,
    doubled_node_check,
    relative_speed_nodes,
)


def xenon(T=298.0):
    return TargetGasSpec("xenon", M_XENON, T)


def test_relative_speed_weights_sum_to_one():
    nodes = relative_speed_nodes(1075.0, xenon(), 48)
    assert sum(w for _, w in nodes) == pytest.approx(1.0, abs=1e-12)
    assert all(w > 0.0 for _, w in nodes)


def test_beam_weights_sum_to_one():
    nodes = beam_nodes(BeamSpec(M_LI7, 1075.0, 0.25), 48)
    assert sum(w for _, w in nodes) == pytest.approx(1.0, abs=1e-12)
    assert all(w > 0.0 for _, w in nodes)


def test_cold_target_limit_single_effective_node():
    nodes = relative_speed_nodes(1075.0, xenon(1e-6), 32)
    mean = sum(v * w for v, w in nodes)
    assert mean == pytest.approx(1075.0, rel=1e-6)


def test_degenerate_support_collapses_to_stationary():
    nodes = relative_speed_nodes(1075.0, xenon(1e-30), 32)
    assert nodes == [(1075.0, 1.0)]


def test_zero_fwhm_beam_single_node():
    assert beam_nodes(BeamSpec(M_LI7, 900.0, 0.0), 48) == [(900.0, 1.0)]


def test_nodes_deterministic():
    a = relative_speed_nodes(1000.0, xenon(), 48)
    b = relative_speed_nodes(1000.0, xenon(), 48)
    assert a == b


def test_relative_speed_mean_against_monte_carlo():
    # 3-D Maxwell-Boltzmann target sampled directly
    beam_v, gas = 1075.0, xenon()
    rng = np.random.default_rng(20260810)
    sigma = math.sqrt(KB * gas.temperature / gas.m_target)
    n = 10_000_000
    vel = rng.normal(0.0, sigma, (n, 3))
    vel[:, 2] -= beam_v
    mc_mean = float(np.mean(np.linalg.norm(vel, axis=1)))
    quad_mean = sum(v * w for v, w in relative_speed_nodes(beam_v, gas, 48))
    assert quad_mean == pytest.approx(mc_mean, rel=1e-3)


def test_beam_mean_against_monte_carlo():
    beam = BeamSpec(M_LI7, 1075.0, 0.25)
    s = beam.u_mean * beam.fwhm_fraction / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    rng = np.random.default_rng(7)
    x = rng.normal(beam.u_mean, s, 10_000_000)
    x = x[x > 0.0]
    w = x**3
    mc_mean = float(np.sum(x * w) / np.sum(w))
    quad_mean = sum(v * wt for v, wt in beam_nodes(beam, 48))
    assert quad_mean == pytest.approx(mc_mean, rel=1e-3)


def test_node_doubling_converges_for_smooth_functionals():
    gas = xenon()

    def averaged_power(n):
        return sum(w * (v / 1000.0) ** -2.4 for v, w in relative_speed_nodes(1075.0, gas, n))

    assert doubled_node_check(averaged_power, 32) < 1e-4

    beam = BeamSpec(M_LI7, 1075.0, 0.25)

    def averaged_beam(n):
        return sum(w * (v / 1000.0) ** -1.4 for v, w in beam_nodes(beam, n))

    assert doubled_node_check(averaged_beam, 32) < 1e-4


def test_domain_errors():
    with pytest.raises(ValueError):
        relative_speed_nodes(1000.0, xenon(), 1)
    with pytest.raises(ValueError):
        relative_speed_nodes(-5.0, xenon(), 8)
    with pytest.raises(ValueError):
        TargetGasSpec("xenon", M_XENON, -3.0)
    with pytest.raises(ValueError):
        BeamSpec(M_LI7, 1000.0, 1.2)
