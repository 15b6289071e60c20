import numpy as np
import pytest

from PaulSim.dynamics.integrator import mathieu_trajectories, secular_energy_drift
from PaulSim.mathieu.mathieu_core import (MathieuParams, characteristic_exponent,
                                          continued_fraction_beta, lowest_order_beta,
                                          params_from_coefficients, secular_frequency,
                                          split_pair_boundaries, stability_boundary_q,
                                          stability_diagram)
from PaulSim.model.drive import DriveConfig
from PaulSim.utilities.exceptions import DomainError, StabilityError

F_RF = 51.6e6


def test_operating_point():
    omega = secular_frequency(MathieuParams(0.0018, 0.903), 2 * np.pi * F_RF)
    assert omega / (2 * np.pi * 1e6) == pytest.approx(24.15, rel=0.02)


def test_outlook_design_point():
    omega = secular_frequency(MathieuParams(0.0, 0.5), 2 * np.pi * 150e6)
    assert 26.0 <= omega / (2 * np.pi * 1e6) <= 30.0


def test_unstable_point():
    res = characteristic_exponent(MathieuParams(0.0, 0.95))
    assert not res.stable
    assert np.isnan(res.beta)
    assert abs(res.monodromy_trace) >= 2
    with pytest.raises(StabilityError) as info:
        secular_frequency(res, 1.0)
    assert info.value.params == [(0.0, 0.95)]


def test_monodromy_is_symplectic():
    res = characteristic_exponent((0.01, 0.4))
    assert np.linalg.det(res.monodromy) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize('q', [0.1, 0.3, 0.6, 0.85])
def test_continued_fraction_agrees(q):
    exact = characteristic_exponent(MathieuParams(0.0, q)).beta
    assert continued_fraction_beta(MathieuParams(0.0, q)) == pytest.approx(exact, abs=1e-8)


def test_lowest_order_accuracy():
    for q, limit in ((0.1, 0.01), (0.2, 0.01), (0.3, 0.02)):
        exact = characteristic_exponent(MathieuParams(0.0, q)).beta
        assert abs(lowest_order_beta(MathieuParams(0.0, q)) - exact) / exact <= limit
    exact = characteristic_exponent(MathieuParams(0.0, 0.9)).beta
    assert abs(lowest_order_beta(MathieuParams(0.0, 0.9)) - exact) / exact > 0.10


def test_lowest_order_domain():
    with pytest.raises(DomainError):
        lowest_order_beta(MathieuParams(-0.1, 0.1))


def test_boundary_at_zero_a():
    assert stability_boundary_q(0.0) == pytest.approx(0.908, abs=0.002)


def test_split_pair_boundaries():
    b = split_pair_boundaries(0.0018)
    assert b['minus'] > b['plus']
    assert b['relevant'] == b['minus']
    assert b['relevant'] == pytest.approx(0.911, abs=0.005)


def test_stability_diagram_matches_exact_verdicts():
    a_values = [-0.1, 0.0, 0.1]
    q_values = [0.2, 0.5, 0.85, 0.95, 1.0]
    grid = stability_diagram(a_values, q_values)
    for i, a in enumerate(a_values):
        for j, q in enumerate(q_values):
            assert grid[i, j] == characteristic_exponent((a, q)).stable


@pytest.mark.parametrize('a, q', [(10.0, 0.1), (0.0, -12.0), (np.nan, 0.1)])
def test_param_bounds(a, q):
    with pytest.raises(DomainError):
        MathieuParams(a, q)


def test_tolerance_bounds():
    with pytest.raises(DomainError):
        characteristic_exponent((0.0, 0.3), tolerance=1e-2)


def test_params_from_coefficients(ca40):
    drive = DriveConfig(omega_rf=2 * np.pi * 20e6, u_tilde=10.0, u_dc=1.0)
    p = params_from_coefficients(ca40, drive, A=1e8, A_prime=2e8)
    scale = ca40.charge / (ca40.mass * drive.omega_rf ** 2)
    assert p.a == pytest.approx(4 * scale * 1e8)
    assert p.q == pytest.approx(-2 * scale * 10.0 * 2e8)


def test_courant_snyder_invariant_conserved():
    floquet = characteristic_exponent((0.0, 0.4))
    traj = mathieu_trajectories(0.0, 0.4, periods=100).trajectory(0, omega_rf=2 * np.pi * 10e6)
    assert secular_energy_drift(traj, floquet) < 1e-4
