import warnings

import numpy as np
import pytest
from scipy import constants

from conftest import D, ideal_q
from PaulSim.effective.modes import pseudopotential_frequencies, secular_modes
from PaulSim.effective.pseudopotential import (Grid, harmonicity_residual, map_frame,
                                               pseudopotential_map, trap_depth)
from PaulSim.effective.tradeoff import (TrapMetrics, power_estimate, q_from_efficiency,
                                        rf_efficiency, trap_metrics, tradeoff_sweep,
                                        u_tilde_for_q)
from PaulSim.fields.geometry import build_geometry
from PaulSim.mathieu.mathieu_core import MathieuParams, characteristic_exponent
from PaulSim.model.drive import DriveConfig
from PaulSim.utilities.exceptions import AccuracyError, AccuracyWarning, DomainError, NoTrapError
from PaulSim.utilities.utils import rotation_matrix

EV = constants.electron_volt


@pytest.fixture
def radial_grid():
    return Grid.box((-0.5 * D, -0.5 * D, 0.0), (0.5 * D, 0.5 * D, 0.0), 41)


def test_ideal_secular_modes(ideal_basis, drive, ca40):
    modes = secular_modes(ideal_basis, drive, ca40)
    assert modes.free[0] and modes.frequencies[0] == 0.0
    assert not modes.free[1:].any()
    assert modes.frequencies[1] == pytest.approx(modes.frequencies[2], rel=1e-9)
    q = ideal_q(ca40, drive)
    for p in modes.params[1:]:
        assert abs(p.q) == pytest.approx(q, rel=1e-6)
        assert p.a == 0.0
    beta = characteristic_exponent(MathieuParams(0.0, q)).beta
    assert modes.frequencies[2] == pytest.approx(beta * drive.omega_rf / 2, rel=1e-6)
    np.testing.assert_allclose(modes.f, modes.frequencies / (2 * np.pi))


def test_pseudopotential_frequencies_match_floquet_at_small_q(ideal_basis, drive, ca40):
    weak = DriveConfig(omega_rf=drive.omega_rf, u_tilde=drive.u_tilde * 0.1 / ideal_q(ca40, drive),
                       polarity=drive.polarity)
    floquet = secular_modes(ideal_basis, weak, ca40).frequencies[1:]
    pseudo = pseudopotential_frequencies(ideal_basis, weak, ca40)
    radial = np.sort(pseudo[np.isfinite(pseudo)])[-2:]
    np.testing.assert_allclose(radial, floquet, rtol=0.01)


def test_ideal_depth_and_harmonicity(ideal_basis, drive, ca40, radial_grid):
    pmap = pseudopotential_map(ideal_basis, drive, ca40, radial_grid)
    np.testing.assert_allclose(pmap.minimum_position, [0.0, 0.0, 0.0], atol=1e-12)
    edge_field = 2 * drive.u_tilde * 0.5 * D / D ** 2
    expected = (ca40.charge * edge_field) ** 2 / (4 * ca40.mass * drive.omega_rf ** 2) / EV
    assert trap_depth(pmap) == pytest.approx(expected, rel=1e-6)
    with warnings.catch_warnings():
        warnings.simplefilter('error', AccuracyWarning)
        assert harmonicity_residual(pmap) < 1e-8


def test_map_frame_columns(ideal_basis, drive, ca40, radial_grid):
    frame = map_frame(pseudopotential_map(ideal_basis, drive, ca40, radial_grid))
    assert list(frame.columns) == ['x_um', 'y_um', 'z_um', 'U_ps_eV']
    assert len(frame) == 41 * 41


def test_minimum_on_boundary_is_not_a_trap(ideal_basis, drive, ca40):
    grid = Grid.box((0.1 * D, -0.5 * D, 0.0), (0.5 * D, 0.5 * D, 0.0), 21)
    with pytest.raises(NoTrapError):
        trap_depth(pseudopotential_map(ideal_basis, drive, ca40, grid))


def test_coarse_window_warns(ideal_basis, drive, ca40):
    grid = Grid.box((-0.5 * D, -0.5 * D, 0.0), (0.5 * D, 0.5 * D, 0.0), 21)
    pmap = pseudopotential_map(ideal_basis, drive, ca40, grid)
    with pytest.warns(AccuracyWarning):
        harmonicity_residual(pmap, window=0.3 * D)


def test_grid_on_electrode_surface(ca40):
    trap = build_geometry('surface5wire', d=D)
    drive = DriveConfig.from_frequency(20e6, 10.0, polarity=trap.polarity)
    grid = Grid.box((-0.5 * D, 0.0, 0.0), (0.5 * D, 0.0, D), 11)
    with pytest.raises(AccuracyError):
        pseudopotential_map(trap.basis, drive, ca40, grid)


def test_depth_invariant_under_rigid_rotation(ca40):
    trap = build_geometry('surface5wire', d=D)
    drive = DriveConfig.from_frequency(20e6, 10.0, polarity=trap.polarity)
    lo, hi, n = (-1.5 * D, 0.0, 0.2 * D), (1.5 * D, 0.0, 3.0 * D), (31, 1, 29)
    depth = trap_depth(pseudopotential_map(trap.basis, drive, ca40, Grid.box(lo, hi, n)))
    R = rotation_matrix([1.0, 2.0, 0.5], 0.7)
    grid = Grid.box(lo, hi, n, rotation=R)
    rotated = pseudopotential_map(trap.basis.rotated(R), drive, ca40, grid)
    assert depth > 0
    assert trap_depth(rotated) == pytest.approx(depth, rel=1e-9)


def test_grid_axes_must_increase():
    with pytest.raises(DomainError):
        Grid(np.array([0.0, -1.0]), np.zeros(1), np.zeros(1))


def test_efficiencies():
    eff_3d, center = rf_efficiency(build_geometry('ideal3d', d=D, kappa=0.75))
    assert eff_3d == pytest.approx(1.5, rel=1e-6)
    np.testing.assert_allclose(center, 0.0, atol=1e-12)
    eff_s, center = rf_efficiency(build_geometry('surface5wire', d=D))
    assert eff_s == pytest.approx(1 / np.pi, rel=0.01)
    assert center[2] == pytest.approx(D, rel=0.01)


def test_drive_for_q_inverts_q(ca40):
    omega = 2 * np.pi * 40e6
    u = u_tilde_for_q(0.4, 0.3, D, ca40, omega)
    assert q_from_efficiency(0.3, D, ca40, u, omega) == pytest.approx(0.4, rel=1e-12)


def test_power_estimate():
    assert power_estimate(10.0, 2 * np.pi * 1e6, 1e-12, 2.0) == pytest.approx(
        (10.0 * 2 * np.pi * 1e6 * 1e-12) ** 2)
    with pytest.raises(DomainError):
        power_estimate(-1.0, 1e6)


def test_tradeoff_ratios(ca40):
    result = tradeoff_sweep(build_geometry('ideal3d', d=D, kappa=0.75),
                            build_geometry('surface5wire', d=D), ca40, 150.0,
                            [40e6, 80e6, 120e6], f_point=80e6)
    assert 4.0 <= result.ratios['same_drive'] <= 6.0
    assert 1.5 <= result.ratios['same_q'] <= 2.5
    assert result.ratios['power_same_target'] >= 10.0
    assert list(result.points.point) == ['1', '2', '3']
    assert list(result.curves.columns) == ['omega_rf_MHz', 'omega_3d_MHz', 'omega_surf_MHz',
                                           'q_3d', 'q_surf']
    assert len(result.q_lines) == 5 * 3
    # the 3D trap at 40 MHz and 150 V is far outside the first stability region
    assert np.isnan(result.curves.omega_3d_MHz.iloc[0])


def test_tradeoff_needs_common_length_scale(ca40):
    with pytest.raises(DomainError):
        tradeoff_sweep(build_geometry('ideal3d', d=D), build_geometry('surface5wire', d=2 * D),
                       ca40, 150.0, [80e6])


def test_trap_metrics(ca40, radial_grid):
    trap = build_geometry('ideal3d', d=D)
    drive = DriveConfig.from_frequency(20e6, 10.0, polarity=trap.polarity)
    metrics = trap_metrics(trap, drive, ca40, radial_grid)
    assert metrics.depth > 0
    assert metrics.efficiency == pytest.approx(2.0, rel=1e-6)
    assert metrics.harmonicity < 1e-8
    with pytest.raises(DomainError):
        TrapMetrics(depth=-1.0, harmonicity=0.0, efficiency=1.0, power=0.0)
