import numpy as np
import pytest

from conftest import ideal_q
from PaulSim.dynamics.integrator import integrate, mathieu_trajectories, trajectory_frame
from PaulSim.dynamics.spectra import micromotion_amplitude, spectral_peaks, spectrum_frame
from PaulSim.effective.modes import secular_modes
from PaulSim.mathieu.mathieu_core import MathieuParams, characteristic_exponent
from PaulSim.model.drive import DriveConfig
from PaulSim.utilities.exceptions import DomainError, ResolutionError, StabilityError
from PaulSim.utilities.utils import check_rng

OMEGA_RF = 2 * np.pi * 20e6


def _drive_for_q(species, drive, q):
    u = drive.u_tilde * q / ideal_q(species, drive)
    return DriveConfig(omega_rf=drive.omega_rf, u_tilde=u, polarity=drive.polarity)


def test_spectral_secular_matches_floquet():
    rng = check_rng(7)
    a = rng.uniform(0.0, 0.02, 10)
    q = rng.uniform(0.3, 0.7, 10)
    runs = mathieu_trajectories(a, q, periods=2400)
    assert not runs.escaped.any()
    for i in range(10):
        beta = characteristic_exponent(MathieuParams(a[i], q[i])).beta
        est = spectral_peaks(runs.trajectory(i, OMEGA_RF), axis=0, n_peaks=1)
        expected = beta * OMEGA_RF / 2 / (2 * np.pi)
        assert est.secular == pytest.approx(expected, rel=0.005)
        assert est.rbw < 0.01 * expected
        assert set(est.sidebands) == {'lower', 'upper'}


def test_stability_verdict_matches_direct_integration():
    rng = check_rng(3)
    a = rng.uniform(-0.1, 0.1, 50)
    q = rng.uniform(0.0, 1.2, 50)
    results = [characteristic_exponent(MathieuParams(ai, qi)) for ai, qi in zip(a, q)]
    stable = np.array([r.stable for r in results])
    # marginal points grow too slowly to escape within the record
    clear = np.array([abs(abs(r.monodromy_trace) - 2.0) > 0.05 for r in results])
    assert clear.sum() >= 35
    runs = mathieu_trajectories(a, q, periods=400)
    np.testing.assert_array_equal(runs.escaped[clear], ~stable[clear])


def test_micromotion_ratio_follows_q():
    runs = mathieu_trajectories(0.0, 0.2, periods=3200)
    ratio = micromotion_amplitude(runs.trajectory(0, OMEGA_RF))
    assert ratio == pytest.approx(0.1, rel=0.1)


def test_escaped_run_has_no_micromotion():
    runs = mathieu_trajectories(0.0, 1.5, periods=200)
    assert runs.escaped[0]
    traj = runs.trajectory(0, OMEGA_RF)
    assert traj.escaped and traj.escape_time > 0
    with pytest.raises(StabilityError):
        micromotion_amplitude(traj)


def test_short_record_is_rejected():
    runs = mathieu_trajectories(0.0, 0.5, periods=100)
    with pytest.raises(ResolutionError):
        spectral_peaks(runs.trajectory(0, OMEGA_RF), axis=0)


def test_step_limits(ideal_basis, drive, ca40):
    with pytest.raises(DomainError):
        integrate(ideal_basis, drive, ca40, [1e-6, 0, 0], [0, 0, 0], drive.period,
                  steps_per_period=20)
    with pytest.raises(DomainError):
        integrate(ideal_basis, drive, ca40, [1e-6, 0, 0], [0, 0, 0], drive.period,
                  dt=drive.period / 10)
    with pytest.raises(DomainError):
        integrate(ideal_basis, drive, ca40, [1e-6, 0, 0], [0, 0, 0], drive.period,
                  steps_per_period=60, sample_every=7)


def test_integrated_secular_frequency(ideal_basis, drive, ca40):
    drive = _drive_for_q(ca40, drive, 0.4)
    modes = secular_modes(ideal_basis, drive, ca40)
    traj = integrate(ideal_basis, drive, ca40, [1e-6, 0.0, 0.0], [0.0, 0.0, 0.0],
                     1500 * drive.period, steps_per_period=50)
    assert not traj.escaped
    assert traj.samples_per_period == 50
    est = spectral_peaks(traj, n_peaks=1)
    assert est.axis == 0
    assert est.secular == pytest.approx(modes.f[2], rel=0.005)

    frame = trajectory_frame(traj)
    assert list(frame.columns) == ['t_us', 'x_um', 'y_um', 'z_um']
    assert len(frame) == traj.times.size
    assert list(spectrum_frame(traj).columns) == ['f_MHz', 'amp_x', 'amp_y', 'amp_z']
    t, pos, _ = traj.stroboscopic()
    np.testing.assert_allclose(np.diff(t), drive.period, rtol=1e-9)


def test_unstable_drive_escapes(ideal_basis, drive, ca40):
    drive = _drive_for_q(ca40, drive, 1.5)
    traj = integrate(ideal_basis, drive, ca40, [1e-6, 0.0, 0.0], [0.0, 0.0, 0.0],
                     100 * drive.period, steps_per_period=50)
    assert traj.escaped
    assert traj.escape_time < 100 * drive.period
    assert np.linalg.norm(traj.positions[-1]) > ideal_basis.length_scale
