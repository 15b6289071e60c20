"""Fixed-step integration of the full RF equation of motion"""

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from tqdm import tqdm

from PaulSim.mathieu.mathieu_core import courant_snyder_invariant
from PaulSim.utilities.exceptions import DomainError
from PaulSim.utilities.logger import get_logger
from PaulSim.utilities.utils import as_points

logger = get_logger(__name__)

MIN_STEPS_PER_PERIOD = 50
MIN_SAMPLES_PER_PERIOD = 20
DEFAULT_STEPS_PER_PERIOD = 64


@dataclass(frozen=True)
class Trajectory:
    """
    Uniformly sampled motion.

    `phases` is the drive phase omega_rf t (unwrapped). Motion that left the
    region |r - r_null| <= d is kept up to the escape and flagged.
    """
    times: np.ndarray = field(repr=False)
    positions: np.ndarray = field(repr=False)
    velocities: np.ndarray = field(repr=False)
    phases: np.ndarray = field(repr=False)
    omega_rf: float
    samples_per_period: int
    escaped: bool = False
    escape_time: float = None

    @property
    def sample_rate(self):
        """Samples per second."""
        return self.samples_per_period * self.omega_rf / (2 * np.pi)

    @property
    def duration(self):
        return float(self.times[-1] - self.times[0])

    def stroboscopic(self):
        """Samples at integer RF periods (drive phase 0)."""
        idx = np.arange(0, self.times.size, self.samples_per_period)
        return self.times[idx], self.positions[idx], self.velocities[idx]


def _steps_per_period(drive, dt, steps_per_period):
    period = drive.period
    if dt is not None:
        if dt > period / MIN_STEPS_PER_PERIOD * (1 + 1e-12):
            raise DomainError('dt = %.3g s exceeds T_rf/%d = %.3g s'
                              % (dt, MIN_STEPS_PER_PERIOD, period / MIN_STEPS_PER_PERIOD))
        return int(math.ceil(period / dt - 1e-9))
    if steps_per_period < MIN_STEPS_PER_PERIOD:
        raise DomainError('need at least %d steps per RF period, got %d'
                          % (MIN_STEPS_PER_PERIOD, steps_per_period))
    return int(steps_per_period)


def integrate(basis, drive, species, r0, v0, duration, dt=None,
              steps_per_period=DEFAULT_STEPS_PER_PERIOD, sample_every=1, null=None,
              verbose=False):
    """
    RK4 integration of m r'' = Z e [E_static(r) + cos(omega_rf t) E_rf(r)].

    The step is an integer fraction of the RF period, so stroboscopic samples
    and spectra are free of drive-phase aliasing.

    Parameters
    ----------
    basis (FieldBasis)
    drive (DriveConfig)
    species (IonSpecies)
    r0, v0 (array-like):
        Initial position (m) and velocity (m/s).
    duration (float):
        Seconds; rounded up to whole steps.
    dt (float or None):
        Requested step, at most T_rf/50; rounded down to an integer fraction
        of the period. Overrides steps_per_period.
    steps_per_period (int)
    sample_every (int):
        Keep every n-th step; at least 20 samples per period must remain.
    null (array-like or None):
        Center of the escape guard |r - null| > d; the origin by default.
    verbose (bool):
        Show a progress bar.

    Returns
    -------
    Trajectory. Escape is reported on the result, not raised.
    """
    n_per = _steps_per_period(drive, dt, steps_per_period)
    if n_per % sample_every:
        raise DomainError('sample_every must divide the %d steps per period' % n_per)
    if n_per // sample_every < MIN_SAMPLES_PER_PERIOD:
        raise DomainError('fewer than %d samples per RF period' % MIN_SAMPLES_PER_PERIOD)
    h = drive.period / n_per
    n_steps = int(math.ceil(duration / h - 1e-9))

    w_rf = basis.weights(drive.rf_voltages())
    w_s = basis.weights(drive.dc_voltages())
    qm = species.charge / species.mass
    omega = drive.omega_rf
    null = np.zeros(3) if null is None else as_points(null)[0]
    limit = basis.length_scale

    def accel(t, r):
        F = basis.fields(r)[0]
        return qm * (w_s @ F + math.cos(omega * t) * (w_rf @ F))

    r = as_points(r0)[0].copy()
    v = np.asarray(v0, dtype=float).copy()
    n_out = n_steps // sample_every + 1
    times = np.empty(n_out)
    pos = np.empty((n_out, 3))
    vel = np.empty((n_out, 3))
    times[0], pos[0], vel[0] = 0.0, r, v
    escaped, escape_time, k = False, None, 0

    for step in tqdm(range(n_steps), disable=not verbose, desc='integrate', leave=False):
        t = step * h
        a1 = accel(t, r)
        r2, v2 = r + 0.5 * h * v, v + 0.5 * h * a1
        a2 = accel(t + 0.5 * h, r2)
        r3, v3 = r + 0.5 * h * v2, v + 0.5 * h * a2
        a3 = accel(t + 0.5 * h, r3)
        r4, v4 = r + h * v3, v + h * a3
        a4 = accel(t + h, r4)
        r = r + h / 6.0 * (v + 2 * v2 + 2 * v3 + v4)
        v = v + h / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
        if (step + 1) % sample_every == 0:
            k += 1
            times[k], pos[k], vel[k] = (step + 1) * h, r, v
        if np.linalg.norm(r - null) > limit:
            escaped, escape_time = True, (step + 1) * h
            logger.info('escape after %.4g s (%.1f RF periods)', escape_time,
                        escape_time / drive.period)
            break

    return Trajectory(times=times[:k + 1], positions=pos[:k + 1], velocities=vel[:k + 1],
                      phases=omega * times[:k + 1], omega_rf=omega,
                      samples_per_period=n_per // sample_every,
                      escaped=escaped, escape_time=escape_time)


###############################################################################
# Batched one-dimensional Mathieu motion

@dataclass(frozen=True)
class MathieuTrajectories:
    """
    Solutions of x'' + (a - 2q cos 2 xi) x = 0 in units of d, sampled every step.

    x and v have shape (n_samples, n_runs); v is dx/dxi.
    """
    xi: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    escaped: np.ndarray
    escape_xi: np.ndarray = field(repr=False)
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD

    def trajectory(self, i, omega_rf, d=1.0):
        """Run i as a Trajectory along x, with t = 2 xi / omega_rf."""
        n = self.xi.size
        pos = np.zeros((n, 3))
        vel = np.zeros((n, 3))
        pos[:, 0] = self.x[:, i] * d
        vel[:, 0] = self.v[:, i] * d * omega_rf / 2.0
        t = 2.0 * self.xi / omega_rf
        return Trajectory(times=t, positions=pos, velocities=vel, phases=omega_rf * t,
                          omega_rf=omega_rf, samples_per_period=self.steps_per_period,
                          escaped=bool(self.escaped[i]),
                          escape_time=None if not self.escaped[i] else
                          2.0 * float(self.escape_xi[i]) / omega_rf)


def mathieu_trajectories(a, q, x0=1e-3, v0=0.0, periods=200,
                         steps_per_period=DEFAULT_STEPS_PER_PERIOD, escape=1.0):
    """
    Integrate many 1-D Mathieu runs side by side with the same RK4 stepper.

    One RF period is pi in xi. A run escapes once |x| exceeds `escape` (in
    units of d); it is frozen from then on.
    """
    a, q = np.broadcast_arrays(np.atleast_1d(np.asarray(a, dtype=float)),
                               np.atleast_1d(np.asarray(q, dtype=float)))
    n = a.size
    h = np.pi / steps_per_period
    n_steps = periods * steps_per_period
    x = np.full(n, float(x0))
    v = np.full(n, float(v0))
    xs = np.empty((n_steps + 1, n))
    vs = np.empty((n_steps + 1, n))
    xs[0], vs[0] = x, v
    escaped = np.zeros(n, dtype=bool)
    escape_xi = np.full(n, np.nan)

    def acc(xi, x):
        return -(a - 2.0 * q * np.cos(2.0 * xi)) * x

    for step in range(n_steps):
        xi = step * h
        k1x, k1v = v, acc(xi, x)
        k2x, k2v = v + 0.5 * h * k1v, acc(xi + 0.5 * h, x + 0.5 * h * k1x)
        k3x, k3v = v + 0.5 * h * k2v, acc(xi + 0.5 * h, x + 0.5 * h * k2x)
        k4x, k4v = v + h * k3v, acc(xi + h, x + h * k3x)
        x_new = x + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        v_new = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        x = np.where(escaped, x, x_new)
        v = np.where(escaped, v, v_new)
        out = ~escaped & (np.abs(x) > escape)
        escape_xi[out] = (step + 1) * h
        escaped |= out
        xs[step + 1], vs[step + 1] = x, v
    return MathieuTrajectories(xi=np.arange(n_steps + 1) * h, x=xs, v=vs, escaped=escaped,
                               escape_xi=escape_xi, steps_per_period=steps_per_period)


###############################################################################
# Checks and output

def secular_energy_drift(traj, floquet, axis=0, d=1.0):
    """
    Relative spread (max - min) / mean of the Courant-Snyder invariant over
    the stroboscopic samples of one axis. Positions are taken in units of d
    and velocities as dx/dxi = 2 v / omega_rf.
    """
    _, pos, vel = traj.stroboscopic()
    x = pos[:, axis] / d
    v = 2.0 * vel[:, axis] / (traj.omega_rf * d)
    J = courant_snyder_invariant(floquet, x, v)
    return float((J.max() - J.min()) / abs(J.mean()))


def trajectory_frame(traj):
    """Columns t_us, x_um, y_um, z_um."""
    return pd.DataFrame({'t_us': traj.times * 1e6,
                         'x_um': traj.positions[:, 0] * 1e6,
                         'y_um': traj.positions[:, 1] * 1e6,
                         'z_um': traj.positions[:, 2] * 1e6})
