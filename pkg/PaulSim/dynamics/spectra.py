"""Spectral analysis of trajectories: secular peaks, sidebands and micromotion"""

from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar
from scipy.signal import find_peaks, get_window

from PaulSim.utilities.exceptions import ResolutionError, StabilityError
from PaulSim.utilities.logger import get_logger

logger = get_logger(__name__)

MIN_SECULAR_PERIODS = 200
ZERO_PAD = 4


@dataclass(frozen=True)
class SpectralEstimate:
    """
    Peaks of one axis, strongest first. Frequencies in Hz.

    `rbw` is the equivalent noise bandwidth of the window on the record;
    interpolated peak frequencies are accurate to well below rbw / 2.
    """
    axis: int
    peaks: np.ndarray
    amplitudes: np.ndarray
    rbw: float
    secular: float
    sidebands: dict
    freqs: np.ndarray = field(repr=False)
    spectrum: np.ndarray = field(repr=False)


def _amplitude_spectrum(x, w, fs, n_fft):
    X = np.fft.rfft((x - x.mean()) * w, n=n_fft)
    return np.fft.rfftfreq(n_fft, 1.0 / fs), 2.0 * np.abs(X) / w.sum()


def _dtft_amplitude(x, w, t, f):
    return 2.0 * np.abs(np.sum((x - x.mean()) * w * np.exp(-2j * np.pi * f * t))) / w.sum()


def _refine(x, w, t, freqs, spec, i):
    """Parabolic interpolation on the padded spectrum, then a bounded DTFT maximization."""
    df = freqs[1] - freqs[0]
    if 0 < i < spec.size - 1:
        y0, y1, y2 = spec[i - 1], spec[i], spec[i + 1]
        denom = y0 - 2 * y1 + y2
        offset = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
    else:
        offset = 0.0
    f0 = freqs[i] + offset * df
    res = minimize_scalar(lambda f: -_dtft_amplitude(x, w, t, f),
                          bounds=(f0 - df, f0 + df), method='bounded',
                          options={'xatol': df * 1e-6})
    return float(res.x), float(-res.fun)


def spectral_peaks(traj, window='hann', axis=None, n_peaks=6, min_periods=MIN_SECULAR_PERIODS):
    """
    Windowed FFT of one axis of a trajectory.

    The secular peak is the strongest line below f_rf / 2; micromotion
    sidebands are then located next to f_rf -+ f_secular.

    Parameters
    ----------
    traj (Trajectory)
    window (str):
        Any scipy.signal window name.
    axis (int or None):
        Coordinate to analyze; by default the one with the largest variance.
    n_peaks (int):
        Number of strongest local maxima to report.
    min_periods (int):
        Required record length in secular periods.

    Raises
    ------
    ResolutionError if the record spans fewer than `min_periods` secular periods.
    """
    if axis is None:
        axis = int(np.argmax(traj.positions.var(axis=0)))
    x = traj.positions[:, axis]
    t = traj.times
    n = x.size
    fs = traj.sample_rate
    w = get_window(window, n)
    rbw = fs * np.sum(w ** 2) / np.sum(w) ** 2
    n_fft = ZERO_PAD * 2 ** int(np.ceil(np.log2(n)))
    freqs, spec = _amplitude_spectrum(x, w, fs, n_fft)

    f_rf = traj.omega_rf / (2 * np.pi)
    below = freqs < f_rf / 2
    if not np.any(spec[below] > 0):
        raise ResolutionError('no secular motion found below f_rf/2')
    i_sec = int(np.argmax(np.where(below, spec, 0.0)))
    f_sec, _ = _refine(x, w, t, freqs, spec, i_sec)
    if f_sec * traj.duration < min_periods:
        raise ResolutionError('record spans %.1f secular periods, need %d'
                              % (f_sec * traj.duration, min_periods))

    idx, _ = find_peaks(spec)
    idx = idx[np.argsort(spec[idx])[::-1][:n_peaks]]
    refined = [_refine(x, w, t, freqs, spec, i) for i in idx]
    refined.sort(key=lambda fa: -fa[1])
    peaks = np.array([f for f, _ in refined])
    amps = np.array([a for _, a in refined])

    sidebands = {}
    df = freqs[1] - freqs[0]
    for name, target in (('lower', f_rf - f_sec), ('upper', f_rf + f_sec)):
        if target >= freqs[-1]:
            continue
        j = int(np.argmin(np.abs(freqs - target)))
        lo, hi = max(j - 3 * ZERO_PAD, 1), min(j + 3 * ZERO_PAD, spec.size - 2)
        j = lo + int(np.argmax(spec[lo:hi + 1]))
        sidebands[name] = _refine(x, w, t, freqs, spec, j)
    logger.debug('axis %d: secular %.6g Hz, rbw %.3g Hz, %d samples', axis, f_sec, rbw, n)
    return SpectralEstimate(axis=axis, peaks=peaks, amplitudes=amps, rbw=float(rbw),
                            secular=f_sec, sidebands=sidebands, freqs=freqs, spectrum=spec)


def micromotion_amplitude(traj, axis=None, min_periods=MIN_SECULAR_PERIODS):
    """
    RF-synchronous to secular amplitude ratio (|C(f_rf - f)| + |C(f_rf + f)|) / |C(f)|.

    Line amplitudes come from a linear least-squares fit of sinusoids at the
    secular frequency and both sidebands; first-order expectation q / 2.

    Raises
    ------
    StabilityError for an escaped trajectory.
    """
    if traj.escaped:
        raise StabilityError('trajectory escaped at %.4g s; no micromotion amplitude'
                             % traj.escape_time)
    est = spectral_peaks(traj, axis=axis, min_periods=min_periods)
    x = traj.positions[:, est.axis]
    t = traj.times
    f_rf = traj.omega_rf / (2 * np.pi)
    lines = [est.secular, f_rf - est.secular, f_rf + est.secular]
    cols = [np.ones_like(t)]
    for f in lines:
        cols += [np.cos(2 * np.pi * f * t), np.sin(2 * np.pi * f * t)]
    coef, *_ = np.linalg.lstsq(np.stack(cols, axis=1), x, rcond=None)
    amp = np.hypot(coef[1::2], coef[2::2])
    if amp[0] == 0:
        return 0.0
    return float((amp[1] + amp[2]) / amp[0])


def spectrum_frame(traj, window='hann'):
    """Columns f_MHz, amp_x, amp_y, amp_z (amplitudes in um)."""
    n = traj.times.size
    w = get_window(window, n)
    n_fft = ZERO_PAD * 2 ** int(np.ceil(np.log2(n)))
    out = {}
    for k, name in enumerate('xyz'):
        freqs, spec = _amplitude_spectrum(traj.positions[:, k], w, traj.sample_rate, n_fft)
        out['amp_' + name] = spec * 1e6
    return pd.DataFrame({'f_MHz': freqs / 1e6, **out})
