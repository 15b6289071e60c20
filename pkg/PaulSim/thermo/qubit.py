"""Lamb-Dicke coupling, thermal Rabi dephasing and sideband spectra"""

import itertools
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import constants

from PaulSim.utilities.exceptions import DomainError, ValidityError
from PaulSim.utilities.logger import get_logger

logger = get_logger(__name__)

HBAR = constants.hbar
CA_729_WAVELENGTH = 729e-9
LAMB_DICKE_LIMIT = 0.1
# occupation combinations evaluated per block
BLOCK = 20_000


def lamb_dicke(wavelength, species, omega_mode, angle=0.0):
    """eta = (2 pi / lambda) cos(angle) sqrt(hbar / (2 m omega))."""
    if not omega_mode > 0:
        raise DomainError('omega_mode must be positive, got %r' % omega_mode)
    c = np.cos(angle)
    if abs(c) < 1e-12:
        c = 0.0
    return float(2 * np.pi / wavelength * abs(c) * np.sqrt(HBAR / (2 * species.mass * omega_mode)))


@dataclass(frozen=True)
class QubitCoupling:
    """
    Optical qubit drive.

    Parameters
    ----------
    rabi (float):
        Bare Rabi frequency Omega_0, rad/s.
    eta (tuple):
        Lamb-Dicke parameter of every mode.
    wavelength (float):
        Qubit wavelength, m.
    detuning (float):
        Laser detuning, rad/s.
    """
    rabi: float
    eta: tuple = field(default_factory=tuple)
    wavelength: float = CA_729_WAVELENGTH
    detuning: float = 0.0

    def __post_init__(self):
        if not self.rabi > 0:
            raise DomainError('rabi frequency must be positive, got %r' % self.rabi)
        eta = tuple(float(e) for e in np.atleast_1d(self.eta))
        if any(e < 0 or not np.isfinite(e) for e in eta):
            raise DomainError('Lamb-Dicke parameters must be non-negative')
        object.__setattr__(self, 'eta', eta)


def _check(coupling, states):
    if len(states) != len(coupling.eta):
        raise DomainError('%d thermal states for %d modes' % (len(states), len(coupling.eta)))
    for i, (eta, state) in enumerate(zip(coupling.eta, states)):
        if eta ** 2 * (2 * state.nbar + 1) >= LAMB_DICKE_LIMIT:
            raise ValidityError('mode %d violates the Lamb-Dicke regime: eta^2 (2 nbar + 1) = %.3g'
                                % (i, eta ** 2 * (2 * state.nbar + 1)), mode=i)


def _occupation_blocks(coupling, states, tail=1e-8):
    """Yield (weights, Omega) over the product of per-mode occupations, in blocks."""
    probs = [s.probabilities(tail) for s in states]
    if not probs:
        yield np.ones(1), np.full(1, coupling.rabi)
        return
    eta2 = np.array(coupling.eta) ** 2
    total = int(np.prod([p.size for p in probs]))
    combos = itertools.product(*[range(p.size) for p in probs])
    for _ in range(0, total, BLOCK):
        n = np.array(list(itertools.islice(combos, BLOCK)))
        w = np.prod([probs[i][n[:, i]] for i in range(len(probs))], axis=0)
        yield w, coupling.rabi * (1.0 - n @ eta2)


def thermal_rabi_signal(coupling, states, times):
    """
    P(t) = sum_n prod_i p(n_i) sin^2(Omega(n) t / 2) with
    Omega(n) = Omega_0 (1 - sum_i n_i eta_i^2), summed directly.

    Occupations are cut where the thermal tail falls below 1e-8 and the
    kept weights renormalized.

    Raises
    ------
    ValidityError naming the mode that violates eta^2 (2 nbar + 1) < 0.1.
    """
    _check(coupling, states)
    times = np.asarray(times, dtype=float)
    acc = np.zeros_like(times)
    norm = 0.0
    for w, omega in _occupation_blocks(coupling, states):
        acc += w @ np.sin(np.outer(omega, times) / 2.0) ** 2
        norm += w.sum()
    return acc / norm


def thermal_rabi_shift(coupling, states):
    """Relative Rabi frequency shift sum_i nbar_i eta_i^2."""
    return float(sum(s.nbar * e ** 2 for s, e in zip(states, coupling.eta)))


def mean_rabi(coupling, states):
    return coupling.rabi * (1.0 - thermal_rabi_shift(coupling, states))


def contrast_maxima(coupling, states, n_osc=11):
    """Excitation at the first n_osc maxima, t_k = (2k + 1) pi / Omega_mean."""
    t = (2 * np.arange(n_osc) + 1) * np.pi / mean_rabi(coupling, states)
    return thermal_rabi_signal(coupling, states, t)


def pi_pulse_error(coupling, states):
    """
    1 - P(t_pi) for a pulse calibrated to the thermal mean, t_pi = pi / Omega_mean.

    Evaluated as the weighted cos^2 sum, which keeps precision for errors far
    below the occupation cutoff.
    """
    _check(coupling, states)
    t_pi = np.pi / mean_rabi(coupling, states)
    acc = norm = 0.0
    for w, omega in _occupation_blocks(coupling, states):
        acc += float(w @ np.cos(omega * t_pi / 2.0) ** 2)
        norm += float(w.sum())
    return acc / norm


@dataclass(frozen=True)
class SidebandSpectrum:
    detunings: np.ndarray = field(repr=False)
    excitation: np.ndarray = field(repr=False)
    red_peak: float
    blue_peak: float

    @property
    def ratio(self):
        return self.red_peak / self.blue_peak

    def frame(self):
        return pd.DataFrame({'delta_MHz': self.detunings / (2 * np.pi * 1e6),
                             'P': self.excitation})


def sideband_spectrum(coupling, state, detunings, probe_time, omega_mode, mode=0):
    """
    Weak-probe red and blue sideband lines of one mode.

        P(Delta) = sum_n p_n [ (Omega_0 eta sqrt(n) tau / 2)^2 sinc^2((Delta + omega) tau / 2)
                             + (Omega_0 eta sqrt(n+1) tau / 2)^2 sinc^2((Delta - omega) tau / 2) ]

    The carrier is not modeled. red_peak and blue_peak are each line's own
    height at Delta = -omega and +omega.

    Raises
    ------
    DomainError if the detuning grid covers neither sideband.
    """
    detunings = np.asarray(detunings, dtype=float)
    lo, hi = detunings.min(), detunings.max()
    if not (lo <= -omega_mode <= hi or lo <= omega_mode <= hi):
        raise DomainError('detuning grid [%.4g, %.4g] rad/s excludes both sidebands at +-%.4g'
                          % (lo, hi, omega_mode))
    eta = coupling.eta[mode]
    p = state.probabilities(tail=1e-12)
    n = np.arange(p.size)
    strength = (coupling.rabi * eta * probe_time / 2.0) ** 2
    red = strength * np.sum(p * n)
    blue = strength * np.sum(p * (n + 1))

    def line(center):
        # np.sinc(x) = sin(pi x) / (pi x)
        return np.sinc((detunings - center) * probe_time / (2 * np.pi)) ** 2

    excitation = red * line(-omega_mode) + blue * line(omega_mode)
    return SidebandSpectrum(detunings, excitation, float(red), float(blue))


def rabi_frame(times, signal):
    return pd.DataFrame({'t_us': np.asarray(times) * 1e6, 'P': signal})
