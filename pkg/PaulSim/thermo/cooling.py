"""Doppler cooling limit, sideband thermometry and heating-rate scaling"""

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from PaulSim.utilities.exceptions import DomainError

# Ca+ S1/2 - P1/2 (397 nm) natural linewidth
CA_397_LINEWIDTH = 2 * np.pi * 21.6e6
CA_397_WAVELENGTH = 397e-9
# angular weight of dipole emission projected on one axis
DIPOLE_RECOIL = 2.0 / 5.0
RECOIL_MODELS = ('projected', 'isotropic')
TAIL = 1e-8


@dataclass(frozen=True)
class CoolingConfig:
    """
    Doppler cooling beam.

    Parameters
    ----------
    linewidth (float):
        Gamma, rad/s.
    wavelength (float):
        Cooling wavelength, m.
    detuning (float or None):
        Delta, rad/s, negative (red); -Gamma/2 if None.
    angle (float):
        Angle between the beam k-vector and the mode, rad, in [0, pi/2].
    recoil_model (str):
        'projected' uses G = (cos^2 theta + 2/5) / (2 cos^2 theta), absorption recoil
        projected on the mode; 'isotropic' uses G = (1 + 2/5) / (2 cos^2 theta).
    """
    linewidth: float = CA_397_LINEWIDTH
    wavelength: float = CA_397_WAVELENGTH
    detuning: float = None
    angle: float = np.pi / 4
    recoil_model: str = 'projected'

    def __post_init__(self):
        if not self.linewidth > 0:
            raise DomainError('linewidth must be positive, got %r' % self.linewidth)
        if not self.wavelength > 0:
            raise DomainError('wavelength must be positive, got %r' % self.wavelength)
        if not 0 <= self.angle <= np.pi / 2 + 1e-12:
            raise DomainError('beam-to-mode angle must lie in [0, pi/2], got %r' % self.angle)
        if self.detuning is None:
            object.__setattr__(self, 'detuning', -self.linewidth / 2)
        if not self.detuning < 0:
            raise DomainError('Doppler cooling needs red (negative) detuning, got %r'
                              % self.detuning)
        if self.recoil_model not in RECOIL_MODELS:
            raise DomainError('recoil_model must be one of %s' % (RECOIL_MODELS,))

    def geometric_factor(self):
        cos2 = math.cos(self.angle) ** 2
        if cos2 < 1e-12:
            raise DomainError('beam perpendicular to the mode: Doppler limit diverges '
                              '(mode not cooled)')
        if self.recoil_model == 'isotropic':
            return (1.0 + DIPOLE_RECOIL) / (2.0 * cos2)
        return (cos2 + DIPOLE_RECOIL) / (2.0 * cos2)


@dataclass(frozen=True)
class ThermalState:
    """Thermal occupation with p_n = nbar^n / (1 + nbar)^(n+1)."""
    nbar: float

    def __post_init__(self):
        if not np.isfinite(self.nbar) or self.nbar < 0:
            raise DomainError('nbar must be non-negative, got %r' % self.nbar)

    def cutoff(self, tail=TAIL):
        """Smallest N with sum_{n >= N} p_n = (nbar / (1 + nbar))^N below `tail`."""
        if self.nbar == 0:
            return 1
        ratio = self.nbar / (1.0 + self.nbar)
        return max(1, int(math.ceil(math.log(tail) / math.log(ratio))))

    def probabilities(self, tail=TAIL):
        n = np.arange(self.cutoff(tail))
        if self.nbar == 0:
            return np.ones(1)
        return np.exp(n * np.log(self.nbar) - (n + 1) * np.log1p(self.nbar))


def doppler_limit_nbar(cooling, omega_mode):
    """
    Semiclassical two-level Doppler limit of a mode at omega_mode (rad/s):

        nbar = Gamma / (2 omega) * (1 + (2 Delta / Gamma)^2) / (4 |Delta| / Gamma) * G(theta)
    """
    if not omega_mode > 0:
        raise DomainError('omega_mode must be positive, got %r' % omega_mode)
    g, delta = cooling.linewidth, cooling.detuning
    lorentz = (1.0 + (2.0 * delta / g) ** 2) / (4.0 * abs(delta) / g)
    return ThermalState(g / (2.0 * omega_mode) * lorentz * cooling.geometric_factor())


def doppler_sweep(cooling, omegas):
    """nbar(omega) curve, columns omega_MHz and nbar."""
    omegas = np.asarray(omegas, dtype=float)
    nbar = [doppler_limit_nbar(cooling, w).nbar for w in omegas]
    return pd.DataFrame({'omega_MHz': omegas / (2 * np.pi * 1e6), 'nbar': nbar})


def sideband_ratio(state, tail=1e-12):
    """Red/blue excitation ratio sum p_n n / sum p_n (n + 1) by direct summation."""
    p = state.probabilities(tail)
    n = np.arange(p.size)
    return float(np.sum(p * n) / np.sum(p * (n + 1)))


def nbar_from_sideband_ratio(ratio):
    """nbar = R / (1 - R) for a thermal state."""
    if not np.isfinite(ratio) or ratio < 0 or ratio >= 1:
        raise DomainError('sideband ratio must lie in [0, 1) for a thermal state, got %r' % ratio)
    return ratio / (1.0 - ratio)


@dataclass(frozen=True)
class HeatingModel:
    """Heating rate `rate` (quanta/s) at omega_ref, scaling as 1/omega^(1 + exponent)."""
    rate: float
    omega_ref: float
    exponent: float = 1.0

    def __post_init__(self):
        if not 0 <= self.exponent <= 3:
            raise DomainError('heating exponent must lie in [0, 3], got %r' % self.exponent)
        if self.rate < 0 or not self.omega_ref > 0:
            raise DomainError('heating rate must be non-negative and omega_ref positive')

    def rate_at(self, omega):
        return self.rate * (self.omega_ref / omega) ** (1.0 + self.exponent)


def heating_rate_scaled(model, omega_from, omega_to):
    """rate(omega_to) = rate(omega_from) (omega_from / omega_to)^(1 + exponent)."""
    if not (omega_from > 0 and omega_to > 0):
        raise DomainError('frequencies must be positive')
    return model.rate_at(omega_from) * (omega_from / omega_to) ** (1.0 + model.exponent)
