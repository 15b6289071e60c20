"""RF and static drive of an electrode system"""

from dataclasses import dataclass, field, replace

import numpy as np

from PaulSim.utilities.exceptions import DomainError


@dataclass(frozen=True)
class DriveConfig:
    """
    Applied voltages.

    Phi(r, t) = u_dc * sum_k dc_weights[k] phi_k(r)
              + u_tilde * cos(omega_rf t) * sum_k polarity[k] phi_k(r)

    Parameters
    ----------
    omega_rf (float):
        Angular drive frequency, rad/s.
    u_tilde (float):
        Zero-to-peak RF amplitude applied to each RF electrode, V.
    u_dc (float):
        Static voltage scale U, V.
    polarity (dict):
        Electrode name -> +1, -1 or 0. Differential drive is expressed here,
        never by doubling u_tilde.
    dc_weights (dict):
        Electrode name -> static voltage per volt of u_dc.
    """
    omega_rf: float
    u_tilde: float
    u_dc: float = 0.0
    polarity: dict = field(default_factory=dict)
    dc_weights: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.isfinite(self.omega_rf) or self.omega_rf <= 0:
            raise DomainError('omega_rf must be positive, got %r' % self.omega_rf)
        if not np.isfinite(self.u_tilde) or self.u_tilde < 0:
            raise DomainError('u_tilde must be non-negative, got %r' % self.u_tilde)
        if not np.isfinite(self.u_dc):
            raise DomainError('u_dc must be finite')
        for name, sign in self.polarity.items():
            if sign not in (-1, 0, 1):
                raise DomainError('polarity of %r must be +1, -1 or 0, got %r' % (name, sign))
        object.__setattr__(self, 'polarity', {k: int(v) for k, v in self.polarity.items()})
        object.__setattr__(self, 'dc_weights', {k: float(v) for k, v in self.dc_weights.items()})

    @classmethod
    def from_frequency(cls, f_rf, u_tilde, **kwargs):
        """Build a drive from an ordinary frequency in Hz."""
        return cls(omega_rf=2 * np.pi * f_rf, u_tilde=u_tilde, **kwargs)

    @property
    def f_rf(self):
        return self.omega_rf / (2 * np.pi)

    @property
    def period(self):
        return 2 * np.pi / self.omega_rf

    def rf_voltages(self):
        """RF amplitude on each electrode, volts."""
        return {k: self.u_tilde * s for k, s in self.polarity.items()}

    def dc_voltages(self):
        """Static voltage on each electrode, volts."""
        return {k: self.u_dc * w for k, w in self.dc_weights.items()}

    def with_(self, **changes):
        return replace(self, **changes)
