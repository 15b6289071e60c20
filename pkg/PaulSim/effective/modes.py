"""Secular modes from Floquet exponents along the quadrupole principal axes"""

from dataclasses import dataclass, field

import numpy as np

from PaulSim.fields.quadrupole import quadrupole_coefficients, rf_null
from PaulSim.mathieu.mathieu_core import characteristic_exponent, params_from_coefficients
from PaulSim.utilities.exceptions import StabilityError
from PaulSim.utilities.logger import get_logger

logger = get_logger(__name__)

MISALIGNMENT_LIMIT = np.deg2rad(2.0)


@dataclass(frozen=True)
class SecularModes:
    """
    Secular angular frequencies (rad/s) in ascending order with their axes.

    An axis with a = q = 0 is free and reported with frequency 0.
    """
    frequencies: np.ndarray
    axes: np.ndarray = field(repr=False)
    params: tuple
    free: np.ndarray = field(repr=False)
    misaligned: np.ndarray = field(repr=False)
    center: np.ndarray = field(repr=False)
    coefficients: object = field(default=None, repr=False)

    @property
    def f(self):
        """Ordinary frequencies in Hz."""
        return self.frequencies / (2 * np.pi)


def _coefficients(basis, drive, center, guess):
    if center is None:
        center = rf_null(basis, drive.polarity, guess).position
    return quadrupole_coefficients(basis, drive.dc_weights, drive.polarity, center)


def secular_modes(basis, drive, species, center=None, guess=(0.0, 0.0, 0.0)):
    """
    Secular frequencies from the exact characteristic exponent of every axis.

    Parameters
    ----------
    basis (FieldBasis)
    drive (DriveConfig):
        RF polarity and static weights select the voltages.
    species (IonSpecies)
    center (array-like or None):
        Evaluation point; if None the RF null is searched from `guess`.

    Raises
    ------
    StabilityError listing (a, q) of every unstable axis.
    """
    return modes_from_coefficients(_coefficients(basis, drive, center, guess), drive, species)


def modes_from_coefficients(coeffs, drive, species):
    """Secular modes of precomputed per-volt coefficients under `drive`."""
    params, omegas, free, unstable = [], [], [], []
    for A, Ap in zip(coeffs.static, coeffs.rf):
        p = params_from_coefficients(species, drive, A, Ap)
        params.append(p)
        if p.a == 0 and p.q == 0:
            omegas.append(0.0)
            free.append(True)
            continue
        res = characteristic_exponent(p)
        free.append(False)
        if not res.stable:
            unstable.append((p.a, p.q))
            omegas.append(float('nan'))
        else:
            omegas.append(res.beta * drive.omega_rf / 2.0)
    if unstable:
        raise StabilityError('unstable secular axes: %s'
                             % ', '.join('(a=%.4g, q=%.4g)' % aq for aq in unstable),
                             params=unstable)

    order = np.argsort(omegas, kind='stable')
    misaligned = coeffs.frame_misalignment > MISALIGNMENT_LIMIT
    if misaligned.any():
        logger.warning('static and RF principal frames differ by up to %.2f deg',
                       np.rad2deg(coeffs.frame_misalignment.max()))
    return SecularModes(frequencies=np.asarray(omegas)[order], axes=coeffs.axes[order],
                        params=tuple(params[i] for i in order), free=np.asarray(free)[order],
                        misaligned=misaligned[order], center=coeffs.center,
                        coefficients=coeffs)


def pseudopotential_frequencies(basis, drive, species, center=None, guess=(0.0, 0.0, 0.0)):
    """
    Frequencies from the Hessian of U_ps + Z e Phi_static at the RF null.

    There K = (Z e u_tilde)^2 / (2 m omega_rf^2) H_rf^2 + Z e u_dc H_static and
    omega_i^2 = eig(K) / m. Anti-confining eigenvalues give NaN.

    Returns
    -------
    Ascending angular frequencies, rad/s.
    """
    coeffs = _coefficients(basis, drive, center, guess)
    ze = species.charge
    H_rf, H_s = coeffs.rf_hessian, coeffs.static_hessian
    K = ((ze * drive.u_tilde) ** 2 / (2.0 * species.mass * drive.omega_rf ** 2) * H_rf @ H_rf
         + ze * drive.u_dc * H_s)
    eig = np.linalg.eigvalsh(0.5 * (K + K.T)) / species.mass
    with np.errstate(invalid='ignore'):
        return np.sort(np.where(eig >= 0, np.sqrt(np.abs(eig)), np.nan))
