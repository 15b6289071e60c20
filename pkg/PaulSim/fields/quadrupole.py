"""Quadrupole coefficients, RF null search and harmonicity checks"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from PaulSim.utilities.exceptions import AccuracyError, SearchError
from PaulSim.utilities.logger import get_logger
from PaulSim.utilities.utils import as_points

logger = get_logger(__name__)

# 5-point central difference weights for offsets -2h, -h, +h, +2h
FD_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
FD_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
# candidate steps in units of the basis length scale, coarse to fine
STEP_LADDER = 0.2 * 0.5 ** np.arange(7)
TRACE_LIMIT = 1e-2


def field_hessians(basis, points, step):
    """
    Per-electrode Hessians of phi_k, H = -dE/dr, by 5-point central differences.

    Returns
    -------
    H (numpy.ndarray): Shape (n_points, n_electrodes, 3, 3), symmetrized.
    """
    points = as_points(points)
    n = points.shape[0]
    shifts = np.einsum('m,ic->imc', FD_OFFSETS * step, np.eye(3))      # (3, 4, 3)
    stencil = points[:, None, None, :] + shifts[None]                 # (n, 3, 4, 3)
    E = basis.fields(stencil.reshape(-1, 3)).reshape(n, 3, 4, len(basis.names), 3)
    dE = np.einsum('m,nimkj->nkij', FD_WEIGHTS, E) / step
    H = -dE
    return 0.5 * (H + np.swapaxes(H, -1, -2))


def _richardson_hessians(basis, center):
    """Hessians at the finest step still improving on its coarser neighbor."""
    d = basis.length_scale
    ladder = [field_hessians(basis, center, s * d)[0] for s in STEP_LADDER]
    scale = max(np.abs(ladder[-1]).max(), 1e-300)
    diffs = [np.abs(ladder[i + 1] - ladder[i]).max() / scale for i in range(len(ladder) - 1)]
    best = int(np.argmin(diffs))
    logger.debug('Hessian step %.3g d chosen (Richardson change %.2e)', STEP_LADDER[best + 1], diffs[best])
    return ladder[best + 1], STEP_LADDER[best + 1] * d


def _combine(H_k, names, voltages):
    w = np.array([float(voltages.get(n, 0.0)) for n in names])
    return np.einsum('kij,k->ij', H_k, w)


def _order(eigvals):
    """Descending |lambda|; equal magnitudes put the larger value first."""
    scale = max(np.abs(eigvals).max(), 1e-300)
    mag = np.round(np.abs(eigvals) / scale, 9)
    return np.lexsort((-eigvals, -mag))


def _trace_ratio(H):
    norm = np.linalg.norm(H)
    return 0.0 if norm == 0 else abs(np.trace(H)) / norm


@dataclass(frozen=True)
class QuadrupoleCoefficients:
    """
    Curvatures per volt at `center`, in the principal frame of the RF Hessian.

    Phi_rf = 1/2 (A' x^2 + B' y^2 + C' z^2) per volt of RF amplitude, and the
    static curvatures A, B, C are the diagonal of the static Hessian in the
    same frame. `axes[i]` is the unit vector of the i-th coefficient.
    """
    A: float
    B: float
    C: float
    A_prime: float
    B_prime: float
    C_prime: float
    axes: np.ndarray = field(repr=False)
    center: np.ndarray = field(repr=False)
    static_hessian: np.ndarray = field(repr=False)
    rf_hessian: np.ndarray = field(repr=False)
    trace_residual: float = 0.0
    static_trace_residual: float = 0.0
    frame_misalignment: np.ndarray = field(default=None, repr=False)
    step: float = 0.0

    @property
    def static(self):
        return np.array([self.A, self.B, self.C])

    @property
    def rf(self):
        return np.array([self.A_prime, self.B_prime, self.C_prime])

    def efficiency(self, d):
        """Dimensionless |A'| d^2 of the strongest RF axis."""
        return float(np.abs(self.rf).max() * d ** 2)


def quadrupole_coefficients(basis, voltages_static, voltages_rf, center=(0.0, 0.0, 0.0)):
    """
    Static and RF curvature coefficients at `center`.

    Parameters
    ----------
    basis (FieldBasis)
    voltages_static (dict):
        Electrode name -> static voltage (or weight per volt of U).
    voltages_rf (dict):
        Electrode name -> RF amplitude per volt of U~ (the drive polarity).
    center (array-like):
        Evaluation point, meters.

    Returns
    -------
    QuadrupoleCoefficients

    Raises
    ------
    AccuracyError if either Hessian departs from zero trace by more than
    TRACE_LIMIT of its norm.
    """
    center = as_points(center)[0]
    basis.weights(voltages_static)
    basis.weights(voltages_rf)
    H_k, step = _richardson_hessians(basis, center)
    H_rf = _combine(H_k, basis.names, voltages_rf)
    H_s = _combine(H_k, basis.names, voltages_static)

    rf_trace, s_trace = _trace_ratio(H_rf), _trace_ratio(H_s)
    for label, ratio in (('RF', rf_trace), ('static', s_trace)):
        if ratio > TRACE_LIMIT:
            raise AccuracyError('%s Hessian trace/norm = %.3g exceeds %.0e; refine the mesh'
                                % (label, ratio, TRACE_LIMIT))

    eigvals, eigvecs = np.linalg.eigh(H_rf)
    order = _order(eigvals)
    eigvals, axes = eigvals[order], eigvecs[:, order].T
    static_frame = axes @ H_s @ axes.T

    return QuadrupoleCoefficients(
        A=float(static_frame[0, 0]), B=float(static_frame[1, 1]), C=float(static_frame[2, 2]),
        A_prime=float(eigvals[0]), B_prime=float(eigvals[1]), C_prime=float(eigvals[2]),
        axes=axes, center=center, static_hessian=H_s, rf_hessian=H_rf,
        trace_residual=rf_trace, static_trace_residual=s_trace,
        frame_misalignment=_misalignment(static_frame), step=step)


def _misalignment(M):
    """Rotation angle (rad) needed per axis to diagonalize M, from its off-diagonal terms."""
    scale = max(np.abs(M).max(), 1e-300)
    angles = np.zeros(3)
    for i in range(3):
        for j in range(3):
            if i == j or abs(M[i, j]) < 1e-9 * scale:
                continue
            angle = 0.5 * np.arctan2(2 * abs(M[i, j]), abs(M[i, i] - M[j, j]))
            angles[i] = max(angles[i], angle)
    return angles


###############################################################################
# RF null

@dataclass(frozen=True)
class RFNull:
    position: np.ndarray
    residual_field: np.ndarray
    nfev: int


def rf_null(basis, voltages_rf, guess, max_steps=200, tol=1e-9):
    """
    Minimize |E_rf(r)|^2 from `guess` with a trust-region least-squares search.

    Coordinates are scaled by the basis length scale d and fields by 1/d, so
    `tol` is the accepted dimensionless |E| d at the null.

    Raises
    ------
    SearchError with the evaluation trace if the search does not converge.
    """
    d = basis.length_scale
    guess = as_points(guess)[0]
    trace = []

    def residual(u):
        r = u * d
        E = basis.field(r, voltages_rf)[0] * d
        trace.append((tuple(r), float(np.linalg.norm(E))))
        return E

    try:
        res = least_squares(residual, guess / d, method='trf', x_scale=1.0,
                            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_steps)
    except ValueError as err:
        raise SearchError('RF null search failed: %s' % err, trace=trace) from err
    E = res.fun / d
    if np.linalg.norm(res.fun) > tol:
        raise SearchError('RF null search did not converge in %d evaluations '
                          '(|E| d = %.3g at %s m)' % (res.nfev, np.linalg.norm(res.fun), res.x * d),
                          trace=trace)
    return RFNull(position=res.x * d, residual_field=E, nfev=int(res.nfev))


###############################################################################
# Harmonicity

def laplacian_residual(basis, points, step=None):
    """
    |trace H_k| / ||H_k|| for every point and electrode.

    Returns
    -------
    numpy.ndarray of shape (n_points, n_electrodes); zero where H_k vanishes.
    """
    step = 1e-3 * basis.length_scale if step is None else step
    H = field_hessians(basis, points, step)
    tr = np.abs(np.trace(H, axis1=-2, axis2=-1))
    norm = np.linalg.norm(H, axis=(-2, -1))
    return np.where(norm > 0, tr / np.where(norm > 0, norm, 1.0), 0.0)
