"""Pseudopotential maps, trap depth and harmonicity"""

import heapq
import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import constants

from PaulSim.utilities.exceptions import (AccuracyError, AccuracyWarning, DomainError,
                                          NoTrapError)
from PaulSim.utilities.logger import get_logger
from PaulSim.utilities.wrappers import quadratic_fit

logger = get_logger(__name__)

EV = constants.electron_volt
HARMONIC_WINDOW = 0.2
MIN_POINTS_ACROSS = 15


@dataclass(frozen=True)
class Grid:
    """
    Axis-aligned box of sample coordinates in a local frame.

    World points are origin + rotation @ (x, y, z). An axis given a single
    value is degenerate, which makes 2-D slices and 1-D cuts.
    """
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3), repr=False)
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3), repr=False)

    def __post_init__(self):
        for name in 'xyz':
            values = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if values.ndim != 1 or not np.all(np.diff(values) > 0):
                raise DomainError('grid axis %s must be strictly increasing' % name)
            object.__setattr__(self, name, values)
        object.__setattr__(self, 'rotation', np.asarray(self.rotation, dtype=float))
        object.__setattr__(self, 'origin', np.asarray(self.origin, dtype=float))

    @classmethod
    def box(cls, lo, hi, n, **frame):
        """n points per axis between lo and hi; axes with lo == hi are degenerate."""
        n = np.broadcast_to(n, 3)
        axes = [np.array([a]) if a == b else np.linspace(a, b, int(k))
                for a, b, k in zip(lo, hi, n)]
        return cls(*axes, **frame)

    @property
    def shape(self):
        return (self.x.size, self.y.size, self.z.size)

    @property
    def active(self):
        """Non-degenerate axes."""
        return [i for i, n in enumerate(self.shape) if n > 1]

    def local_points(self):
        X, Y, Z = np.meshgrid(self.x, self.y, self.z, indexing='ij')
        return np.stack([X, Y, Z], axis=-1)

    def points(self):
        """World coordinates, shape (nx, ny, nz, 3)."""
        return self.origin + self.local_points() @ self.rotation.T

    def refined(self, factor=2):
        """Same box with (n - 1) * factor + 1 points on every active axis."""
        axes = [a if a.size == 1 else np.linspace(a[0], a[-1], (a.size - 1) * factor + 1)
                for a in (self.x, self.y, self.z)]
        return Grid(*axes, rotation=self.rotation, origin=self.origin)


@dataclass(frozen=True)
class PseudopotentialMap:
    """U_ps (plus optional Ze Phi_static) in joules on a grid."""
    grid: Grid
    values: np.ndarray = field(repr=False)
    minimum_index: tuple
    length_scale: float
    static_overlay: bool = False

    @property
    def values_eV(self):
        return self.values / EV

    @property
    def minimum(self):
        return float(self.values[self.minimum_index])

    @property
    def minimum_position(self):
        return self.grid.points()[self.minimum_index]


def pseudopotential_map(basis, drive, species, grid, static_overlay=False):
    """
    U_ps(r) = (Z e)^2 |E_rf(r)|^2 / (4 m omega_rf^2) with
    E_rf = u_tilde * sum_k polarity_k E_k.

    Parameters
    ----------
    basis (FieldBasis)
    drive (DriveConfig)
    species (IonSpecies)
    grid (Grid)
    static_overlay (bool):
        If True, add Z e Phi_static(r) from drive.dc_voltages().

    Raises
    ------
    AccuracyError if any grid point lies on or near an electrode.
    """
    pts = grid.points().reshape(-1, 3)
    try:
        basis.check_domain(pts)
    except DomainError as err:
        raise AccuracyError('grid touches an electrode surface: %s' % err) from err
    near = basis.near_surface(pts)
    if near.any():
        raise AccuracyError('%d grid point(s) within one panel diameter of an electrode'
                            % int(near.sum()))

    E_rf = basis.field(pts, drive.rf_voltages())
    values = (species.charge ** 2 * np.einsum('nc,nc->n', E_rf, E_rf)
              / (4.0 * species.mass * drive.omega_rf ** 2))
    if static_overlay:
        values = values + species.charge * basis.potential(pts, drive.dc_voltages())
    values = values.reshape(grid.shape)
    idx = np.unravel_index(int(np.argmin(values)), grid.shape)
    logger.debug('pseudopotential map %s: min %.4g eV at index %s',
                 grid.shape, values[idx] / EV, idx)
    return PseudopotentialMap(grid, values, tuple(int(i) for i in idx),
                              basis.length_scale, static_overlay)


def _on_boundary(idx, shape):
    return any(n > 1 and (i == 0 or i == n - 1) for i, n in zip(idx, shape))


def trap_depth(pmap):
    """
    Escape barrier in eV: the lowest level at which a flood from the minimum
    reaches the grid boundary, minus the minimum.

    Priority flood over 6-connected grid neighbors; the answer is the minimax
    value over all paths to the boundary.

    Raises
    ------
    NoTrapError if the minimum sits on the grid boundary.
    """
    values, shape = pmap.values, pmap.values.shape
    start = pmap.minimum_index
    if _on_boundary(start, shape):
        raise NoTrapError('pseudopotential minimum at grid index %s is on the boundary; '
                          'enlarge or move the grid' % (start,))
    steps = [s for axis, n in enumerate(shape) if n > 1
             for s in (tuple(int(k == axis) for k in range(3)),
                       tuple(-int(k == axis) for k in range(3)))]
    visited = np.zeros(shape, dtype=bool)
    visited[start] = True
    heap = [(values[start], start)]
    level = values[start]
    while heap:
        value, idx = heapq.heappop(heap)
        level = max(level, value)
        if _on_boundary(idx, shape):
            return float((level - pmap.minimum) / EV)
        for s in steps:
            nb = (idx[0] + s[0], idx[1] + s[1], idx[2] + s[2])
            if all(0 <= nb[k] < shape[k] for k in range(3)) and not visited[nb]:
                visited[nb] = True
                heapq.heappush(heap, (values[nb], nb))
    raise NoTrapError('flood never reached the grid boundary')


def harmonicity_residual(pmap, window=None):
    """
    RMS deviation of a quadratic least-squares fit over |r - r_min| <= window,
    relative to the RMS rise of the potential above its minimum there.

    window defaults to 0.2 d.
    """
    window = HARMONIC_WINDOW * pmap.length_scale if window is None else float(window)
    grid = pmap.grid
    local = grid.local_points()
    r0 = local[pmap.minimum_index]
    mask = np.linalg.norm(local - r0, axis=-1) <= window
    active = grid.active
    X = (local[mask] - r0)[:, active] / pmap.length_scale
    y = (pmap.values[mask] - pmap.minimum) / EV
    n_coef = len(active) * (len(active) + 3) // 2 + 1
    if len(y) < 2 * n_coef:
        raise DomainError('only %d grid points inside the fit window; refine the grid' % len(y))
    for i in active:
        axis = (grid.x, grid.y, grid.z)[i]
        inside = np.sum(np.abs(axis - r0[i]) <= window)
        if inside < MIN_POINTS_ACROSS:
            warnings.warn('only %d grid points across the fit window on axis %d' % (inside, i),
                          AccuracyWarning, stacklevel=2)
    fitted, _ = quadratic_fit(X, y)
    scale = np.sqrt(np.mean(y ** 2))
    if scale == 0:
        return 0.0
    return float(np.sqrt(np.mean((y - fitted) ** 2)) / scale)


def map_frame(pmap):
    """Map as a CSV-ready frame with columns x_um, y_um, z_um, U_ps_eV."""
    pts = pmap.grid.points().reshape(-1, 3) * 1e6
    return pd.DataFrame({'x_um': pts[:, 0], 'y_um': pts[:, 1], 'z_um': pts[:, 2],
                         'U_ps_eV': pmap.values_eV.ravel()})
