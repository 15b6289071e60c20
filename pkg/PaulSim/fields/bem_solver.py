"""Constant-strength collocation boundary-element solver for Laplace's equation"""

import json
import warnings
from time import perf_counter

import h5py
import numpy as np
from scipy import constants

from PaulSim.fields.basis import FieldBasis
from PaulSim.utilities.exceptions import AccuracyWarning, DomainError
from PaulSim.utilities.logger import get_logger
from PaulSim.utilities.utils import as_points
from PaulSim.utilities.wrappers import dense_solve, blocked_iterative_solve

logger = get_logger(__name__)

EPS0 = constants.epsilon_0
DENSE_LIMIT = 10_000
# pair evaluations held in memory at once (points x panels x edges)
CHUNK_ELEMENTS = 1_000_000


###############################################################################
# Panel integrals

def panel_geometry(triangles):
    """
    Normals, areas, centroids, diameters and edge frames of triangles.

    Parameters
    ----------
    triangles (numpy.ndarray):
        Vertices, shape (m, 3, 3).

    Returns
    -------
    dict of arrays; 'l_hat' and 'u_hat' have shape (m, 3 edges, 3) and
    'u_hat' is the in-plane outward normal of each edge.
    """
    v0, v1, v2 = triangles[:, 0], triangles[:, 1], triangles[:, 2]
    cross = np.cross(v1 - v0, v2 - v0)
    twice_area = np.linalg.norm(cross, axis=1)
    if np.any(twice_area <= 0):
        bad = int(np.argmin(twice_area))
        raise DomainError('panel %d has zero area' % bad)
    normal = cross / twice_area[:, None]
    start = triangles
    end = np.roll(triangles, -1, axis=1)
    edge = end - start
    edge_len = np.linalg.norm(edge, axis=2)
    l_hat = edge / edge_len[..., None]
    u_hat = np.cross(l_hat, normal[:, None, :])
    return {
        'normal': normal,
        'area': 0.5 * twice_area,
        'centroid': triangles.mean(axis=1),
        'diameter': edge_len.max(axis=1),
        'start': start,
        'end': end,
        'l_hat': l_hat,
        'u_hat': u_hat,
    }


def _log_term(R_plus, l_plus, R_minus, l_minus):
    # ln((R+ + l+)/(R- + l-)), mirrored to ln((R- - l-)/(R+ - l+)) behind the edge
    behind = l_minus < 0
    with np.errstate(divide='ignore', invalid='ignore'):
        ahead = np.log((R_plus + l_plus) / (R_minus + l_minus))
        mirrored = np.log((R_minus - l_minus) / (R_plus - l_plus))
    out = np.where(behind, mirrored, ahead)
    return np.where(np.isfinite(out), out, 0.0)


def triangle_integrals(points, geom, with_gradient=True):
    """
    I[n, m] = integral over triangle m of dA'/|r_n - r'| and its gradient in r_n.

    Closed form for uniform density on a flat polygon: with h the height above
    the panel plane and, for each edge, t the signed in-plane distance to the
    edge line and l+- the endpoint offsets along it,

        I      = sum_e [ t f_e - |h| b_e ]
        grad I = -sum_e u_e f_e - sign(h) n b

    where f_e = ln((R+ + l+)/(R- + l-)) and b = sum_e b_e is the solid angle.
    Exact everywhere except on panel edges.
    """
    points = as_points(points)
    n, m = points.shape[0], geom['area'].size
    I = np.empty((n, m))
    grad = np.empty((n, m, 3)) if with_gradient else None
    chunk = max(1, CHUNK_ELEMENTS // (3 * m))
    normal, start, end = geom['normal'], geom['start'], geom['end']
    l_hat, u_hat = geom['l_hat'], geom['u_hat']
    for i0 in range(0, n, chunk):
        r = points[i0:i0 + chunk, None, None, :]             # (c, 1, 1, 3)
        h = np.einsum('cmk,mk->cm', r[:, :, 0, :] - start[None, :, 0, :], normal)
        to_start = start[None] - r                           # (c, m, 3, 3)
        to_end = end[None] - r
        l_minus = np.einsum('cmek,mek->cme', to_start, l_hat)
        l_plus = np.einsum('cmek,mek->cme', to_end, l_hat)
        t = np.einsum('cmek,mek->cme', to_start, u_hat)
        abs_h = np.abs(h)[..., None]
        R0_sq = t ** 2 + abs_h ** 2
        R_minus = np.sqrt(R0_sq + l_minus ** 2)
        R_plus = np.sqrt(R0_sq + l_plus ** 2)
        f = _log_term(R_plus, l_plus, R_minus, l_minus)
        b = (np.arctan2(t * l_plus, R0_sq + abs_h * R_plus)
             - np.arctan2(t * l_minus, R0_sq + abs_h * R_minus))
        I[i0:i0 + chunk] = np.sum(t * f - abs_h * b, axis=2)
        if with_gradient:
            solid = b.sum(axis=2)
            grad[i0:i0 + chunk] = (-np.einsum('cme,mek->cmk', f, u_hat)
                                   - (np.sign(h) * solid)[..., None] * normal[None])
    return I, grad


###############################################################################
# Solved basis

class BEMBasis(FieldBasis):
    """
    Basis from a solved panel model.

    `strength[:, k]` is sigma/(4 pi eps0) on every panel with electrode k at
    1 V and all other electrodes grounded, so phi_k(r) = I(r) @ strength[:, k].
    """

    def __init__(self, triangles, owner, names, length_scale, strength, provenance=None):
        provenance = dict(provenance or {})
        provenance.setdefault('kind', 'BEM')
        super().__init__(names, length_scale, provenance)
        self.triangles = np.asarray(triangles, dtype=float)
        self.owner = np.asarray(owner, dtype=int)
        self.strength = np.asarray(strength, dtype=float)
        self.geom = panel_geometry(self.triangles)

    @property
    def n_panels(self):
        return self.owner.size

    @property
    def condition_estimate(self):
        return self.provenance.get('condition_estimate')

    def near_surface(self, points):
        """True where a point lies within one panel diameter of a panel centroid."""
        points = as_points(points)
        c, diam = self.geom['centroid'], self.geom['diameter']
        near = np.zeros(points.shape[0], dtype=bool)
        chunk = max(1, CHUNK_ELEMENTS // c.shape[0])
        for i0 in range(0, points.shape[0], chunk):
            dist = np.linalg.norm(points[i0:i0 + chunk, None, :] - c[None], axis=2)
            near[i0:i0 + chunk] = np.any(dist < diam[None], axis=1)
        return near

    def _warn_near(self, points):
        near = self.near_surface(points)
        if near.any():
            warnings.warn('%d evaluation point(s) within one panel diameter of an electrode;'
                          ' BEM fields are inaccurate there' % int(near.sum()),
                          AccuracyWarning, stacklevel=3)

    def _potentials(self, points):
        self._warn_near(points)
        out = np.empty((points.shape[0], len(self.names)))
        for sl in self._point_chunks(points.shape[0]):
            I, _ = triangle_integrals(points[sl], self.geom, with_gradient=False)
            out[sl] = I @ self.strength
        return out

    def _fields(self, points):
        self._warn_near(points)
        out = np.empty((points.shape[0], len(self.names), 3))
        for sl in self._point_chunks(points.shape[0]):
            _, grad = triangle_integrals(points[sl], self.geom)
            out[sl] = -np.einsum('nmc,mk->nkc', grad, self.strength)
        return out

    def _point_chunks(self, n):
        step = max(1, CHUNK_ELEMENTS // (3 * self.n_panels))
        return [slice(i, i + step) for i in range(0, n, step)]

    def charges(self):
        """Induced charge (C) on every electrode j for unit voltage on every k: C[j, k]."""
        q_panel = 4 * np.pi * EPS0 * self.strength * self.geom['area'][:, None]
        C = np.zeros((len(self.names), len(self.names)))
        for j in range(len(self.names)):
            C[j] = q_panel[self.owner == j].sum(axis=0)
        return C

    def capacitance_matrix(self):
        """Maxwell capacitance matrix; symmetric for a converged solve (reciprocity)."""
        return self.charges()

    def to_hdf5(self, path):
        with h5py.File(path, 'w') as f:
            f.create_dataset('triangles', data=self.triangles)
            f.create_dataset('owner', data=self.owner)
            f.create_dataset('strength', data=self.strength)
            f.attrs['names'] = json.dumps(list(self.names))
            f.attrs['length_scale'] = self.length_scale
            f.attrs['provenance'] = json.dumps(self.provenance, sort_keys=True, default=float)

    @classmethod
    def from_hdf5(cls, path):
        with h5py.File(path, 'r') as f:
            return cls(triangles=f['triangles'][()], owner=f['owner'][()],
                       names=json.loads(f.attrs['names']),
                       length_scale=float(f.attrs['length_scale']),
                       strength=f['strength'][()],
                       provenance=json.loads(f.attrs['provenance']))


def solve_bem(system, mesh_refinement=2000, verbose=False):
    """
    Solve the unit-voltage problem of every electrode.

    Parameters
    ----------
    system (ElectrodeSystem):
        Electrodes with panels or primitives.
    mesh_refinement (int):
        Target panel count in [100, 1e5]; explicit panels are used as given.
    verbose (bool):
        If True, log mesh and timing details.

    Returns
    -------
    BEMBasis
    """
    if not 100 <= mesh_refinement <= 100_000:
        raise DomainError('mesh_refinement must lie in [100, 1e5], got %r' % mesh_refinement)
    t_start = perf_counter()
    triangles, owner = system.mesh(mesh_refinement)
    geom = panel_geometry(triangles)
    m = owner.size
    if verbose:
        logger.info('assembling %d panels for %d electrodes', m, len(system.electrodes))

    P, _ = triangle_integrals(geom['centroid'], geom, with_gradient=False)
    rhs = np.zeros((m, len(system.electrodes)))
    rhs[np.arange(m), owner] = 1.0
    if m <= DENSE_LIMIT:
        strength, condition = dense_solve(P, rhs)
    else:
        strength, condition = blocked_iterative_solve(P, rhs), None

    provenance = {
        'kind': 'BEM',
        'geometry_sha256': system.fingerprint(mesh_refinement),
        'mesh_refinement': int(mesh_refinement),
        'panels': int(m),
        'min_panel_area': float(geom['area'].min()),
        'max_panel_diameter': float(geom['diameter'].max()),
        'condition_estimate': None if condition is None else float(condition),
    }
    if verbose:
        logger.info('BEM solve done in %.2f s (condition %.3g)',
                    perf_counter() - t_start, condition or float('nan'))
    return BEMBasis(triangles, owner, [e.name for e in system.electrodes], system.d,
                    strength, provenance)
