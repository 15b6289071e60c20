"""Closed-form bases: ideal 3D quadrupole and gapless planar electrodes"""

import numpy as np

from PaulSim.fields.basis import FieldBasis
from PaulSim.utilities.exceptions import DomainError

SQRT2 = np.sqrt(2.0)


###############################################################################
# Ideal quadrupole

class QuadrupoleBasis(FieldBasis):
    """
    Ideal hyperbolic electrodes at distance d from the axis (trap axis z).

    Electrodes
    ----------
    RF+ : phi = 1/2 + kappa (x^2 - y^2) / (2 d^2)
    RF- : phi = 1/2 - kappa (x^2 - y^2) / (2 d^2)
    DCQ : phi = (x^2 - y^2) / (2 d^2), a static quadrupole that splits the radial modes
    EC  : phi = kappa_ec (2 z^2 - x^2 - y^2) / (2 d^2), end caps (only if endcap_kappa is set)
    """

    def __init__(self, d, kappa=1.0, endcap_kappa=None):
        if not d > 0:
            raise DomainError('d must be positive, got %r' % d)
        if not 0 < kappa <= 1:
            raise DomainError('efficiency kappa must lie in (0, 1], got %r' % kappa)
        names = ['RF+', 'RF-', 'DCQ']
        if endcap_kappa is not None:
            names.append('EC')
        super().__init__(names, d, {'kind': 'analytic', 'model': 'ideal quadrupole',
                                    'kappa': float(kappa), 'endcap_kappa': endcap_kappa})
        self.d = float(d)
        self.kappa = float(kappa)
        self.endcap_kappa = None if endcap_kappa is None else float(endcap_kappa)

    def _potentials(self, points):
        x, y, z = points.T
        d2 = self.d ** 2
        quad = (x ** 2 - y ** 2) / (2 * d2)
        cols = [0.5 + self.kappa * quad, 0.5 - self.kappa * quad, quad]
        if self.endcap_kappa is not None:
            cols.append(self.endcap_kappa * (2 * z ** 2 - x ** 2 - y ** 2) / (2 * d2))
        return np.stack(cols, axis=1)

    def _fields(self, points):
        x, y, z = points.T
        d2 = self.d ** 2
        zero = np.zeros_like(x)
        grad_quad = np.stack([x, -y, zero], axis=1) / d2
        cols = [-self.kappa * grad_quad, self.kappa * grad_quad, -grad_quad]
        if self.endcap_kappa is not None:
            cols.append(-self.endcap_kappa * np.stack([-x, -y, 2 * z], axis=1) / d2)
        return np.stack(cols, axis=1)


def ideal_quadrupole_basis(d, kappa=1.0, endcap_kappa=None):
    """
    Ideal quadrupole with geometric efficiency kappa.

    One volt on the RF+ pair gives A' = kappa/d^2, B' = -kappa/d^2, C' = 0.
    Driving RF+ and RF- with opposite polarity doubles the curvature.
    """
    return QuadrupoleBasis(d, kappa, endcap_kappa)


###############################################################################
# Gapless planar electrodes

def _corner_terms(rect, points):
    """Signed corner offsets of rectangles against points, shapes (n, k)."""
    x, y, z = points.T
    x1, x2, y1, y2 = (rect[:, i][None, :] for i in range(4))
    return (x1 - x[:, None], x2 - x[:, None], y1 - y[:, None], y2 - y[:, None],
            z[:, None])


class PlanarPatchBasis(FieldBasis):
    """
    Rectangles in the z=0 plane, each held at 1 V in an otherwise grounded plane.

    phi(r) = Omega(r) / (2 pi), with Omega the solid angle the electrode subtends.
    An electrode may consist of several rectangles.

    Parameters
    ----------
    electrodes (dict):
        name -> list of (x1, x2, y1, y2) rectangles in meters.
    length_scale (float):
        Characteristic ion height d.
    """

    def __init__(self, electrodes, length_scale):
        super().__init__(list(electrodes), length_scale,
                         {'kind': 'analytic', 'model': 'gapless plane'})
        rects, owner = [], []
        for k, name in enumerate(electrodes):
            for r in electrodes[name]:
                x1, x2, y1, y2 = map(float, r)
                if not (x2 > x1 and y2 > y1):
                    raise DomainError('degenerate rectangle %r on electrode %r' % (r, name))
                rects.append((x1, x2, y1, y2))
                owner.append(k)
        self.rects = np.array(rects)
        self.owner = np.array(owner)
        self._check_overlap()

    def _check_overlap(self):
        r = self.rects
        for i in range(len(r)):
            for j in range(i + 1, len(r)):
                dx = min(r[i, 1], r[j, 1]) - max(r[i, 0], r[j, 0])
                dy = min(r[i, 3], r[j, 3]) - max(r[i, 2], r[j, 2])
                if dx > 0 and dy > 0:
                    raise DomainError('rectangles %d and %d overlap' % (i, j))

    def check_domain(self, points):
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        if np.any(points[:, 2] <= 0):
            raise DomainError('planar electrodes are only defined above the plane (z > 0)')

    def _sum_by_owner(self, per_rect):
        out = np.zeros(per_rect.shape[:1] + (len(self.names),) + per_rect.shape[2:])
        for k in range(len(self.names)):
            out[:, k] = per_rect[:, self.owner == k].sum(axis=1)
        return out

    def _potentials(self, points):
        self.check_domain(points)
        a1, a2, b1, b2, z = _corner_terms(self.rects, points)

        def F(xi, eta):
            R = np.sqrt(xi ** 2 + eta ** 2 + z ** 2)
            return np.arctan(xi * eta / (z * R))

        omega = F(a2, b2) - F(a1, b2) - F(a2, b1) + F(a1, b1)
        return self._sum_by_owner(omega / (2 * np.pi))

    def _fields(self, points):
        self.check_domain(points)
        a1, a2, b1, b2, z = _corner_terms(self.rects, points)

        def dF(xi, eta):
            R = np.sqrt(xi ** 2 + eta ** 2 + z ** 2)
            sx, sy = xi ** 2 + z ** 2, eta ** 2 + z ** 2
            d_xi = eta * z / (R * sx)
            d_eta = xi * z / (R * sy)
            d_z = -xi * eta * (R ** 2 + z ** 2) / (R * sx * sy)
            return np.stack([d_xi, d_eta, d_z], axis=-1)

        dOmega = dF(a2, b2) - dF(a1, b2) - dF(a2, b1) + dF(a1, b1)
        # xi = x_corner - x, so d/dx = -d/dxi; E = -grad phi
        grad = np.stack([-dOmega[..., 0], -dOmega[..., 1], dOmega[..., 2]], axis=-1) / (2 * np.pi)
        return self._sum_by_owner(-grad)


def planar_patch_basis(electrodes, length_scale):
    return PlanarPatchBasis(electrodes, length_scale)


def five_wire_layout(d, length=None, outer_width=None):
    """
    Symmetric five-wire gapless surface trap with its RF null at height d.

    In the gapless infinite-rail limit the null sits at h^2 = c1 c2, where c1
    and c2 are the inner and outer rail edges, and the curvature efficiency
    A' h^2 = (4/pi) t (1 - t^2) / (1 + t^2)^2 with t = c1/h peaks at
    t = sqrt(2) - 1 (efficiency 1/pi). The rails run along y.

    Returns
    -------
    electrodes (dict):
        name -> list of rectangles, for PlanarPatchBasis.
    dims (dict):
        Chosen dimensions in meters, echoed in reports.
    """
    length = 100.0 * d if length is None else float(length)
    outer_width = 4.0 * d if outer_width is None else float(outer_width)
    c1 = (SQRT2 - 1.0) * d
    c2 = (SQRT2 + 1.0) * d
    y1, y2 = -length / 2, length / 2
    electrodes = {
        'RF1': [(c1, c2, y1, y2)],
        'RF2': [(-c2, -c1, y1, y2)],
        'DC_center': [(-c1, c1, y1, y2)],
        'DC_left': [(-c2 - outer_width, -c2, y1, y2)],
        'DC_right': [(c2, c2 + outer_width, y1, y2)],
    }
    dims = {'center_width': 2 * c1, 'rail_width': c2 - c1, 'rail_length': length,
            'outer_width': outer_width, 'null_height': d}
    return electrodes, dims
