"""Per-electrode unit-voltage potentials and fields"""

import numpy as np

from PaulSim.utilities.exceptions import DomainError
from PaulSim.utilities.utils import as_points


class FieldBasis:
    """
    Potentials phi_k(r) and fields E_k(r) = -grad phi_k(r) of electrode k held
    at 1 V with every other electrode grounded.

    Superposition: Phi(r) = sum_k V_k phi_k(r).

    Subclasses implement _potentials(points) -> (n, k) and
    _fields(points) -> (n, k, 3) on validated (n, 3) point arrays.
    """

    def __init__(self, names, length_scale, provenance=None):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise DomainError('electrode names must be unique: %s' % (names,))
        self.names = names
        self.length_scale = float(length_scale)
        self.provenance = dict(provenance or {'kind': 'analytic'})

    def __repr__(self):
        return '%s(names=%s, d=%.3g m)' % (type(self).__name__, list(self.names), self.length_scale)

    # -- evaluation -----------------------------------------------------------

    def potentials(self, points):
        return self._potentials(as_points(points))

    def fields(self, points):
        return self._fields(as_points(points))

    def weights(self, voltages):
        """Voltage vector in `names` order; electrodes not mentioned are grounded."""
        unknown = set(voltages) - set(self.names)
        if unknown:
            raise DomainError('unknown electrodes %s (basis has %s)'
                              % (sorted(unknown), list(self.names)))
        return np.array([float(voltages.get(name, 0.0)) for name in self.names])

    def potential(self, points, voltages):
        return self.potentials(points) @ self.weights(voltages)

    def field(self, points, voltages):
        return np.einsum('nkc,k->nc', self.fields(points), self.weights(voltages))

    def near_surface(self, points):
        """True where a point is too close to an electrode for the model to be trusted."""
        return np.zeros(as_points(points).shape[0], dtype=bool)

    def check_domain(self, points):
        """Raise DomainError for points where the model is undefined."""
        return None

    # -- derived bases --------------------------------------------------------

    def rotated(self, rotation, origin=(0.0, 0.0, 0.0)):
        """The same electrodes rigidly rotated by `rotation` about `origin`."""
        R = np.asarray(rotation, dtype=float)
        origin = np.asarray(origin, dtype=float)
        return TransformedBasis(self, R, origin - R @ origin)

    def shifted(self, offset):
        return TransformedBasis(self, np.eye(3), np.asarray(offset, dtype=float))

    def with_uniform_term(self, name, field_vector):
        """Append a pseudo-electrode whose unit voltage produces a uniform field."""
        return CompositeBasis([self, UniformFieldBasis(name, field_vector, self.length_scale)])


class TransformedBasis(FieldBasis):
    """Basis of `base` moved by r -> R r + t."""

    def __init__(self, base, rotation, translation):
        super().__init__(base.names, base.length_scale, base.provenance)
        self.base = base
        self.R = np.asarray(rotation, dtype=float)
        self.t = np.asarray(translation, dtype=float)

    def _local(self, points):
        return (points - self.t) @ self.R

    def _potentials(self, points):
        return self.base._potentials(self._local(points))

    def _fields(self, points):
        return self.base._fields(self._local(points)) @ self.R.T

    def near_surface(self, points):
        return self.base.near_surface(self._local(as_points(points)))

    def check_domain(self, points):
        return self.base.check_domain(self._local(as_points(points)))


class CompositeBasis(FieldBasis):
    """Side-by-side union of bases sharing one coordinate frame."""

    def __init__(self, parts):
        parts = list(parts)
        names = [n for p in parts for n in p.names]
        super().__init__(names, parts[0].length_scale,
                         {'kind': 'composite', 'parts': [p.provenance for p in parts]})
        self.parts = parts

    def _potentials(self, points):
        return np.concatenate([p._potentials(points) for p in self.parts], axis=1)

    def _fields(self, points):
        return np.concatenate([p._fields(points) for p in self.parts], axis=1)

    def near_surface(self, points):
        return np.any([p.near_surface(points) for p in self.parts], axis=0)

    def check_domain(self, points):
        for p in self.parts:
            p.check_domain(points)


class UniformFieldBasis(FieldBasis):
    """phi = -E0 . r per volt, for stray or pickup fields."""

    def __init__(self, name, field_vector, length_scale):
        super().__init__([name], length_scale)
        self.E0 = np.asarray(field_vector, dtype=float)

    def _potentials(self, points):
        return -(points @ self.E0)[:, None]

    def _fields(self, points):
        return np.broadcast_to(self.E0, (points.shape[0], 1, 3)).copy()
