"""Electrode systems: geometry files, primitive meshing and built-in traps"""

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from PaulSim.fields.analytic import (five_wire_layout, ideal_quadrupole_basis,
                                     planar_patch_basis)
from PaulSim.utilities import config_io
from PaulSim.utilities.config_io import line_of, reject_unknown, require
from PaulSim.utilities.exceptions import ConfigError, DomainError, StaleCacheWarning
from PaulSim.utilities.logger import get_logger
from PaulSim.utilities.units import LENGTH_UNITS, convert_config_units
from PaulSim.utilities.utils import config_hash, data_path

logger = get_logger(__name__)

RF_PLUS, RF_MINUS, DC = 'RF_PLUS', 'RF_MINUS', 'DC'
ROLES = (RF_PLUS, RF_MINUS, DC)
AXES = {'x': 0, 'y': 1, 'z': 2}
# in-plane axes of a rectangle with the given normal
PLANE_AXES = {'x': (1, 2), 'y': (0, 2), 'z': (0, 1)}
BUILTINS = ('ideal3d', 'surface5wire', 'fourpillar')
DEFAULT_D = 100e-6
ASPECT_WARN = 10.0


###############################################################################
# Primitives

def _grid_panels(origin, u_vec, v_vec, nu, nv):
    """Quads split into four triangles around their centers, shape (4 nu nv, 3, 3)."""
    s = np.linspace(0.0, 1.0, nu + 1)
    t = np.linspace(0.0, 1.0, nv + 1)
    grid = origin + s[:, None, None] * u_vec + t[None, :, None] * v_vec
    p00, p10 = grid[:-1, :-1], grid[1:, :-1]
    p11, p01 = grid[1:, 1:], grid[:-1, 1:]
    c = 0.25 * (p00 + p10 + p11 + p01)
    tris = np.stack([np.stack([p00, p10, c], axis=-2),
                     np.stack([p10, p11, c], axis=-2),
                     np.stack([p11, p01, c], axis=-2),
                     np.stack([p01, p00, c], axis=-2)], axis=2)
    return tris.reshape(-1, 3, 3)


def _icosahedron():
    g = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array([(-1, g, 0), (1, g, 0), (-1, -g, 0), (1, -g, 0),
                      (0, -1, g), (0, 1, g), (0, -1, -g), (0, 1, -g),
                      (g, 0, -1), (g, 0, 1), (-g, 0, -1), (-g, 0, 1)], dtype=float)
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    return verts / np.linalg.norm(verts, axis=1)[:, None], faces


def icosphere(center, radius, subdivisions):
    """Sphere of 20 * subdivisions**2 flat triangles with vertices on the surface."""
    verts, faces = _icosahedron()
    n = int(subdivisions)
    tris = []
    for ia, ib, ic in faces:
        A, B, C = verts[ia], verts[ib], verts[ic]

        def P(i, j):
            p = A + (B - A) * i / n + (C - A) * j / n
            return p / np.linalg.norm(p)

        for i in range(n):
            for j in range(n - i):
                tris.append((P(i, j), P(i + 1, j), P(i, j + 1)))
                if i + j < n - 1:
                    tris.append((P(i + 1, j), P(i + 1, j + 1), P(i, j + 1)))
    return np.asarray(center, dtype=float) + radius * np.array(tris)


@dataclass(frozen=True)
class Primitive:
    """
    Analytic surface descriptor, lengths in meters.

    kind 'rectangle': `normal` axis, `center`, `size` = the two in-plane extents
    kind 'box':       `center`, `size` = (sx, sy, sz)
    kind 'sphere':    `center`, `radius`
    `max_edge` caps the panel edge on this primitive only.
    """
    kind: str
    center: tuple
    size: tuple = ()
    normal: str = 'z'
    radius: float = 0.0
    max_edge: float = None

    @property
    def area(self):
        if self.kind == 'rectangle':
            return self.size[0] * self.size[1]
        if self.kind == 'box':
            sx, sy, sz = self.size
            return 2.0 * (sx * sy + sy * sz + sx * sz)
        return 4.0 * np.pi * self.radius ** 2

    def triangulate(self, edge):
        if self.max_edge is not None:
            edge = min(edge, self.max_edge)
        center = np.asarray(self.center, dtype=float)
        if self.kind == 'rectangle':
            return _rectangle_panels(center, self.normal, self.size, edge)
        if self.kind == 'box':
            faces = []
            for axis, name in enumerate('xyz'):
                iu, iv = PLANE_AXES[name]
                for sign in (-1.0, 1.0):
                    c = center.copy()
                    c[axis] += sign * self.size[axis] / 2.0
                    faces.append(_rectangle_panels(c, name, (self.size[iu], self.size[iv]), edge))
            return np.concatenate(faces)
        n = max(1, int(round(math.sqrt(16.0 * np.pi * self.radius ** 2 / (20.0 * edge ** 2)))))
        return icosphere(center, self.radius, n)


def _rectangle_panels(center, normal, size, edge):
    iu, iv = PLANE_AXES[normal]
    su, sv = float(size[0]), float(size[1])
    u_vec, v_vec = np.zeros(3), np.zeros(3)
    u_vec[iu], v_vec[iv] = su, sv
    origin = center - u_vec / 2.0 - v_vec / 2.0
    nu = max(1, int(math.ceil(su / edge - 1e-9)))
    nv = max(1, int(math.ceil(sv / edge - 1e-9)))
    return _grid_panels(origin, u_vec, v_vec, nu, nv)


###############################################################################
# Electrodes

@dataclass(frozen=True, eq=False)
class Electrode:
    """
    One conductor.

    Parameters
    ----------
    name (str)
    role (str):
        RF_PLUS, RF_MINUS or DC.
    index (int or None):
        DC electrode number.
    panels (numpy.ndarray or None):
        Explicit triangles in meters, shape (m, 3, 3), used as given.
    primitives (tuple of Primitive)
    """
    name: str
    role: str
    index: int = None
    panels: np.ndarray = field(default=None, repr=False)
    primitives: tuple = ()

    def __post_init__(self):
        if self.role not in ROLES:
            raise DomainError('electrode %r has unknown role %r (use %s)'
                              % (self.name, self.role, ', '.join(ROLES)))
        if self.panels is None and not self.primitives:
            raise DomainError('electrode %r has neither panels nor primitives' % self.name)
        if self.panels is not None:
            panels = np.asarray(self.panels, dtype=float)
            areas = triangle_areas(panels)
            if np.any(areas <= 0):
                raise DomainError('electrode %r: panel %d has zero area'
                                  % (self.name, int(np.argmin(areas))))
            object.__setattr__(self, 'panels', panels)

    @property
    def is_rf(self):
        return self.role in (RF_PLUS, RF_MINUS)

    @property
    def area(self):
        total = sum(p.area for p in self.primitives)
        if self.panels is not None:
            total += triangle_areas(self.panels).sum()
        return float(total)

    def triangulate(self, edge):
        parts = [p.triangulate(edge) for p in self.primitives]
        if self.panels is not None:
            parts.append(self.panels)
        return np.concatenate(parts)


def triangle_areas(triangles):
    triangles = np.asarray(triangles, dtype=float)
    cross = np.cross(triangles[:, 1] - triangles[:, 0], triangles[:, 2] - triangles[:, 0])
    return 0.5 * np.linalg.norm(cross, axis=1)


def aspect_ratios(triangles):
    """Longest edge squared over area, scaled so an equilateral triangle gives 1."""
    edges = np.roll(triangles, -1, axis=1) - triangles
    longest = np.linalg.norm(edges, axis=2).max(axis=1)
    return (np.sqrt(3.0) / 4.0) * longest ** 2 / triangle_areas(triangles)


@dataclass(frozen=True)
class ElectrodeSystem:
    """Electrodes plus the ion-to-nearest-RF-electrode distance d (m)."""
    electrodes: tuple
    d: float
    name: str = 'custom'

    def __post_init__(self):
        object.__setattr__(self, 'electrodes', tuple(self.electrodes))
        if not np.isfinite(self.d) or self.d <= 0:
            raise DomainError('d must be positive, got %r' % self.d)
        names = [e.name for e in self.electrodes]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise DomainError('duplicate electrode name(s): %s' % ', '.join(dupes))
        if not any(e.is_rf for e in self.electrodes):
            raise DomainError('electrode system %r has no RF electrode' % self.name)

    @property
    def names(self):
        return [e.name for e in self.electrodes]

    def default_polarity(self):
        """RF_PLUS -> +1, RF_MINUS -> -1."""
        return {e.name: (1 if e.role == RF_PLUS else -1) for e in self.electrodes if e.is_rf}

    def rf_center(self):
        """Mean position of the RF surfaces, the starting point of null searches."""
        centers = []
        for e in self.electrodes:
            if not e.is_rf:
                continue
            centers += [p.center for p in e.primitives]
            if e.panels is not None:
                centers.append(e.panels.reshape(-1, 3).mean(axis=0))
        return tuple(float(c) for c in np.mean(centers, axis=0))

    def fingerprint(self, mesh_refinement):
        """sha256 of the electrode description and the panel target a solve was built from."""
        def plain(value):
            return None if value is None else np.asarray(value, dtype=float).tolist()

        electrodes = [{'name': e.name, 'role': e.role, 'index': e.index,
                       'primitives': [{'kind': p.kind, 'center': plain(p.center),
                                       'size': plain(p.size), 'normal': p.normal,
                                       'radius': float(p.radius), 'max_edge': plain(p.max_edge)}
                                      for p in e.primitives],
                       'panels': plain(e.panels)}
                      for e in self.electrodes]
        return config_hash({'name': self.name, 'd': float(self.d), 'electrodes': electrodes,
                            'mesh_refinement': int(mesh_refinement)})

    def mesh(self, target):
        """
        Triangulate every electrode with a common edge length chosen so the
        primitive panels add up to roughly `target`.

        Returns
        -------
        triangles (numpy.ndarray): Shape (m, 3, 3).
        owner (numpy.ndarray): Electrode index of every panel.
        """
        fixed = sum(0 if e.panels is None else len(e.panels) for e in self.electrodes)
        prim_area = sum(p.area for e in self.electrodes for p in e.primitives)
        remaining = max(target - fixed, 1)
        # each square cell of side `edge` yields four triangles
        edge = math.sqrt(4.0 * prim_area / remaining) if prim_area > 0 else 1.0
        triangles, owner = [], []
        for k, e in enumerate(self.electrodes):
            tris = e.triangulate(edge)
            triangles.append(tris)
            owner.append(np.full(len(tris), k, dtype=int))
        triangles = np.concatenate(triangles)
        logger.debug('meshed %s: %d panels (target %d, edge %.3g m)',
                     self.name, len(triangles), target, edge)
        return triangles, np.concatenate(owner)


###############################################################################
# Geometry files

GEOMETRY_KEYS = ('name', 'length_unit', 'd', 'electrodes')
ELECTRODE_KEYS = ('name', 'role', 'index', 'primitive', 'primitives', 'panels')
PRIMITIVE_KEYS = {'rectangle': ('type', 'normal', 'center', 'size', 'max_edge'),
                  'box': ('type', 'center', 'size', 'max_edge'),
                  'sphere': ('type', 'center', 'radius', 'max_edge')}


def _number(value, what, line):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError('%s must be a number, got %r' % (what, value), line=line)
    return float(value)


def _vector(value, n, what, scale, line):
    if not isinstance(value, list) or len(value) != n:
        raise ConfigError('%s must be a list of %d numbers' % (what, n), line=line_of(value, line))
    return tuple(_number(v, what, line_of(value, line)) * scale for v in value)


def _parse_primitive(doc, scale, where):
    kind = require(doc, 'type', str, what=where)
    if kind not in PRIMITIVE_KEYS:
        raise ConfigError("%s: unknown primitive type '%s' (use %s)"
                          % (where, kind, ', '.join(PRIMITIVE_KEYS)), line=line_of(doc))
    reject_unknown(doc, PRIMITIVE_KEYS[kind], what=where)
    line = line_of(doc)
    center = _vector(require(doc, 'center', what=where), 3, where + ' center', scale, line)
    max_edge = doc.get('max_edge')
    if max_edge is not None:
        max_edge = _number(max_edge, where + ' max_edge', line) * scale
        if max_edge <= 0:
            raise ConfigError('%s: max_edge must be positive' % where, line=line)
    if kind == 'sphere':
        radius = _number(require(doc, 'radius', what=where), where + ' radius', line) * scale
        if radius <= 0:
            raise ConfigError('%s: radius must be positive' % where, line=line)
        return Primitive('sphere', center, radius=radius, max_edge=max_edge)
    n = 3 if kind == 'box' else 2
    size = _vector(require(doc, 'size', what=where), n, where + ' size', scale, line)
    if min(size) <= 0:
        raise ConfigError('%s: every size must be positive (zero-area face)' % where, line=line)
    normal = doc.get('normal', 'z')
    if normal not in AXES:
        raise ConfigError("%s: normal must be 'x', 'y' or 'z', got %r" % (where, normal), line=line)
    return Primitive(kind, center, size=size, normal=normal, max_edge=max_edge)


def _parse_panels(doc, scale, name):
    if not isinstance(doc, list) or not doc:
        raise ConfigError("electrode '%s': panels must be a non-empty list" % name,
                          line=line_of(doc))
    triangles = []
    for i, panel in enumerate(doc):
        line = line_of(panel, line_of(doc))
        if not isinstance(panel, list) or len(panel) not in (3, 4):
            raise ConfigError("electrode '%s' panel %d: expected 3 (triangle) or 4 (quad) vertices"
                              % (name, i), line=line)
        pts = np.array([_vector(p, 3, "electrode '%s' panel %d vertex" % (name, i), scale, line)
                        for p in panel])
        tris = [pts[[0, 1, 2]]] if len(pts) == 3 else [pts[[0, 1, 2]], pts[[0, 2, 3]]]
        if np.any(triangle_areas(np.array(tris)) <= 0):
            raise ConfigError("electrode '%s' panel %d has zero area" % (name, i), line=line)
        triangles.extend(tris)
    return np.array(triangles)


def parse_geometry(doc, default_name='custom'):
    """
    Build an ElectrodeSystem from a decoded geometry document.

    Schema (lengths in `length_unit`, default um)::

        {"name": str, "length_unit": "um", "d": number,
         "electrodes": [{"name": str, "role": "RF_PLUS" | "RF_MINUS" | "DC",
                         "index": int,
                         "primitive": {...} | "primitives": [{...}] | "panels": [[[x,y,z]x3|4]]}]}
    """
    if not isinstance(doc, dict):
        raise ConfigError('geometry document must be an object', line=line_of(doc))
    reject_unknown(doc, GEOMETRY_KEYS, what='geometry')
    unit = doc.get('length_unit', 'um')
    if unit not in LENGTH_UNITS:
        raise ConfigError("length_unit must be one of %s, got %r" % (', '.join(LENGTH_UNITS), unit),
                          line=line_of(doc))
    scale = convert_config_units(1.0, unit)
    d = _number(require(doc, 'd', what='geometry'), 'd', line_of(doc)) * scale
    if d <= 0:
        raise ConfigError('d must be positive', line=line_of(doc))
    entries = require(doc, 'electrodes', list, what='geometry')
    if not entries:
        raise ConfigError('geometry has no electrodes', line=line_of(entries))

    electrodes, seen, next_dc = [], {}, 1
    for k, entry in enumerate(entries):
        where = 'electrode %d' % k
        name = require(entry, 'name', str, what=where)
        where = "electrode '%s'" % name
        reject_unknown(entry, ELECTRODE_KEYS, what=where)
        if name in seen:
            raise ConfigError("duplicate electrode name '%s' (first defined on line %s)"
                              % (name, seen[name]), line=line_of(entry))
        seen[name] = line_of(entry)
        role = require(entry, 'role', str, what=where)
        if role not in ROLES:
            raise ConfigError("%s: role must be one of %s, got '%s'" % (where, ', '.join(ROLES), role),
                              line=line_of(entry))
        index = entry.get('index')
        if role == DC:
            if index is None:
                index = next_dc
            elif isinstance(index, bool) or not isinstance(index, int):
                raise ConfigError('%s: index must be an integer' % where, line=line_of(entry))
            next_dc = index + 1

        prims = []
        if 'primitive' in entry:
            prims.append(_parse_primitive(entry['primitive'], scale, where + ' primitive'))
        for j, p in enumerate(entry.get('primitives', [])):
            prims.append(_parse_primitive(p, scale, '%s primitive %d' % (where, j)))
        panels = _parse_panels(entry['panels'], scale, name) if 'panels' in entry else None
        if panels is None and not prims:
            raise ConfigError('%s needs a primitive, primitives or panels' % where,
                              line=line_of(entry))
        electrodes.append(Electrode(name, role, index if role == DC else None,
                                    panels=panels, primitives=tuple(prims)))

    if not any(e.is_rf for e in electrodes):
        raise ConfigError('geometry has no RF electrode (role RF_PLUS or RF_MINUS)',
                          line=line_of(entries))
    return ElectrodeSystem(electrodes, d, doc.get('name', default_name))


def load_geometry(path):
    path = Path(path)
    return parse_geometry(config_io.load(path), default_name=path.stem)


@dataclass
class GeometryDiagnostics:
    path: str
    ok: bool
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    n_electrodes: int = 0
    n_panels: int = 0
    roles: dict = field(default_factory=dict)
    min_panel_area: float = float('nan')
    aspect_max: float = float('nan')
    aspect_median: float = float('nan')

    def lines(self):
        out = ['geometry: %s' % self.path, 'status: %s' % ('pass' if self.ok else 'FAIL')]
        out += ['error: %s' % e for e in self.errors]
        out += ['warning: %s' % w for w in self.warnings]
        if self.ok:
            out += ['electrodes: %d (%s)' % (self.n_electrodes,
                                             ', '.join('%s=%d' % kv for kv in sorted(self.roles.items()))),
                    'panels: %d' % self.n_panels,
                    'min_panel_area_um2: %.6g' % (self.min_panel_area * 1e12),
                    'aspect_ratio_max: %.4g' % self.aspect_max,
                    'aspect_ratio_median: %.4g' % self.aspect_median]
        return out


def validate_geometry(path, mesh_refinement=2000):
    """
    Check a geometry file without solving it.

    Schema violations, zero-area panels, duplicate names and a missing RF
    electrode are errors; panels with aspect ratio above ASPECT_WARN are
    reported as warnings.
    """
    diag = GeometryDiagnostics(path=str(path), ok=False)
    try:
        system = load_geometry(path)
    except ConfigError as err:
        diag.errors.append(str(err))
        return diag
    except DomainError as err:
        diag.errors.append(str(err))
        return diag

    triangles, owner = system.mesh(mesh_refinement)
    aspect = aspect_ratios(triangles)
    diag.ok = True
    diag.n_electrodes = len(system.electrodes)
    diag.n_panels = int(len(triangles))
    for e in system.electrodes:
        diag.roles[e.role] = diag.roles.get(e.role, 0) + 1
    diag.min_panel_area = float(triangle_areas(triangles).min())
    diag.aspect_max = float(aspect.max())
    diag.aspect_median = float(np.median(aspect))
    if diag.aspect_max > ASPECT_WARN:
        worst = int(np.argmax(aspect))
        diag.warnings.append("panel %d of electrode '%s' has aspect ratio %.3g"
                             % (worst, system.electrodes[owner[worst]].name, diag.aspect_max))
    if RF_MINUS not in diag.roles and RF_PLUS in diag.roles:
        diag.warnings.append('no RF_MINUS electrode: drive is single-ended')
    return diag


###############################################################################
# Built-in traps

@dataclass(frozen=True)
class TrapGeometry:
    """A solved basis together with its default RF polarity and echoed dimensions."""
    name: str
    basis: object
    polarity: dict
    d: float
    dims: dict = field(default_factory=dict)
    null_guess: tuple = (0.0, 0.0, 0.0)


def build_geometry(ref, d=DEFAULT_D, kappa=1.0, endcap_kappa=None,
                   mesh_refinement=1500, cache=None, verbose=False):
    """
    Resolve a geometry reference to a TrapGeometry.

    Parameters
    ----------
    ref (str):
        'ideal3d', 'surface5wire', 'fourpillar' or a geometry file path.
    d (float):
        Length scale of the analytic builtins, meters.
    kappa, endcap_kappa (float):
        Efficiencies of the ideal quadrupole.
    mesh_refinement (int):
        Target panel count for BEM geometries.
    cache (str or None):
        HDF5 file holding a previously solved BEM basis; written after a solve.
    """
    if ref == 'ideal3d':
        basis = ideal_quadrupole_basis(d, kappa, endcap_kappa)
        return TrapGeometry('ideal3d', basis, {'RF+': 1, 'RF-': -1}, d,
                            {'kappa': kappa, 'endcap_kappa': endcap_kappa})
    if ref == 'surface5wire':
        electrodes, dims = five_wire_layout(d)
        return TrapGeometry('surface5wire', planar_patch_basis(electrodes, d),
                            {'RF1': 1, 'RF2': 1}, d, dims, null_guess=(0.0, 0.0, d))

    from PaulSim.fields.bem_solver import BEMBasis, solve_bem

    path = data_path('fourpillar.json') if ref == 'fourpillar' else Path(ref)
    if not Path(path).exists():
        raise ConfigError("geometry '%s' is neither a builtin (%s) nor an existing file"
                          % (ref, ', '.join(BUILTINS)))
    system = load_geometry(path)
    fingerprint = system.fingerprint(mesh_refinement)
    basis = None
    if cache is not None and Path(cache).exists():
        logger.info('loading BEM solution from %s', cache)
        basis = BEMBasis.from_hdf5(cache)
        if basis.provenance.get('geometry_sha256') != fingerprint:
            warnings.warn('BEM cache %s was solved for a different geometry or mesh_refinement;'
                          ' solving again' % cache, StaleCacheWarning, stacklevel=2)
            basis = None
    if basis is None:
        basis = solve_bem(system, mesh_refinement=mesh_refinement, verbose=verbose)
        if cache is not None:
            basis.to_hdf5(cache)
    return TrapGeometry(system.name, basis, system.default_polarity(), system.d,
                        {'panels': basis.n_panels}, null_guess=system.rf_center())
