"""Run configuration: JSON with quantity strings, validated before any computation.

Every value that carries a unit is written as "<number> <unit>", e.g.
"51.6 MHz" or "100 um". Errors name the line of the offending object.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from PaulSim.fields.geometry import BUILTINS, DEFAULT_D
from PaulSim.model.drive import DriveConfig
from PaulSim.model.species import species_lookup
from PaulSim.thermo.cooling import CA_397_LINEWIDTH, CA_397_WAVELENGTH, CoolingConfig
from PaulSim.thermo.qubit import CA_729_WAVELENGTH
from PaulSim.utilities import config_io
from PaulSim.utilities.config_io import line_of, reject_unknown, require
from PaulSim.utilities.exceptions import ConfigError, DomainError
from PaulSim.utilities.units import (AMU, ANGLE_UNITS, FREQUENCY_UNITS, LENGTH_UNITS,
                                     VOLTAGE_UNITS, quantity_to_si)

# dependency order: fields -> modes -> thermo
ANALYSES = ('stability', 'pseudo', 'modes', 'dynamics', 'thermo', 'tradeoff')
SWEEP_PARAMETERS = {'u_tilde': VOLTAGE_UNITS, 'u_dc': VOLTAGE_UNITS, 'f_rf': FREQUENCY_UNITS}
PLANES = {'xy': 2, 'xz': 1, 'yz': 0}

TOP_KEYS = ('species', 'geometry', 'drive', 'analyses', 'sweep', 'grid', 'dynamics',
            'cooling', 'qubit', 'tradeoff', 'workers', 'output')


@dataclass(frozen=True)
class GeometrySpec:
    ref: str
    d: float = DEFAULT_D
    kappa: float = 1.0
    endcap_kappa: float = None
    mesh_refinement: int = 1500
    cache: str = None


@dataclass(frozen=True)
class SweepSpec:
    """One drive parameter stepped over SI `values` (rad/s for f_rf)."""
    parameter: str
    values: np.ndarray = field(repr=False)

    def drives(self, drive):
        key = 'omega_rf' if self.parameter == 'f_rf' else self.parameter
        return [drive.with_(**{key: float(v)}) for v in self.values]

    def column(self):
        if self.parameter == 'f_rf':
            return 'f_rf_MHz', self.values / (2 * np.pi * 1e6)
        return self.parameter + '_V', self.values


@dataclass(frozen=True)
class GridSpec:
    """Box of half-width `half_width` around the RF null; `plane` makes a 2-D slice."""
    half_width: float
    n: int = 41
    plane: str = None

    def bounds(self):
        lo = np.full(3, -self.half_width)
        hi = np.full(3, self.half_width)
        if self.plane is not None:
            lo[PLANES[self.plane]] = hi[PLANES[self.plane]] = 0.0
        return lo, hi


@dataclass(frozen=True)
class DynamicsSpec:
    r0: tuple = (1e-6, 1e-6, 1e-6)
    periods: int = None
    steps_per_period: int = 64
    sample_every: int = 1


@dataclass(frozen=True)
class QubitSpec:
    rabi: float = 2 * np.pi * 100e3
    wavelength: float = CA_729_WAVELENGTH
    angle: float = 0.0


@dataclass(frozen=True)
class TradeoffSpec:
    kappa_3d: float = 0.75
    f_values: np.ndarray = field(default_factory=lambda: np.linspace(10e6, 200e6, 191),
                                 repr=False)
    f_point: float = 80e6


@dataclass(frozen=True)
class RunConfig:
    species: object
    geometry: GeometrySpec
    drive: DriveConfig
    analyses: tuple
    sweep: SweepSpec = None
    grid: GridSpec = None
    dynamics: DynamicsSpec = field(default_factory=DynamicsSpec)
    cooling: CoolingConfig = field(default_factory=CoolingConfig)
    qubit: QubitSpec = field(default_factory=QubitSpec)
    tradeoff: TradeoffSpec = field(default_factory=TradeoffSpec)
    workers: int = 1
    output: str = None
    source: dict = field(default_factory=dict, repr=False)


###############################################################################
# Field parsers

def _quantity(mapping, key, units, what, default=None):
    if key not in mapping:
        if default is None:
            require(mapping, key, what=what)
        return default
    return quantity_to_si(mapping[key], expected=units, line=line_of(mapping))


def _integer(mapping, key, what, default, low=1):
    value = mapping.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < low:
        raise ConfigError("'%s' in %s must be an integer >= %d, got %r" % (key, what, low, value),
                          line=line_of(mapping))
    return value


def _number(mapping, key, what, default):
    value = mapping.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("'%s' in %s must be a number, got %r" % (key, what, value),
                          line=line_of(mapping))
    return float(value)


def _species(doc):
    line = line_of(doc)
    try:
        if isinstance(doc, str):
            return species_lookup(doc)
        if not isinstance(doc, dict):
            raise ConfigError('species must be a name or an object', line=line)
        reject_unknown(doc, ('name', 'mass', 'charge'), 'species')
        charge = _integer(doc, 'charge', 'species', None, low=-100)
        if 'mass' in doc:
            mass = quantity_to_si(doc['mass'], expected=('amu',), line=line)
            return species_lookup((mass / AMU, 1 if charge is None else charge))
        return species_lookup(require(doc, 'name', str, 'species'), charge=charge)
    except DomainError as err:
        raise ConfigError('species: %s' % err, line=line) from None


def _geometry(doc, base_dir):
    if isinstance(doc, str):
        doc = {'ref': doc}
    if not isinstance(doc, dict):
        raise ConfigError('geometry must be a builtin name, a file path or an object',
                          line=line_of(doc))
    what = 'geometry'
    reject_unknown(doc, ('ref', 'd', 'kappa', 'endcap_kappa', 'mesh_refinement', 'cache'), what)
    ref = require(doc, 'ref', str, what)
    if ref not in BUILTINS:
        path = Path(ref)
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ConfigError("geometry '%s' is neither a builtin (%s) nor an existing file"
                              % (ref, ', '.join(BUILTINS)), line=line_of(doc))
        ref = str(path)
    kappa = _number(doc, 'kappa', what, 1.0)
    if not 0 < kappa <= 1:
        raise ConfigError('kappa must lie in (0, 1], got %r' % kappa, line=line_of(doc))
    cache = doc.get('cache')
    if cache is not None and not Path(cache).is_absolute():
        cache = str(base_dir / cache)
    return GeometrySpec(ref=ref, d=_quantity(doc, 'd', LENGTH_UNITS, what, DEFAULT_D),
                        kappa=kappa, endcap_kappa=_number(doc, 'endcap_kappa', what, None),
                        mesh_refinement=_integer(doc, 'mesh_refinement', what, 1500, low=100),
                        cache=cache)


def _drive(doc):
    what = 'drive'
    require(doc, 'f_rf', what=what)
    reject_unknown(doc, ('f_rf', 'u_tilde', 'u_dc', 'polarity', 'dc_weights'), what)
    polarity = doc.get('polarity', {})
    weights = doc.get('dc_weights', {})
    for name, table in (('polarity', polarity), ('dc_weights', weights)):
        if not isinstance(table, dict):
            raise ConfigError("'%s' must map electrode names to numbers" % name,
                              line=line_of(table, line_of(doc)))
    try:
        return DriveConfig(omega_rf=_quantity(doc, 'f_rf', FREQUENCY_UNITS, what),
                           u_tilde=_quantity(doc, 'u_tilde', VOLTAGE_UNITS, what),
                           u_dc=_quantity(doc, 'u_dc', VOLTAGE_UNITS, what, 0.0),
                           polarity=dict(polarity), dc_weights=dict(weights))
    except DomainError as err:
        raise ConfigError('drive: %s' % err, line=line_of(doc)) from None


def _sweep(doc):
    what = 'sweep'
    reject_unknown(doc, ('parameter', 'values', 'start', 'stop', 'num'), what)
    parameter = require(doc, 'parameter', str, what)
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError("sweep parameter must be one of %s, got '%s'"
                          % (', '.join(SWEEP_PARAMETERS), parameter), line=line_of(doc))
    units = SWEEP_PARAMETERS[parameter]
    if 'values' in doc:
        values = require(doc, 'values', list, what)
        if not values:
            raise ConfigError('sweep values must not be empty', line=line_of(values))
        si = [quantity_to_si(v, expected=units, line=line_of(values)) for v in values]
    else:
        start = _quantity(doc, 'start', units, what)
        stop = _quantity(doc, 'stop', units, what)
        si = np.linspace(start, stop, _integer(doc, 'num', what, 10))
    return SweepSpec(parameter, np.asarray(si, dtype=float))


def _grid(doc):
    what = 'grid'
    reject_unknown(doc, ('half_width', 'n', 'plane'), what)
    plane = doc.get('plane')
    if plane is not None and plane not in PLANES:
        raise ConfigError("grid plane must be one of %s" % ', '.join(PLANES), line=line_of(doc))
    return GridSpec(half_width=_quantity(doc, 'half_width', LENGTH_UNITS, what),
                    n=_integer(doc, 'n', what, 41, low=3), plane=plane)


def _dynamics(doc):
    what = 'dynamics'
    reject_unknown(doc, ('r0', 'periods', 'steps_per_period', 'sample_every'), what)
    r0 = doc.get('r0', ['1 um', '1 um', '1 um'])
    if not isinstance(r0, list) or len(r0) != 3:
        raise ConfigError('r0 must be a list of three lengths', line=line_of(r0, line_of(doc)))
    return DynamicsSpec(r0=tuple(quantity_to_si(v, LENGTH_UNITS, line_of(r0)) for v in r0),
                        periods=_integer(doc, 'periods', what, None),
                        steps_per_period=_integer(doc, 'steps_per_period', what, 64, low=50),
                        sample_every=_integer(doc, 'sample_every', what, 1))


def _cooling(doc):
    what = 'cooling'
    reject_unknown(doc, ('linewidth', 'wavelength', 'detuning', 'angle', 'recoil_model'), what)
    try:
        return CoolingConfig(
            linewidth=_quantity(doc, 'linewidth', FREQUENCY_UNITS, what, CA_397_LINEWIDTH),
            wavelength=_quantity(doc, 'wavelength', LENGTH_UNITS, what, CA_397_WAVELENGTH),
            detuning=(_quantity(doc, 'detuning', FREQUENCY_UNITS, what)
                      if 'detuning' in doc else None),
            angle=_quantity(doc, 'angle', ANGLE_UNITS, what, np.pi / 4),
            recoil_model=doc.get('recoil_model', 'projected'))
    except DomainError as err:
        raise ConfigError('cooling: %s' % err, line=line_of(doc)) from None


def _qubit(doc):
    what = 'qubit'
    reject_unknown(doc, ('rabi', 'wavelength', 'angle'), what)
    return QubitSpec(rabi=_quantity(doc, 'rabi', FREQUENCY_UNITS, what, QubitSpec.rabi),
                     wavelength=_quantity(doc, 'wavelength', LENGTH_UNITS, what,
                                          CA_729_WAVELENGTH),
                     angle=_quantity(doc, 'angle', ANGLE_UNITS, what, 0.0))


def _tradeoff(doc):
    what = 'tradeoff'
    reject_unknown(doc, ('kappa_3d', 'f_start', 'f_stop', 'num', 'f_point'), what)
    to_hz = 1.0 / (2 * np.pi)
    start = _quantity(doc, 'f_start', FREQUENCY_UNITS, what, 2 * np.pi * 10e6) * to_hz
    stop = _quantity(doc, 'f_stop', FREQUENCY_UNITS, what, 2 * np.pi * 200e6) * to_hz
    return TradeoffSpec(kappa_3d=_number(doc, 'kappa_3d', what, 0.75),
                        f_values=np.linspace(start, stop, _integer(doc, 'num', what, 191, low=2)),
                        f_point=_quantity(doc, 'f_point', FREQUENCY_UNITS, what,
                                          2 * np.pi * 80e6) * to_hz)


def _section(doc, key, parser, default):
    if key not in doc:
        return default
    value = doc[key]
    if not isinstance(value, dict):
        raise ConfigError("'%s' must be an object" % key, line=line_of(value, line_of(doc)))
    return parser(value)


###############################################################################
# Entry points

def parse_config(doc, base_dir='.'):
    """
    Validate a decoded run-config document.

    Parameters
    ----------
    doc (dict):
        Output of config_io.loads; line annotations are optional.
    base_dir (str or Path):
        Directory against which relative geometry and cache paths resolve.

    Returns
    -------
    RunConfig
    """
    if not isinstance(doc, dict):
        raise ConfigError('run config must be a JSON object', line=line_of(doc, 1))
    reject_unknown(doc, TOP_KEYS, 'run config')
    base_dir = Path(base_dir)

    analyses = require(doc, 'analyses', list, 'run config')
    unknown = [a for a in analyses if a not in ANALYSES]
    if unknown or not analyses:
        raise ConfigError('analyses must be a non-empty subset of %s; got %s'
                          % (', '.join(ANALYSES), ', '.join(map(str, unknown)) or 'nothing'),
                          line=line_of(analyses))
    drive_doc = require(doc, 'drive', dict, 'run config')

    workers = _integer(doc, 'workers', 'run config', 1)
    output = doc.get('output')
    if output is not None and not isinstance(output, str):
        raise ConfigError("'output' must be a directory path", line=line_of(doc))
    return RunConfig(
        species=_species(require(doc, 'species', what='run config')),
        geometry=_geometry(require(doc, 'geometry', what='run config'), base_dir),
        drive=_drive(drive_doc),
        analyses=tuple(a for a in ANALYSES if a in analyses),
        sweep=_section(doc, 'sweep', _sweep, None),
        grid=_section(doc, 'grid', _grid, None),
        dynamics=_section(doc, 'dynamics', _dynamics, DynamicsSpec()),
        cooling=_section(doc, 'cooling', _cooling, CoolingConfig()),
        qubit=_section(doc, 'qubit', _qubit, QubitSpec()),
        tradeoff=_section(doc, 'tradeoff', _tradeoff, TradeoffSpec()),
        workers=workers,
        output=output,
        source=config_io.to_plain(doc))


def load_config(path):
    path = Path(path)
    return parse_config(config_io.load(path), base_dir=path.parent)
