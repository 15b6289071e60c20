"""Units policy: SI inside, config units outside.

Frequencies in configs are ordinary frequencies and come in as angular
frequencies (omega = 2 pi f). Angles come in as radians.
"""

import re
from dataclasses import dataclass, field

import numpy as np
from scipy import constants

from PaulSim.utilities.exceptions import ConfigError

AMU = constants.physical_constants['atomic mass constant'][0]

# multiplicative factor to SI for each config unit
UNIT_FACTORS = {
    'um': 1e-6,
    'µm': 1e-6,
    'nm': 1e-9,
    'mm': 1e-3,
    'm': 1.0,
    'V': 1.0,
    'Hz': 2 * np.pi,
    'kHz': 2 * np.pi * 1e3,
    'MHz': 2 * np.pi * 1e6,
    'amu': AMU,
    'deg': np.pi / 180,
    'rad': 1.0,
}

QUANTITY_PAT = re.compile(
    r'^\s*(?P<value>[-+]?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?)\s*(?P<unit>[^\s\d]+)\s*$')


@dataclass(frozen=True)
class UnitsPolicy:
    """Canonical internal units and the accepted external units."""
    internal: tuple = ('m', 'kg', 's', 'V', 'rad/s')
    external: tuple = field(default_factory=lambda: tuple(UNIT_FACTORS))

    def to_si(self, value, unit):
        return convert_config_units(value, unit)

    def from_si(self, value, unit):
        return to_config_units(value, unit)


def _factor(unit):
    try:
        return UNIT_FACTORS[unit]
    except KeyError:
        raise ConfigError("unknown unit '%s'; supported units are %s"
                          % (unit, ', '.join(UNIT_FACTORS))) from None


def convert_config_units(value, unit):
    """Convert a config value into SI.

    Parameters
    ----------
    value (float or numpy.ndarray):
        Value in config units.
    unit (str):
        One of UNIT_FACTORS. MHz, kHz and Hz denote ordinary frequencies
        and produce angular frequencies.

    Returns
    -------
    SI value (rad/s for frequencies).
    """
    return np.asarray(value, dtype=float) * _factor(unit) if np.ndim(value) else float(value) * _factor(unit)


def to_config_units(value, unit):
    """Inverse of convert_config_units."""
    return np.asarray(value, dtype=float) / _factor(unit) if np.ndim(value) else float(value) / _factor(unit)


def parse_quantity(text, line=None):
    """Split a quantity string such as '51.6 MHz' into (51.6, 'MHz')."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        raise ConfigError('quantity %r has no unit' % (text,), line=line)
    if not isinstance(text, str):
        raise ConfigError('expected a quantity string, got %r' % (text,), line=line)
    match = QUANTITY_PAT.match(text)
    if match is None:
        raise ConfigError("malformed quantity '%s'" % text, line=line)
    unit = match.group('unit')
    if unit not in UNIT_FACTORS:
        raise ConfigError("unknown unit '%s' in '%s'" % (unit, text), line=line)
    return float(match.group('value')), unit


def quantity_to_si(text, expected=None, line=None):
    """Parse a quantity string and convert it to SI.

    `expected` restricts the accepted units, e.g. ('um', 'µm', 'mm', 'm').
    """
    value, unit = parse_quantity(text, line=line)
    if expected is not None and unit not in expected:
        raise ConfigError("unit '%s' not allowed here (expected one of %s)"
                          % (unit, ', '.join(expected)), line=line)
    return convert_config_units(value, unit)


LENGTH_UNITS = ('um', 'µm', 'nm', 'mm', 'm')
FREQUENCY_UNITS = ('Hz', 'kHz', 'MHz')
VOLTAGE_UNITS = ('V',)
ANGLE_UNITS = ('deg', 'rad')
