import numpy as np
import pytest

from PaulSim.model.drive import DriveConfig
from PaulSim.model.species import SPECIES, IonSpecies, species_lookup
from PaulSim.utilities import config_io
from PaulSim.utilities.exceptions import ConfigError, DomainError, SpeciesLookupError
from PaulSim.utilities.units import (AMU, LENGTH_UNITS, UNIT_FACTORS, UnitsPolicy,
                                     convert_config_units, parse_quantity, quantity_to_si,
                                     to_config_units)
from PaulSim.utilities.utils import config_hash


def test_builtin_species(ca40):
    assert ca40.mass_amu == pytest.approx(39.962590863)
    assert ca40.charge == pytest.approx(1.602176634e-19)
    assert set(SPECIES) >= {'Ca40', 'Ca43', 'Be9', 'Mg24', 'Sr88', 'Ba138', 'Yb171'}


def test_unknown_species_lists_known_names():
    with pytest.raises(SpeciesLookupError) as info:
        species_lookup('Unobtainium')
    assert 'Ca40' in str(info.value)
    assert isinstance(info.value, KeyError)


def test_explicit_pair_and_charge_override():
    ion = species_lookup((40.0, 2))
    assert ion.charge_number == 2
    assert ion.mass == pytest.approx(40.0 * AMU)
    assert species_lookup('Sr88', charge=2).charge_number == 2


@pytest.mark.parametrize('mass, z', [(0.0, 1), (-1e-26, 1), (6e-26, 0)])
def test_species_invariants(mass, z):
    with pytest.raises(DomainError):
        IonSpecies('bad', mass, z)


def test_drive_validation():
    with pytest.raises(DomainError):
        DriveConfig(omega_rf=0.0, u_tilde=1.0)
    with pytest.raises(DomainError):
        DriveConfig(omega_rf=1.0, u_tilde=-1.0)
    with pytest.raises(DomainError):
        DriveConfig(omega_rf=1.0, u_tilde=1.0, polarity={'RF1': 2})


def test_drive_voltages():
    drive = DriveConfig.from_frequency(51.6e6, 100.0, u_dc=2.0,
                                       polarity={'A': 1, 'B': -1}, dc_weights={'C': 0.5})
    assert drive.f_rf == pytest.approx(51.6e6)
    assert drive.rf_voltages() == {'A': 100.0, 'B': -100.0}
    assert drive.dc_voltages() == {'C': 1.0}
    assert drive.with_(u_tilde=50.0).rf_voltages()['A'] == 50.0


def test_parse_quantity():
    assert parse_quantity('51.6 MHz') == (51.6, 'MHz')
    assert parse_quantity('-3e2V') == (-300.0, 'V')
    assert quantity_to_si('51.6 MHz') == pytest.approx(2 * np.pi * 51.6e6)
    assert quantity_to_si('100 um') == pytest.approx(1e-4)
    assert quantity_to_si('45 deg') == pytest.approx(np.pi / 4)


@pytest.mark.parametrize('text', ['12 furlong', '12 MHzz', '12', 'MHz', 12.0, None])
def test_bad_quantities(text):
    with pytest.raises(ConfigError):
        parse_quantity(text)


def test_unit_restriction():
    with pytest.raises(ConfigError):
        quantity_to_si('5 V', expected=LENGTH_UNITS)


@pytest.mark.parametrize('unit', sorted(UNIT_FACTORS))
def test_units_round_trip(unit):
    for value in (1.0, 51.6, 3.3e-4, 7.5e5):
        back = to_config_units(convert_config_units(value, unit), unit)
        assert back == pytest.approx(value, rel=1e-12)
    assert UnitsPolicy().from_si(UnitsPolicy().to_si(2.5, unit), unit) == pytest.approx(2.5)


def test_line_tracking_decoder():
    doc = config_io.loads('{\n  "a": 1,\n  "b": {\n    "c": [1, 2]\n  }\n}')
    assert config_io.line_of(doc) == 1
    assert config_io.line_of(doc['b']) == 3
    assert config_io.line_of(doc['b']['c']) == 4
    assert config_io.to_plain(doc) == {'a': 1, 'b': {'c': [1, 2]}}


def test_json_syntax_error_names_line():
    with pytest.raises(ConfigError) as info:
        config_io.loads('{\n  "a": 1,\n  "b": \n}')
    assert info.value.line == 4
    assert str(info.value).startswith('line 4:')


def test_config_hash_ignores_key_order():
    assert config_hash({'a': 1, 'b': [1, 2]}) == config_hash({'b': [1, 2], 'a': 1})
    assert config_hash({'a': 1}) != config_hash({'a': 2})
