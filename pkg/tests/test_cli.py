import json
import shutil
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from PaulSim import __version__
from PaulSim.scripts.config import load_config, parse_config
from PaulSim.scripts.figures import FIGURES
from PaulSim.scripts.run_paulsim import EXIT_CHECKS, EXIT_CONFIG, EXIT_OK, EXIT_PHYSICS, main
from PaulSim.utilities import config_io
from PaulSim.utilities.exceptions import ConfigError
from PaulSim.utilities.utils import data_path

GOLDEN = Path(__file__).parent / 'golden'

BASE = {'species': 'Ca40', 'geometry': 'ideal3d',
        'drive': {'f_rf': '20 MHz', 'u_tilde': '10 V'}, 'analyses': ['stability']}


def _config(tmp_path, name='run.json', **changes):
    doc = json.loads(json.dumps(BASE))
    doc.update(changes)
    path = tmp_path / name
    path.write_text(json.dumps(doc, indent=2))
    return path


def _run(config, out, *extra):
    return main(['run', '--config', str(config), '--out', str(out), *extra])


def test_config_errors_name_the_line():
    text = ('{\n  "species": "Ca40",\n  "geometry": "ideal3d",\n'
            '  "drive": {"f_rf": "20 MHzz", "u_tilde": "10 V"},\n'
            '  "analyses": ["stability"]\n}')
    with pytest.raises(ConfigError) as info:
        parse_config(config_io.loads(text))
    assert info.value.line == 4
    assert str(info.value).startswith('line 4:')


@pytest.mark.parametrize('changes', [
    {'analyses': ['stability', 'everything']},
    {'drive': {'u_tilde': '10 V'}},
    {'drive': {'f_rf': '20 MHz', 'u_tilde': '10 um'}},
    {'geometry': {'ref': 'ideal3d', 'kappa': 1.5}},
    {'sweep': {'parameter': 'kappa', 'values': [1]}},
    {'workers': 0},
    {'colour': 'blue'},
])
def test_config_rejects(tmp_path, changes):
    with pytest.raises(ConfigError):
        load_config(_config(tmp_path, **changes))


def test_config_defaults(tmp_path):
    config = load_config(_config(tmp_path, geometry={'ref': 'ideal3d', 'd': '80 um'}))
    assert config.geometry.d == pytest.approx(80e-6)
    assert config.drive.omega_rf == pytest.approx(2 * np.pi * 20e6)
    assert config.drive.polarity == {}
    assert config.sweep is None and config.grid is None
    assert config.workers == 1


def test_stability_run(tmp_path):
    out = tmp_path / 'out'
    assert _run(_config(tmp_path), out) == EXIT_OK
    table = pd.read_csv(out / 'stability.csv')
    assert list(table.columns) == ['a', 'q', 'beta', 'stable', 'f_sec_MHz']
    assert len(table) == 1 and bool(table.stable[0])
    assert abs(table.q[0]) == pytest.approx(0.611, abs=0.002)
    summary = (out / 'summary.txt').read_text()
    assert 'config_sha256: ' in summary
    assert 'paulsim_version: %s' % __version__ in summary


def test_reruns_are_byte_identical(tmp_path):
    sweep = {'parameter': 'u_tilde', 'values': ['4 V', '6 V', '8 V', '10 V']}
    config = _config(tmp_path, analyses=['stability', 'modes'], sweep=sweep)
    runs = [tmp_path / 'a', tmp_path / 'b', tmp_path / 'c']
    assert _run(config, runs[0]) == EXIT_OK
    assert _run(config, runs[1]) == EXIT_OK
    assert _run(config, runs[2], '--workers', '2') == EXIT_OK
    names = sorted(p.name for p in runs[0].iterdir())
    assert names == ['modes.csv', 'stability.csv', 'summary.txt']
    for other in runs[1:]:
        for name in names:
            assert (other / name).read_bytes() == (runs[0] / name).read_bytes()


def test_malformed_unit_writes_nothing(tmp_path):
    out = tmp_path / 'out'
    config = _config(tmp_path, drive={'f_rf': '20 MHzz', 'u_tilde': '10 V'})
    assert _run(config, out) == EXIT_CONFIG
    assert not out.exists()


def test_unknown_species_exit_code(tmp_path):
    assert _run(_config(tmp_path, species='Xx99'), tmp_path / 'out') == EXIT_CONFIG


def test_unstable_drive_exit_code(tmp_path):
    out = tmp_path / 'out'
    config = _config(tmp_path, drive={'f_rf': '10 MHz', 'u_tilde': '5 V'}, analyses=['modes'])
    assert _run(config, out) == EXIT_PHYSICS
    assert not out.exists()


def test_sweep_keeps_unstable_points(tmp_path):
    out = tmp_path / 'out'
    sweep = {'parameter': 'u_tilde', 'values': ['5 V', '10 V', '20 V']}
    config = _config(tmp_path, analyses=['stability', 'modes'], sweep=sweep)
    assert _run(config, out) == EXIT_OK
    modes = pd.read_csv(out / 'modes.csv')
    assert list(modes.u_tilde_V) == [5.0, 10.0, 20.0]
    assert list(modes.stable) == [True, True, False]
    assert np.isnan(modes.f2_MHz[2])
    stability = pd.read_csv(out / 'stability.csv')
    assert list(stability.stable) == [True, True, False]


def test_full_run(tmp_path):
    out = tmp_path / 'out'
    config = _config(tmp_path, analyses=['thermo', 'pseudo', 'modes', 'stability'])
    assert _run(config, out) == EXIT_OK
    for name in ('stability', 'modes', 'pseudopotential', 'trap_metrics', 'thermo_modes',
                 'gate'):
        assert (out / ('%s.csv' % name)).exists(), name

    modes = pd.read_csv(out / 'modes.csv')
    assert modes.f1_MHz[0] == 0.0
    assert modes.f2_MHz[0] == pytest.approx(modes.f3_MHz[0], rel=1e-9)
    metrics = pd.read_csv(out / 'trap_metrics.csv')
    assert metrics.depth_eV[0] > 0
    assert metrics.efficiency[0] == pytest.approx(2.0, rel=1e-6)
    assert len(pd.read_csv(out / 'pseudopotential.csv')) == 41 * 41

    thermo = pd.read_csv(out / 'thermo_modes.csv')
    assert list(thermo['mode']) == [2, 3]
    assert (thermo.ld_factor < 0.1).all()
    gate = pd.read_csv(out / 'gate.csv')
    assert 0 < gate.pi_error[0] < 1e-3


@pytest.fixture(scope='module')
def reproduced(tmp_path_factory):
    """Output directories of every reproduce target at 1 and 8 workers, built once."""
    cache = {}

    def build(target, workers):
        if (target, workers) not in cache:
            out = tmp_path_factory.mktemp('%s_w%d' % (target, workers))
            code = main(['reproduce', target, '--out', str(out), '--workers', str(workers)])
            assert code in (EXIT_OK, EXIT_CHECKS)
            cache[target, workers] = out
        return cache[target, workers]
    return build


@pytest.mark.parametrize('target', sorted(FIGURES))
def test_reproduce_checks_pass(reproduced, target):
    checks = pd.read_csv(reproduced(target, 1) / 'checks.csv')
    assert len(checks) > 0
    assert checks['pass'].all(), checks[~checks['pass']]


def test_reproduce_bundles_name_their_bands(reproduced):
    fig2a = pd.read_csv(reproduced('fig2a', 1) / 'checks.csv').set_index('band')
    assert {'harmonicity_3d', 'harmonicity_surface'} <= set(fig2a.index)
    assert fig2a.loc['harmonicity_surface', 'low'] >= 1e-3
    assert 'harmonic-fit residual 3D' in (reproduced('fig2a', 1) / 'summary.txt').read_text()
    assert 'kappa_3d = 0.75' in (reproduced('fig2b', 1) / 'summary.txt').read_text()
    fig5a = pd.read_csv(reproduced('fig5a', 1) / 'checks.csv').set_index('band')
    assert fig5a.loc['contrast_first_max', 'value'] >= 0.99
    assert fig5a.loc['contrast_non_increasing', 'pass']
    contrast = pd.read_csv(reproduced('fig5a', 1) / 'fig5a_contrast.csv')
    assert len(contrast) == 11


@pytest.mark.parametrize('target', sorted(FIGURES))
def test_reproduce_is_byte_identical_across_workers(reproduced, target):
    serial, pooled = reproduced(target, 1), reproduced(target, 8)
    names = sorted(p.name for p in serial.glob('*.csv'))
    assert names == sorted(p.name for p in pooled.glob('*.csv'))
    for name in names:
        assert (serial / name).read_bytes() == (pooled / name).read_bytes(), name


@pytest.mark.parametrize('target', sorted(FIGURES))
def test_reproduce_matches_golden(reproduced, target, update_golden):
    out, golden = reproduced(target, 1), GOLDEN / target
    names = sorted(p.name for p in out.glob('*.csv'))
    if update_golden:
        golden.mkdir(parents=True, exist_ok=True)
        for name in names:
            shutil.copyfile(out / name, golden / name)
    if not golden.is_dir():
        pytest.skip('no golden files for %s; run pytest --update-golden' % target)
    assert names == sorted(p.name for p in golden.glob('*.csv'))
    for name in names:
        assert (out / name).read_bytes() == (golden / name).read_bytes(), name


def test_validate(tmp_path, capsys):
    assert main(['validate', str(data_path('fourpillar.json'))]) == EXIT_OK
    assert 'status: pass' in capsys.readouterr().out
    box = {'type': 'box', 'center': [0, 0, 0], 'size': [10, 10, 10]}
    doc = {'d': 100, 'electrodes': [{'name': 'RF1', 'role': 'RF_PLUS', 'primitive': box},
                                    {'name': 'RF1', 'role': 'RF_MINUS', 'primitive': box}]}
    path = tmp_path / 'dupes.json'
    path.write_text(json.dumps(doc))
    assert main(['validate', str(path)]) == EXIT_CONFIG
    assert 'status: FAIL' in capsys.readouterr().out


def test_workers_must_be_positive(tmp_path):
    assert _run(_config(tmp_path), tmp_path / 'out', '--workers', '0') == EXIT_CONFIG
