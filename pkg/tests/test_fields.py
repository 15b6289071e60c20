import json

import numpy as np
import pytest

from PaulSim.fields.analytic import (five_wire_layout, ideal_quadrupole_basis,
                                     planar_patch_basis)
from PaulSim.fields.geometry import (BUILTINS, build_geometry, load_geometry, parse_geometry,
                                     validate_geometry)
from PaulSim.fields.quadrupole import laplacian_residual, quadrupole_coefficients, rf_null
from PaulSim.utilities import config_io
from PaulSim.utilities.exceptions import ConfigError, DomainError
from PaulSim.utilities.utils import check_rng, data_path, rotation_matrix

from conftest import D


def test_ideal_coefficients(differential):
    kappa = 0.75
    basis = ideal_quadrupole_basis(D, kappa=kappa)
    coeffs = quadrupole_coefficients(basis, {}, differential)
    assert coeffs.A_prime == pytest.approx(2 * kappa / D ** 2, rel=1e-6)
    assert coeffs.B_prime == pytest.approx(-2 * kappa / D ** 2, rel=1e-6)
    assert abs(coeffs.C_prime) < 1e-6 * coeffs.A_prime
    assert coeffs.efficiency(D) == pytest.approx(2 * kappa, rel=1e-6)
    np.testing.assert_allclose(np.abs(coeffs.axes), np.eye(3), atol=1e-9)
    assert coeffs.trace_residual < 1e-6


def test_single_ended_curvature(ideal_basis):
    coeffs = quadrupole_coefficients(ideal_basis, {'DCQ': 1.0}, {'RF+': 1})
    assert coeffs.A_prime == pytest.approx(1 / D ** 2, rel=1e-6)
    assert coeffs.A == pytest.approx(1 / D ** 2, rel=1e-6)


def test_endcaps_confine_axially():
    basis = ideal_quadrupole_basis(D, kappa=1.0, endcap_kappa=0.2)
    coeffs = quadrupole_coefficients(basis, {'EC': 1.0}, {'RF+': 1, 'RF-': -1})
    assert coeffs.C == pytest.approx(2 * 0.2 / D ** 2, rel=1e-6)
    assert coeffs.static.sum() == pytest.approx(0.0, abs=1e-6 / D ** 2)


def test_ideal_basis_is_harmonic(ideal_basis):
    rng = check_rng(3)
    points = rng.uniform(-0.5 * D, 0.5 * D, size=(5, 3))
    assert laplacian_residual(ideal_basis, points).max() < 1e-6


def test_kappa_domain():
    with pytest.raises(DomainError):
        ideal_quadrupole_basis(D, kappa=1.5)


def test_rotated_basis_moves_frame(ideal_basis, differential):
    R = rotation_matrix([0, 0, 1], np.pi / 6)
    coeffs = quadrupole_coefficients(ideal_basis.rotated(R), {}, differential)
    assert coeffs.A_prime == pytest.approx(2 / D ** 2, rel=1e-6)
    assert abs(coeffs.axes[0] @ R[:, 0]) == pytest.approx(1.0, abs=1e-6)


def test_uniform_term_shifts_null(ideal_basis, differential):
    basis = ideal_basis.with_uniform_term('stray', [1.0, 0.0, 0.0])
    assert basis.names[-1] == 'stray'
    E = basis.field([0.0, 0.0, 0.0], {'stray': 1.0})
    np.testing.assert_allclose(E, [[1.0, 0.0, 0.0]])


def test_gapless_patch_potential():
    basis = planar_patch_basis({'P': [(-1e3, 1e3, -1e3, 1e3)]}, 1.0)
    assert basis.potentials([0.0, 0.0, 1.0])[0, 0] == pytest.approx(1.0, abs=2e-3)
    with pytest.raises(DomainError):
        basis.potentials([0.0, 0.0, 0.0])


def test_gapless_field_is_potential_gradient():
    electrodes, _ = five_wire_layout(1.0)
    basis = planar_patch_basis(electrodes, 1.0)
    r = np.array([0.3, 0.2, 1.1])
    h = 1e-5
    grad = np.array([(basis.potentials(r + h * e) - basis.potentials(r - h * e))[0] / (2 * h)
                     for e in np.eye(3)])
    E = basis.fields(r)[0]
    np.testing.assert_allclose(E, -grad.T, atol=1e-6 * np.abs(E).max())


def test_five_wire_null_and_efficiency():
    trap = build_geometry('surface5wire', d=D)
    null = rf_null(trap.basis, trap.polarity, trap.null_guess)
    assert null.position[2] == pytest.approx(D, rel=0.01)
    assert abs(null.position[0]) < 1e-3 * D
    coeffs = quadrupole_coefficients(trap.basis, {}, trap.polarity, null.position)
    assert coeffs.efficiency(D) == pytest.approx(1 / np.pi, rel=0.01)


def test_fourpillar_refinement_convergence():
    curvature = []
    for target in (1000, 2000):
        trap = build_geometry('fourpillar', mesh_refinement=target)
        null = rf_null(trap.basis, trap.polarity, trap.null_guess)
        coeffs = quadrupole_coefficients(trap.basis, {}, trap.polarity, null.position)
        curvature.append(np.abs(coeffs.rf).max())
    assert curvature[1] == pytest.approx(curvature[0], rel=0.02)


def test_builtins_resolve():
    assert set(BUILTINS) == {'ideal3d', 'surface5wire', 'fourpillar'}
    trap = build_geometry('ideal3d', d=D, kappa=0.5)
    assert trap.polarity == {'RF+': 1, 'RF-': -1}
    assert trap.dims['kappa'] == 0.5
    with pytest.raises(ConfigError):
        build_geometry('no_such_trap.json')


###############################################################################
# Geometry files

def _write(tmp_path, doc, name='trap.json'):
    path = tmp_path / name
    path.write_text(json.dumps(doc, indent=2))
    return path


def _box(name, role, x):
    return {'name': name, 'role': role,
            'primitive': {'type': 'box', 'center': [x, 0, 0], 'size': [10, 10, 10]}}


def test_bundled_fourpillar_validates():
    diag = validate_geometry(data_path('fourpillar.json'))
    assert diag.ok, diag.errors
    assert diag.roles['RF_PLUS'] == 2 and diag.roles['RF_MINUS'] == 2
    assert diag.n_panels > 0
    assert any(line.startswith('status: pass') for line in diag.lines())


def test_zero_area_panel_named(tmp_path):
    doc = {'d': 100, 'electrodes': [
        _box('RF1', 'RF_PLUS', 0),
        {'name': 'FLAT', 'role': 'DC', 'panels': [[[0, 0, 0], [1, 0, 0], [2, 0, 0]]]}]}
    diag = validate_geometry(_write(tmp_path, doc))
    assert not diag.ok
    assert "electrode 'FLAT' panel 0 has zero area" in diag.errors[0]


def test_duplicate_names_rejected(tmp_path):
    doc = {'d': 100, 'electrodes': [_box('RF1', 'RF_PLUS', 0), _box('RF1', 'RF_MINUS', 50)]}
    diag = validate_geometry(_write(tmp_path, doc))
    assert not diag.ok
    assert "duplicate electrode name 'RF1'" in diag.errors[0]


def test_missing_rf_electrode(tmp_path):
    doc = {'d': 100, 'electrodes': [_box('DC1', 'DC', 0)]}
    with pytest.raises(ConfigError, match='no RF electrode'):
        load_geometry(_write(tmp_path, doc))


def test_schema_errors_carry_lines():
    text = '{\n  "d": 100,\n  "electrodes": [\n    {"name": "RF1", "role": "RF_UP",\n' \
           '     "primitive": {"type": "box", "center": [0, 0, 0], "size": [1, 1, 1]}}\n  ]\n}'
    with pytest.raises(ConfigError) as info:
        parse_geometry(config_io.loads(text))
    assert info.value.line == 4


def test_length_unit_and_dc_indices():
    doc = {'length_unit': 'mm', 'd': 0.1, 'electrodes': [
        _box('RF1', 'RF_PLUS', 0), _box('A', 'DC', 30), _box('B', 'DC', 60)]}
    system = parse_geometry(doc)
    assert system.d == pytest.approx(1e-4)
    assert [e.index for e in system.electrodes] == [None, 1, 2]
    assert system.electrodes[0].primitives[0].size == pytest.approx((0.01, 0.01, 0.01))
    assert system.default_polarity() == {'RF1': 1}
