import numpy as np
import pytest

from PaulSim.fields.analytic import ideal_quadrupole_basis
from PaulSim.model.drive import DriveConfig
from PaulSim.model.species import species_lookup

D = 100e-6


@pytest.fixture
def ca40():
    return species_lookup('Ca40')


@pytest.fixture
def ideal_basis():
    return ideal_quadrupole_basis(D, kappa=1.0)


@pytest.fixture
def differential():
    return {'RF+': 1, 'RF-': -1}


@pytest.fixture
def drive(differential):
    """20 MHz, 10 V differential drive: |q| ~ 0.61 on the ideal basis with d = 100 um."""
    return DriveConfig(omega_rf=2 * np.pi * 20e6, u_tilde=10.0, polarity=differential)


def ideal_q(species, drive, d=D, kappa=1.0):
    """|q| of a differentially driven ideal quadrupole."""
    return 4.0 * species.charge * drive.u_tilde * kappa / (species.mass * drive.omega_rf ** 2 * d ** 2)


def pytest_addoption(parser):
    parser.addoption('--update-golden', action='store_true', default=False,
                     help='Rewrite tests/golden from the current reproduce output')


@pytest.fixture(scope='session')
def update_golden(request):
    return request.config.getoption('--update-golden')
