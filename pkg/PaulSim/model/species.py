"""Ion species"""

import numbers
from dataclasses import dataclass

import numpy as np
from scipy import constants

from PaulSim.utilities.exceptions import SpeciesLookupError, DomainError
from PaulSim.utilities.units import AMU

ELEMENTARY_CHARGE = constants.e

# Atomic masses (AME, in amu) of the neutral atoms; Z=1 is the default charge.
SPECIES = {
    'Be9': 9.0121831,
    'Mg24': 23.985041697,
    'Ca40': 39.962590863,
    'Ca43': 42.958766430,
    'Sr88': 87.905612253,
    'Yb171': 170.936331515,
    'Ba138': 137.905247,
}


@dataclass(frozen=True)
class IonSpecies:
    """A trapped particle of mass `mass` (kg) and charge `charge_number` * e."""
    name: str
    mass: float
    charge_number: int = 1

    def __post_init__(self):
        if not np.isfinite(self.mass) or self.mass <= 0:
            raise DomainError('species mass must be positive, got %r' % self.mass)
        if int(self.charge_number) != self.charge_number or self.charge_number == 0:
            raise DomainError('charge number must be a non-zero integer, got %r'
                              % self.charge_number)

    @property
    def charge(self):
        """Charge in coulomb."""
        return self.charge_number * ELEMENTARY_CHARGE

    @property
    def mass_amu(self):
        return self.mass / AMU


def species_lookup(name, charge=None):
    """
    Build an IonSpecies from the built-in table or from an explicit pair.

    Parameters
    ----------
    name (str or tuple):
        A key of SPECIES, or an explicit (mass_amu, Z) pair.
    charge (int):
        Charge number overriding the default Z=1 of table entries.

    Returns
    -------
    IonSpecies with SI mass.
    """
    if isinstance(name, (tuple, list)):
        if len(name) != 2:
            raise SpeciesLookupError('explicit species must be a (mass_amu, Z) pair, got %r' % (name,))
        mass_amu, z = name
        if not isinstance(z, numbers.Integral):
            raise SpeciesLookupError('charge number must be an integer, got %r' % (z,))
        z = z if charge is None else charge
        return IonSpecies(name='custom(%g amu)' % mass_amu, mass=float(mass_amu) * AMU,
                          charge_number=int(z))
    try:
        mass_amu = SPECIES[name]
    except (KeyError, TypeError):
        raise SpeciesLookupError('unknown species %r; known species: %s'
                                 % (name, ', '.join(sorted(SPECIES)))) from None
    return IonSpecies(name=name, mass=mass_amu * AMU,
                      charge_number=1 if charge is None else int(charge))
