from .species import IonSpecies, species_lookup
from .drive import DriveConfig
