from .geometry import build_geometry, load_geometry, validate_geometry
from .quadrupole import quadrupole_coefficients, rf_null
