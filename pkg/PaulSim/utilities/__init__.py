from .exceptions import *
from .units import parse_quantity, quantity_to_si
