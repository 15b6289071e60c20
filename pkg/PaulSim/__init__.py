__version__ = '0.1.0'

from .utilities import *
from .model import *
from .mathieu import *
from .fields import *
from .effective import *
from .dynamics import *
from .thermo import *
from .scripts import *
