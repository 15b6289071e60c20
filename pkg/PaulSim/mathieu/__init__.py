from .mathieu_core import (MathieuParams, FloquetResult, characteristic_exponent,
                           lowest_order_beta, continued_fraction_beta, stability_diagram,
                           stability_boundary_q, split_pair_boundaries, secular_frequency)
