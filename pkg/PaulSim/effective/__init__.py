from .pseudopotential import Grid, pseudopotential_map, trap_depth, harmonicity_residual
from .modes import secular_modes, pseudopotential_frequencies
from .tradeoff import tradeoff_sweep, trap_metrics, power_estimate
