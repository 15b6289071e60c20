"""3D versus surface trap tradeoffs at fixed RF amplitude"""

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from PaulSim.effective.pseudopotential import harmonicity_residual, pseudopotential_map, trap_depth
from PaulSim.fields.quadrupole import quadrupole_coefficients, rf_null
from PaulSim.mathieu.mathieu_core import MathieuParams, characteristic_exponent
from PaulSim.utilities.exceptions import DomainError
from PaulSim.utilities.logger import get_logger

logger = get_logger(__name__)

# power proxy defaults: 10 pF trap capacitance, 1 ohm series resistance
DEFAULT_CAPACITANCE = 10e-12
DEFAULT_RESISTANCE = 1.0


def power_estimate(u_tilde, omega_rf, capacitance=DEFAULT_CAPACITANCE,
                   resistance=DEFAULT_RESISTANCE):
    """
    Dissipation proxy P = 1/2 (U~ omega_rf C)^2 R_s in watts.

    Only meaningful as a ratio between designs at equal (omega, q) targets.
    """
    for name, value in (('u_tilde', u_tilde), ('omega_rf', omega_rf),
                        ('capacitance', capacitance), ('resistance', resistance)):
        if not np.all(np.isfinite(value)) or np.any(np.asarray(value) < 0):
            raise DomainError('%s must be non-negative, got %r' % (name, value))
    return 0.5 * (u_tilde * omega_rf * capacitance) ** 2 * resistance


def rf_efficiency(trap, center=None):
    """|A'| d^2 of the strongest RF axis under the trap's default polarity."""
    if center is None:
        center = rf_null(trap.basis, trap.polarity, trap.null_guess).position
    coeffs = quadrupole_coefficients(trap.basis, {}, trap.polarity, center)
    return coeffs.efficiency(trap.d), np.asarray(center)


def q_from_efficiency(efficiency, d, species, u_tilde, omega_rf):
    """|q| = 2 Z e U~ eta / (m omega_rf^2 d^2)."""
    return 2.0 * species.charge * u_tilde * efficiency / (species.mass * omega_rf ** 2 * d ** 2)


def u_tilde_for_q(q, efficiency, d, species, omega_rf):
    return abs(q) * species.mass * omega_rf ** 2 * d ** 2 / (2.0 * species.charge * efficiency)


def radial_frequency(q, omega_rf):
    """Floquet secular frequency (rad/s) for a = 0, NaN outside the first region."""
    res = characteristic_exponent(MathieuParams(0.0, float(q)))
    return res.beta * omega_rf / 2.0 if res.stable else float('nan')


def surface_vs_3d_power_ratio(eff_3d, eff_surf, d, species, omega_rf, q_target,
                              capacitance=DEFAULT_CAPACITANCE, resistance=DEFAULT_RESISTANCE):
    """
    P_surface / P_3D when both traps reach the same (omega, q) target with
    equal capacitance and series resistance.
    """
    u3 = u_tilde_for_q(q_target, eff_3d, d, species, omega_rf)
    us = u_tilde_for_q(q_target, eff_surf, d, species, omega_rf)
    p3 = power_estimate(u3, omega_rf, capacitance, resistance)
    ps = power_estimate(us, omega_rf, capacitance, resistance)
    return {'u_tilde_3d': u3, 'u_tilde_surf': us, 'power_3d': p3, 'power_surf': ps,
            'ratio': ps / p3}


@dataclass(frozen=True)
class TradeoffResult:
    curves: pd.DataFrame = field(repr=False)
    q_lines: pd.DataFrame = field(repr=False)
    points: pd.DataFrame = field(repr=False)
    efficiency_3d: float = 0.0
    efficiency_surf: float = 0.0
    ratios: dict = field(default_factory=dict)


def tradeoff_sweep(trap_3d, trap_surf, species, u_tilde, f_rf, f_point=80e6,
                   q_lines=(0.1, 0.3, 0.5, 0.7, 0.9), capacitance=DEFAULT_CAPACITANCE,
                   resistance=DEFAULT_RESISTANCE):
    """
    Secular frequency against drive frequency for a 3D and a surface trap.

    Parameters
    ----------
    trap_3d, trap_surf (TrapGeometry):
        Geometries analyzed at the same d.
    species (IonSpecies)
    u_tilde (float):
        Fixed RF amplitude, V.
    f_rf (array-like):
        Drive frequencies, Hz.
    f_point (float):
        Drive frequency of the viable surface operating point (Point 1), Hz.
    q_lines (sequence):
        q values of the constant-q reference lines.

    Returns
    -------
    TradeoffResult with frames
        curves:  omega_rf_MHz, omega_3d_MHz, omega_surf_MHz, q_3d, q_surf
        q_lines: q, omega_rf_MHz, omega_MHz
        points:  point, geometry, omega_rf_MHz, q, omega_MHz, u_tilde_V, power_W
    Unstable entries are NaN.
    """
    if not np.isclose(trap_3d.d, trap_surf.d):
        raise DomainError('tradeoff needs both geometries at the same d (%g m vs %g m)'
                          % (trap_3d.d, trap_surf.d))
    d = trap_3d.d
    eta_3d, _ = rf_efficiency(trap_3d)
    eta_s, _ = rf_efficiency(trap_surf)
    logger.info('efficiencies: 3D %.4f, surface %.4f', eta_3d, eta_s)

    omega_rf = 2 * np.pi * np.asarray(f_rf, dtype=float)
    q3 = q_from_efficiency(eta_3d, d, species, u_tilde, omega_rf)
    qs = q_from_efficiency(eta_s, d, species, u_tilde, omega_rf)
    w3 = [_safe_frequency(q, w) for q, w in zip(q3, omega_rf)]
    ws = [_safe_frequency(q, w) for q, w in zip(qs, omega_rf)]
    curves = pd.DataFrame({'omega_rf_MHz': omega_rf / (2 * np.pi * 1e6),
                           'omega_3d_MHz': np.asarray(w3) / (2 * np.pi * 1e6),
                           'omega_surf_MHz': np.asarray(ws) / (2 * np.pi * 1e6),
                           'q_3d': q3, 'q_surf': qs})

    rows = []
    for q in q_lines:
        beta = characteristic_exponent(MathieuParams(0.0, float(q))).beta
        for w in omega_rf:
            rows.append({'q': q, 'omega_rf_MHz': w / (2 * np.pi * 1e6),
                         'omega_MHz': beta * w / 2 / (2 * np.pi * 1e6)})
    lines = pd.DataFrame(rows, columns=['q', 'omega_rf_MHz', 'omega_MHz'])

    # Point 1: surface trap at f_point; Point 3: 3D trap at the same drive;
    # Point 2: 3D trap at Point 1's q, reached by raising the drive frequency.
    w1 = 2 * np.pi * f_point
    q1 = q_from_efficiency(eta_s, d, species, u_tilde, w1)
    q3_same = q_from_efficiency(eta_3d, d, species, u_tilde, w1)
    w2 = w1 * np.sqrt(eta_3d / eta_s)
    points = [
        ('1', 'surface', w1, q1, radial_frequency(q1, w1)),
        ('2', '3d', w2, q_from_efficiency(eta_3d, d, species, u_tilde, w2),
         radial_frequency(q1, w2)),
        ('3', '3d', w1, q3_same, radial_frequency(q3_same, w1)),
    ]
    point_rows = [{'point': p, 'geometry': g, 'omega_rf_MHz': w / (2 * np.pi * 1e6), 'q': q,
                   'omega_MHz': om / (2 * np.pi * 1e6), 'u_tilde_V': u_tilde,
                   'power_W': power_estimate(u_tilde, w, capacitance, resistance)}
                  for p, g, w, q, om in points]
    power = surface_vs_3d_power_ratio(eta_3d, eta_s, d, species, w1, q1, capacitance, resistance)
    ratios = {'same_drive': points[2][4] / points[0][4],
              'same_q': points[1][4] / points[0][4],
              'power_same_target': power['ratio']}
    return TradeoffResult(curves, lines, pd.DataFrame(point_rows), eta_3d, eta_s, ratios)


def _safe_frequency(q, omega_rf):
    if abs(q) >= 10:
        return float('nan')
    return radial_frequency(q, omega_rf)


@dataclass(frozen=True)
class TrapMetrics:
    depth: float
    harmonicity: float
    efficiency: float
    power: float

    def __post_init__(self):
        if self.depth < 0:
            raise DomainError('trap depth must be non-negative')


def trap_metrics(trap, drive, species, grid, window=None,
                 capacitance=DEFAULT_CAPACITANCE, resistance=DEFAULT_RESISTANCE):
    """Depth (eV), harmonic-fit residual, efficiency and power proxy (W) of one trap."""
    pmap = pseudopotential_map(trap.basis, drive, species, grid)
    efficiency, _ = rf_efficiency(trap)
    return TrapMetrics(depth=trap_depth(pmap),
                       harmonicity=harmonicity_residual(pmap, window),
                       efficiency=efficiency,
                       power=power_estimate(drive.u_tilde, drive.omega_rf, capacitance, resistance))
