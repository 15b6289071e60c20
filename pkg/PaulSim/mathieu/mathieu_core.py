"""Floquet solution of the Mathieu equation x'' + (a - 2q cos 2xi) x = 0"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from PaulSim.utilities.exceptions import DomainError, NumericalError, StabilityError
from PaulSim.utilities.logger import get_logger

logger = get_logger(__name__)

XI_CONVENTION = 'xi = omega_rf * t / 2'
# first stability region search
Q_BRACKET = (0.0, 1.2)
Q_SEARCH_MAX = 2.0


@dataclass(frozen=True)
class MathieuParams:
    """Dimensionless (a, q). q is kept signed; stability only depends on |q|."""
    a: float
    q: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.q)):
            raise DomainError('Mathieu parameters must be finite, got a=%r, q=%r' % (self.a, self.q))
        if abs(self.a) >= 10 or abs(self.q) >= 10:
            raise DomainError('Mathieu parameters outside sanity bounds |a|, |q| < 10: a=%r, q=%r'
                              % (self.a, self.q))


@dataclass(frozen=True)
class FloquetResult:
    params: MathieuParams
    monodromy: np.ndarray = field(repr=False)
    monodromy_trace: float
    stable: bool
    beta: float
    time_convention: str = XI_CONVENTION


def _as_params(p):
    if isinstance(p, MathieuParams):
        return p
    a, q = p
    return MathieuParams(float(a), float(q))


def _mathieu_rhs(a, q):
    def rhs(xi, y):
        k = a - 2.0 * q * np.cos(2.0 * xi)
        return np.array([y[1], -k * y[0], y[3], -k * y[2]])
    return rhs


###############################################################################
# Exact exponent

def characteristic_exponent(p, tolerance=1e-10):
    """
    Characteristic exponent from the monodromy matrix over one period in xi.

    Parameters
    ----------
    p (MathieuParams or (a, q)):
        Mathieu parameters.
    tolerance (float):
        Target relative error, in [1e-12, 1e-3].

    Returns
    -------
    FloquetResult. beta is NaN when the motion is unstable.
    """
    p = _as_params(p)
    if not 1e-12 <= tolerance <= 1e-3:
        raise DomainError('tolerance must lie in [1e-12, 1e-3], got %r' % tolerance)

    # the two fundamental solutions are integrated side by side
    y0 = np.array([1.0, 0.0, 0.0, 1.0])
    sol = solve_ivp(_mathieu_rhs(p.a, p.q), (0.0, np.pi), y0, method='DOP853',
                    rtol=tolerance * 0.1, atol=tolerance * 1e-2)
    if not sol.success:
        raise NumericalError('Mathieu integration failed: %s' % sol.message,
                             diagnostics={'a': p.a, 'q': p.q, 'nfev': sol.nfev,
                                          'status': sol.status})
    y = sol.y[:, -1]
    M = np.array([[y[0], y[2]], [y[1], y[3]]])
    trace = float(M[0, 0] + M[1, 1])
    stable = abs(trace) < 2.0
    beta = float(np.arccos(trace / 2.0) / np.pi) if stable else float('nan')
    return FloquetResult(params=p, monodromy=M, monodromy_trace=trace, stable=stable, beta=beta)


def lowest_order_beta(p):
    """beta ~ sqrt(a + q^2/2)"""
    p = _as_params(p)
    radicand = p.a + p.q ** 2 / 2.0
    if radicand < 0:
        raise DomainError('a + q^2/2 = %g < 0: unstable in lowest order' % radicand)
    return float(np.sqrt(radicand))


def continued_fraction_beta(p, depth=24):
    """
    beta from the continued-fraction form of the Hill determinant,
    beta^2 = a + q^2/((beta+2)^2 - a - q^2/((beta+4)^2 - a - ...))
               + q^2/((beta-2)^2 - a - q^2/((beta-4)^2 - a - ...)),
    solved for beta in the first stability region.
    """
    p = _as_params(p)
    a, q2 = p.a, p.q ** 2

    def fraction(beta, sign):
        tail = 0.0
        for k in range(depth, 0, -1):
            tail = q2 / ((beta + sign * 2 * k) ** 2 - a - tail)
        return tail

    def residual(beta):
        return a + fraction(beta, 1) + fraction(beta, -1) - beta ** 2

    lo, hi = 1e-9, 1.0 - 1e-9
    if residual(lo) * residual(hi) > 0:
        raise DomainError('no first-region root of the continued fraction for a=%g, q=%g'
                          % (p.a, p.q))
    return float(brentq(residual, lo, hi, xtol=1e-14, rtol=1e-14))


def courant_snyder_invariant(result, x, v):
    """
    Quadratic form of (x, dx/dxi) conserved by the one-period map.

    Samples taken once per RF period at a fixed phase keep this value
    constant for exact integration.
    """
    M = result.monodromy
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    return -M[1, 0] * x ** 2 + (M[0, 0] - M[1, 1]) * x * v + M[0, 1] * v ** 2


###############################################################################
# Vectorized traces for scans

def monodromy_batch(a, q, steps=400):
    """
    Monodromy matrices for many (a, q) at once by fixed-step RK4.

    Used for coarse scans only; characteristic_exponent is the accurate path.

    Returns
    -------
    M (numpy.ndarray): Shape (n, 2, 2).
    """
    a, q = np.broadcast_arrays(np.atleast_1d(np.asarray(a, dtype=float)),
                               np.atleast_1d(np.asarray(q, dtype=float)))
    n = a.size
    y = np.zeros((n, 4))
    y[:, 0] = 1.0
    y[:, 3] = 1.0
    h = np.pi / steps

    def f(xi, y):
        k = (a - 2.0 * q * np.cos(2.0 * xi))
        return np.stack([y[:, 1], -k * y[:, 0], y[:, 3], -k * y[:, 2]], axis=1)

    xi = 0.0
    for _ in range(steps):
        k1 = f(xi, y)
        k2 = f(xi + h / 2, y + h / 2 * k1)
        k3 = f(xi + h / 2, y + h / 2 * k2)
        k4 = f(xi + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        xi += h
    return np.stack([np.stack([y[:, 0], y[:, 2]], axis=1),
                     np.stack([y[:, 1], y[:, 3]], axis=1)], axis=1)


def stability_diagram(a_values, q_values, steps=400):
    """Boolean grid stable[i, j] for (a_values[i], q_values[j])."""
    A, Q = np.meshgrid(np.asarray(a_values, float), np.asarray(q_values, float), indexing='ij')
    M = monodromy_batch(A.ravel(), Q.ravel(), steps=steps)
    trace = M[:, 0, 0] + M[:, 1, 1]
    return (np.abs(trace) < 2.0).reshape(A.shape)


###############################################################################
# Boundaries and frequencies

def _is_stable(a, q):
    return characteristic_exponent(MathieuParams(a, q), tolerance=1e-11).stable


def stability_boundary_q(a, tol=1e-4):
    """
    Upper q boundary of the first stability region at fixed a.

    The bracket is located on a coarse RK4 scan starting from (0, 1.2),
    extended to q=2 if needed, and refined by bisection on the exact
    monodromy trace.

    Parameters
    ----------
    a (float):
        Static parameter, |a| < 1.
    tol (float):
        Absolute tolerance on q.

    Returns
    -------
    q_max (float)
    """
    a = float(a)
    if not np.isfinite(a) or abs(a) >= 1:
        raise DomainError('stability_boundary_q needs |a| < 1, got %r' % a)

    step = 0.01
    grid = np.arange(Q_BRACKET[0], Q_SEARCH_MAX + step / 2, step)
    M = monodromy_batch(a, grid)
    stable = np.abs(M[:, 0, 0] + M[:, 1, 1]) < 2.0
    if not stable.any():
        raise DomainError('no stable q in (0, %g) for a=%g' % (Q_SEARCH_MAX, a))
    first = int(np.argmax(stable))
    # end of the first contiguous stable run
    run_end = first
    while run_end + 1 < grid.size and stable[run_end + 1]:
        run_end += 1
    if run_end + 1 >= grid.size:
        raise DomainError('no stability boundary found in (0, %g) for a=%g' % (Q_SEARCH_MAX, a))

    lo, hi = grid[run_end], grid[run_end + 1]
    # the coarse scan may be off by a hair at the edges
    while not _is_stable(a, lo) and lo > grid[first]:
        lo -= step
    while _is_stable(a, hi) and hi < Q_SEARCH_MAX:
        hi += step
    while hi - lo > tol / 10:
        mid = 0.5 * (lo + hi)
        if _is_stable(a, mid):
            lo = mid
        else:
            hi = mid
    q_max = 0.5 * (lo + hi)
    logger.debug('first-region boundary at a=%g: q_max=%.6f', a, q_max)
    return q_max


def split_pair_boundaries(alpha, tol=1e-4):
    """
    Boundaries for a DC-split axis pair with a = +alpha and a = -alpha.

    'relevant' is the boundary of the a = -|alpha| axis, the one that
    remains confined to the highest q.
    """
    alpha = abs(float(alpha))
    plus = stability_boundary_q(alpha, tol=tol)
    minus = stability_boundary_q(-alpha, tol=tol)
    return {'plus': plus, 'minus': minus, 'relevant': minus}


def secular_frequency(p, omega_rf):
    """Secular angular frequency beta * omega_rf / 2."""
    res = p if isinstance(p, FloquetResult) else characteristic_exponent(p)
    if not res.stable:
        raise StabilityError('unstable Mathieu parameters a=%g, q=%g'
                             % (res.params.a, res.params.q),
                             params=[(res.params.a, res.params.q)])
    return res.beta * omega_rf / 2.0


def params_from_coefficients(species, drive, A, A_prime):
    """
    Mathieu parameters from trap curvatures.

    a = 4 Z|e| U A / (m omega_rf^2), q = -2 Z|e| U~ A' / (m omega_rf^2)

    Parameters
    ----------
    species (IonSpecies)
    drive (DriveConfig)
    A (float):
        Static curvature per volt of drive.u_dc, 1/m^2.
    A_prime (float):
        RF curvature per volt of drive.u_tilde, 1/m^2.
    """
    scale = species.charge / (species.mass * drive.omega_rf ** 2)
    a = 4.0 * scale * drive.u_dc * A
    q = -2.0 * scale * drive.u_tilde * A_prime
    return MathieuParams(float(a), float(q))
