"""
Scipy and scikit-learn wrappers
"""
import numpy as np
import scipy.linalg as la

from sklearn.linear_model import LinearRegression
from sklearn.preprocessing import PolynomialFeatures

from PaulSim.utilities.exceptions import SolverError


def quadratic_fit(X, y):
    """
    Least-squares quadratic model y ~ c + b.x + x.Q.x

    Parameters
    ----------
    X (numpy.ndarray):
        Sample coordinates. Shape: (n_samples, n_dims).
    y (numpy.ndarray):
        Sample values. Shape: (n_samples,).

    Returns
    -------
    fitted (numpy.ndarray):
        Model values at X.
    model (LinearRegression):
        The fitted regressor, on features from PolynomialFeatures(degree=2).
    """
    features = PolynomialFeatures(degree=2, include_bias=False).fit_transform(X)
    model = LinearRegression().fit(features, y)
    return model.predict(features), model


def power_law_fit(x, y):
    """
    Fit y = c * x**p in log-log space.

    Returns
    -------
    exponent (float), prefactor (float)
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError('power-law fit needs strictly positive data')
    model = LinearRegression().fit(np.log(x)[:, None], np.log(y))
    return float(model.coef_[0]), float(np.exp(model.intercept_))


def dense_solve(P, rhs, max_condition=1e12):
    """
    LU solve of P X = rhs with a 1-norm condition estimate.

    Parameters
    ----------
    P (numpy.ndarray):
        Square system matrix. Shape: (n, n).
    rhs (numpy.ndarray):
        Right-hand sides. Shape: (n,) or (n, k).
    max_condition (float):
        Systems whose condition estimate exceeds this raise SolverError.

    Returns
    -------
    X (numpy.ndarray), condition (float)
    """
    anorm = np.linalg.norm(P, 1)
    try:
        lu, piv = la.lu_factor(P, check_finite=True)
    except (ValueError, la.LinAlgError) as err:
        raise SolverError('BEM matrix factorization failed: %s' % err) from err
    rcond = _lu_rcond(lu, anorm)
    condition = np.inf if rcond == 0 else 1.0 / rcond
    if not np.isfinite(condition) or condition > max_condition:
        raise SolverError('BEM system is ill-conditioned (condition estimate %.3g)'
                          % condition, condition=condition)
    return la.lu_solve((lu, piv), rhs), condition


def _lu_rcond(lu, anorm):
    # LAPACK gecon on the LU factors
    gecon, = la.get_lapack_funcs(('gecon',), (lu,))
    rcond, info = gecon(lu, anorm, norm='1')
    if info != 0:
        return 0.0
    return float(rcond)


def blocked_iterative_solve(P, rhs, tol=1e-10, block=2048):
    """
    Block-Jacobi preconditioned GMRES for systems too large for a dense LU.
    Columns of `rhs` are solved one at a time.
    """
    from scipy.sparse.linalg import LinearOperator, gmres

    n = P.shape[0]
    blocks = [slice(i, min(i + block, n)) for i in range(0, n, block)]
    factors = [la.lu_factor(P[b, b]) for b in blocks]

    def precondition(v):
        out = np.empty_like(v)
        for b, f in zip(blocks, factors):
            out[b] = la.lu_solve(f, v[b])
        return out

    M = LinearOperator((n, n), matvec=precondition, dtype=float)
    rhs = np.atleast_2d(np.asarray(rhs, dtype=float).T).T
    X = np.empty_like(rhs)
    for j in range(rhs.shape[1]):
        X[:, j], info = gmres(P, rhs[:, j], M=M, atol=0.0, tol=tol, restart=200, maxiter=50)
        if info != 0:
            raise SolverError('GMRES did not converge (info=%d)' % info)
    return X
