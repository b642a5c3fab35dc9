"""
Tridiagonal linear algebra for the smoothing block.

The Thomas algorithm solves a tridiagonal system in O(n) without pivoting,
which is stable for the strictly diagonally dominant matrices assembled by
the smoothing block. A ring (cyclic) system is reduced to two tridiagonal
solves with the Sherman-Morrison correction.

The recurrences run on Python floats: for the sizes at hand this is faster
than looping over numpy scalars, and the evaluation order is fixed.
"""

import math

import numpy as np

from surfseg.errors import SolveFailure


def solve_tridiag(lower, diag, upper, rhs):
    """
    Solves A x = rhs where A has diagonal diag (length n), sub-diagonal
    lower and super-diagonal upper (length n - 1).
    """
    b = np.asarray(diag, dtype=np.float64).tolist()
    d = np.asarray(rhs, dtype=np.float64).tolist()
    a = np.asarray(lower, dtype=np.float64).tolist()
    c = np.asarray(upper, dtype=np.float64).tolist()
    n = len(b)

    if n == 0:
        return np.zeros(0)

    try:
        for k in range(1, n):
            m = a[k - 1] / b[k - 1]
            b[k] -= m * c[k - 1]
            d[k] -= m * d[k - 1]

        x = [0.0] * n
        x[n - 1] = d[n - 1] / b[n - 1]
        for k in range(n - 2, -1, -1):
            x[k] = (d[k] - c[k] * x[k + 1]) / b[k]
    except ZeroDivisionError:
        raise SolveFailure(
            "tridiagonal solve hit a zero pivot at row %d" % b.index(0.0)
        )

    pivots = np.array(b)
    bad = np.flatnonzero(~np.isfinite(pivots))
    if len(bad) > 0:
        raise SolveFailure(
            "tridiagonal solve hit pivot %r at row %d" % (b[bad[0]], bad[0])
        )

    return np.array(x)


def solve_symmetric(diag, off, rhs):
    return solve_tridiag(off, diag, off, rhs)


def solve_cyclic(diag, off, corner, rhs):
    """
    Solves the symmetric ring system where row 0 and row n - 1 are also
    coupled by corner. Needs n >= 3.
    """
    n = len(diag)
    if n < 3:
        raise SolveFailure("a cyclic system needs at least 3 unknowns")

    b = np.array(diag, dtype=np.float64)
    gamma = -b[0]
    b[0] = b[0] - gamma
    b[n - 1] = b[n - 1] - corner * corner / gamma

    y = solve_symmetric(b, off, rhs)

    u = np.zeros(n)
    u[0] = gamma
    u[n - 1] = corner
    z = solve_symmetric(b, off, u)

    denom = 1.0 + z[0] + corner * z[n - 1] / gamma
    if denom == 0.0 or not math.isfinite(denom):
        raise SolveFailure("cyclic correction is singular")

    factor = (y[0] + corner * y[n - 1] / gamma) / denom
    return y - factor * z


def ldl_pivots(diag, off):
    """
    Returns the pivots d_k of the LDL^T factorization of the symmetric
    tridiagonal matrix (diag, off). The matrix is positive definite iff all
    pivots are positive.
    """
    d = [float(diag[0])] if len(diag) > 0 else []
    for k in range(1, len(diag)):
        if d[k - 1] == 0.0:
            raise SolveFailure("LDL^T hit a zero pivot at row %d" % (k - 1))
        d.append(float(diag[k]) - float(off[k - 1]) ** 2 / d[k - 1])
    return np.array(d)


def matvec(diag, off, x, corner=0.0):
    """
    Returns A x for the symmetric (possibly cyclic) tridiagonal matrix.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(diag, dtype=np.float64) * x
    off = np.asarray(off, dtype=np.float64)
    if len(x) > 1:
        y[:-1] += off * x[1:]
        y[1:] += off * x[:-1]
    if corner != 0.0:
        y[0] += corner * x[-1]
        y[-1] += corner * x[0]
    return y
