"""
The D2C block: converts each column of a discrete probability map into a
continuous Gaussian (gamma, sigma).

A Gaussian f(j) = A exp(-(j - gamma)^2 / (2 sigma^2)) has a quadratic
log-density ln f(j) = a + b j + c j^2, with gamma = -b / (2c) and
sigma = sqrt(-1 / (2c)). Each column is fitted by minimizing the weighted
error

    eps = sum_j f(j)^2 (ln f(j) - (a + b j + c j^2))^2

over the samples above a relative cutoff tau, which is a 3x3 linear system
(the weighted normal equations).

The polynomial is fitted in the coordinate u = (j - j0) / s, where j0 is the
column argmax and s a power of two covering the retained samples. That is the
same polynomial space, hence the same minimizer, with a much better
conditioned system for long columns. Results are reported in j coordinates.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from surfseg.defaults import (
    D2C_C_MIN,
    D2C_PIVOT_TOLERANCE,
    D2C_SIGMA_DEFAULT_REL,
    D2C_TAU,
)
from surfseg.errors import BadInputError, SingularNormalEquations
from surfseg.grid import GaussianField, validate_probmap

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LogQuadraticFit:
    """
    Coefficients of a + b j + c j^2 fitted to ln f(j).
    """

    a: float
    b: float
    c: float

    def residual(self, f, tau=D2C_TAU):
        """
        Returns the weighted error eps of these coefficients on column f,
        over the samples retained by the tau cutoff.
        """
        f = np.asarray(f, dtype=np.float64)
        idx = np.flatnonzero(_retained(f, tau))
        j = idx.astype(np.float64)
        fj = f[idx]
        r = np.log(fj) - (self.a + self.b * j + self.c * j * j)
        return math.fsum(fj * fj * r * r)


@dataclass(frozen=True)
class FitReport:
    gamma: float
    sigma: float
    fallback_used: bool
    weighted_residual: float
    coefficients: LogQuadraticFit = None


@dataclass(frozen=True)
class ColumnCache:
    """
    What backward_column() needs from a successful fit.
    """

    idx: np.ndarray
    u: np.ndarray
    f: np.ndarray
    r: np.ndarray
    moments: tuple
    b: float
    c: float
    s: float
    sigma: float
    clamped: bool


@dataclass(frozen=True)
class FieldCache:
    n_rows: int
    normalized: np.ndarray
    ranges: np.ndarray
    argmin: np.ndarray
    argmax: np.ndarray
    columns: tuple


def solve3(m, v, tolerance=D2C_PIVOT_TOLERANCE):
    """
    Solves the 3x3 system m x = v by Gaussian elimination with partial
    pivoting. A pivot smaller than tolerance times the largest entry of m
    raises SingularNormalEquations.
    """
    a = [[float(m[i][k]) for k in range(3)] + [float(v[i])] for i in range(3)]
    scale = max(abs(a[i][k]) for i in range(3) for k in range(3))

    if not scale > 0 or not math.isfinite(scale):
        raise SingularNormalEquations("normal equations matrix is zero")

    for k in range(3):
        p = max(range(k, 3), key=lambda i: abs(a[i][k]))
        if abs(a[p][k]) <= tolerance * scale:
            raise SingularNormalEquations(
                "pivot %d is %g, below tolerance" % (k, a[p][k])
            )
        a[k], a[p] = a[p], a[k]

        for i in range(k + 1, 3):
            factor = a[i][k] / a[k][k]
            for col in range(k, 4):
                a[i][col] -= factor * a[k][col]

    x = [0.0, 0.0, 0.0]
    for i in range(2, -1, -1):
        acc = a[i][3]
        for col in range(i + 1, 3):
            acc -= a[i][col] * x[col]
        x[i] = acc / a[i][i]

    return x


def _retained(f, tau):
    fmax = f.max()
    return (f >= tau * fmax) & (f > 0)


def _moment_matrix(w, u):
    s = [math.fsum(w * u**k) for k in range(5)]
    return ((s[0], s[1], s[2]), (s[1], s[2], s[3]), (s[2], s[3], s[4]))


def _fallback(f, sigma_default, residual=0.0):
    return FitReport(
        gamma=float(np.argmax(f)),
        sigma=float(sigma_default),
        fallback_used=True,
        weighted_residual=residual,
    )


def _fit(f, tau, sigma_default):
    """
    Fits one column, returns (FitReport, ColumnCache or None).
    """
    f = np.asarray(f, dtype=np.float64)
    n = len(f)

    if not 0 < tau < 1:
        raise BadInputError("tau must be in (0, 1), got %r" % tau)

    if sigma_default is None:
        sigma_default = D2C_SIGMA_DEFAULT_REL * n

    if n == 0 or not f.max() > 0:
        return _fallback(f, sigma_default), None

    idx = np.flatnonzero(_retained(f, tau))
    if len(idx) < 3:
        return _fallback(f, sigma_default), None

    j0 = int(np.argmax(f))
    span = int(np.max(np.abs(idx - j0)))
    s = 2.0 ** math.ceil(math.log2(span))

    u = (idx - j0) / s
    fr = f[idx]
    w = fr * fr
    y = np.log(fr)

    moments = _moment_matrix(w, u)
    rhs = [math.fsum(w * u**k * y) for k in range(3)]

    try:
        a_u, b_u, c_u = solve3(moments, rhs)
    except SingularNormalEquations as e:
        log.debug("column fit falls back: %s", e)
        return _fallback(f, sigma_default), None

    r = y - (a_u + b_u * u + c_u * u * u)
    eps = math.fsum(w * r * r)

    c = c_u / (s * s)
    if c >= -D2C_C_MIN:
        return _fallback(f, sigma_default, eps), None

    gamma = j0 - s * b_u / (2.0 * c_u)
    sigma = s * math.sqrt(-1.0 / (2.0 * c_u))

    clamped = False
    if gamma < -0.5 or gamma > n - 0.5:
        gamma = min(max(gamma, -0.5), n - 0.5)
        clamped = True

    coefficients = LogQuadraticFit(
        a=a_u - b_u * j0 / s + c_u * j0 * j0 / (s * s),
        b=b_u / s - 2.0 * c_u * j0 / (s * s),
        c=c,
    )
    report = FitReport(
        gamma=float(gamma),
        sigma=float(sigma),
        fallback_used=False,
        weighted_residual=eps,
        coefficients=coefficients,
    )
    cache = ColumnCache(
        idx=idx,
        u=u,
        f=fr,
        r=r,
        moments=moments,
        b=b_u,
        c=c_u,
        s=s,
        sigma=float(sigma),
        clamped=clamped,
    )
    return report, cache


def fit_column(f, tau=D2C_TAU, sigma_default=None):
    """
    Fits a Gaussian to one column of a normalized probability map. When the
    fit is not a Gaussian (c >= -c_min), when fewer than 3 samples are above
    the cutoff, or when the normal equations are singular, the column falls
    back to gamma = argmax and sigma = sigma_default (0.1 * N2 by default).
    """
    report, _ = _fit(f, tau, sigma_default)
    return report


def backward_column(cache, d_gamma, d_sigma):
    """
    Returns dLoss/df on the column samples given dLoss/dgamma and
    dLoss/dsigma. Fallback columns (cache is None) have a zero gradient.
    """
    if cache is None:
        return None

    if cache.clamped:
        d_gamma = 0.0

    s, b, c = cache.s, cache.b, cache.c

    # gradient on the u-coordinate coefficients (a, b, c)
    g = (
        0.0,
        d_gamma * (-s / (2.0 * c)),
        d_gamma * s * b / (2.0 * c * c) + d_sigma * cache.sigma**3 / (s * s),
    )
    z = solve3(cache.moments, g)

    u = cache.u
    return cache.f * (2.0 * cache.r + 1.0) * (z[0] + z[1] * u + z[2] * u * u)


def _normalize_columns(data):
    lo = data.min(axis=0)
    hi = data.max(axis=0)
    ranges = hi - lo
    constant = ranges == 0
    safe = np.where(constant, 1.0, ranges)
    return (data - lo) / safe, ranges, constant


def fit_field(p, tau=D2C_TAU, with_cache=False):
    """
    Applies the per-column normalization then fit_column() to every column
    of probability map p. Returns (GaussianField, [FitReport]), plus a
    FieldCache for backward_field() when with_cache is True.

    A column that is constant, hence can't be normalized, uses the fallback
    values instead of aborting the whole field.
    """
    validate_probmap(p)

    data = p.data
    n_rows = p.n_rows
    normalized, ranges, constant = _normalize_columns(data)
    sigma_default = D2C_SIGMA_DEFAULT_REL * n_rows

    reports = []
    caches = []
    for i in range(p.n_cols):
        if constant[i]:
            report, cache = _fallback(data[:, i], sigma_default), None
        else:
            report, cache = _fit(normalized[:, i], tau, sigma_default)
        reports.append(report)
        caches.append(cache)

    fallbacks = sum(1 for r in reports if r.fallback_used)
    if fallbacks > 0:
        log.debug(
            "D2C used the fallback on %d of %d columns", fallbacks, p.n_cols
        )

    gf = GaussianField(
        [r.gamma for r in reports], [r.sigma for r in reports]
    )

    if not with_cache:
        return gf, reports

    cache = FieldCache(
        n_rows=n_rows,
        normalized=normalized,
        ranges=ranges,
        argmin=np.argmin(data, axis=0),
        argmax=np.argmax(data, axis=0),
        columns=tuple(caches),
    )
    return gf, reports, cache


def backward_field(cache, d_gamma, d_sigma):
    """
    Returns dLoss/dP, an N2 x N1 array, from the per-column gradients on
    gamma and sigma, through the fit and the per-column normalization.
    """
    n_cols = len(cache.columns)
    grad = np.zeros((cache.n_rows, n_cols))

    for i in range(n_cols):
        col = cache.columns[i]
        g_idx = backward_column(col, float(d_gamma[i]), float(d_sigma[i]))
        if g_idx is None:
            continue

        g_f = np.zeros(cache.n_rows)
        g_f[col.idx] = g_idx

        f = cache.normalized[:, i]
        R = cache.ranges[i]

        g_p = g_f / R
        g_p[cache.argmin[i]] += math.fsum(g_f * (f - 1.0)) / R
        g_p[cache.argmax[i]] -= math.fsum(g_f * f) / R
        grad[:, i] = g_p

    return grad

