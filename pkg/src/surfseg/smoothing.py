"""
The Smoothing Block (SB).

Given the Gaussian field (gamma, sigma) from D2C and the smoothness weight
w = w_comp, the surface energy is

    E(x) = sum_i (x_i - gamma_i)^2 / (2 sigma_i^2)
           + w * sum_{(i,j) in N} (x_i - x_j)^2

with N the pairs of adjacent columns. In the standard quadratic form
E(x) = 1/2 x^T H x - rhs^T x + const we have H = D + 2wL, where
D = diag(1/sigma_i^2) and L is the chain graph Laplacian, and rhs = D gamma.
H is strictly diagonally dominant with a positive diagonal (Gershgorin), so
E is convex and its global minimum x* = H^-1 rhs comes from one tridiagonal
solve.

backward() differentiates H x* = D gamma implicitly: with the adjoint
H y = dLoss/dx*, the gradients are y / sigma^2 for gamma,
2 y (x* - gamma) / sigma^3 for sigma and -2 y^T L x* for w.
"""

from dataclasses import dataclass

import numpy as np

from surfseg import tridiag
from surfseg.defaults import SB_RESIDUAL_TOLERANCE
from surfseg.errors import (
    LengthMismatch,
    NegativeWeight,
    SolveFailure,
)
from surfseg.grid import SurfaceTrace


@dataclass(frozen=True)
class SmoothSystem:
    """
    The tridiagonal Hessian bands of the surface energy and its linear term.
    When wrap is set, columns 0 and N1 - 1 are neighbors too and corner holds
    their coupling.
    """

    diag: np.ndarray
    off: np.ndarray
    rhs: np.ndarray
    w: float
    wrap: bool = False
    corner: float = 0.0
    gamma: np.ndarray = None
    precision: np.ndarray = None

    @property
    def n_cols(self):
        return len(self.diag)

    @property
    def cyclic(self):
        return self.wrap and self.n_cols >= 3


@dataclass(frozen=True)
class SmoothGradients:
    d_gamma: np.ndarray
    d_sigma: np.ndarray
    d_w: float


def _degrees(n, cyclic):
    if cyclic:
        return np.full(n, 2.0)
    degrees = np.full(n, 2.0)
    degrees[0] = degrees[-1] = 1.0
    if n == 1:
        degrees[0] = 0.0
    return degrees


def assemble(gf, w, wrap=False):
    """
    Builds the SmoothSystem H = D + 2wL, rhs = D gamma for the Gaussian
    field gf and the smoothness weight w >= 0. The ring closure only applies
    when there are at least 3 columns.
    """
    sigma = gf.sigma

    w = float(w)
    if not w >= 0 or not np.isfinite(w):
        raise NegativeWeight(w)

    n = gf.n_cols
    cyclic = wrap and n >= 3

    with np.errstate(over="ignore"):
        precision = 1.0 / (sigma * sigma)
    overflow = np.flatnonzero(~np.isfinite(precision))
    if len(overflow) > 0:
        i = int(overflow[0])
        raise SolveFailure(
            "precision of column %d overflows, sigma is %r" % (i, sigma[i])
        )

    return SmoothSystem(
        diag=precision + 2.0 * w * _degrees(n, cyclic),
        off=np.full(n - 1, -2.0 * w),
        rhs=precision * gf.gamma,
        w=w,
        wrap=wrap,
        corner=-2.0 * w if cyclic else 0.0,
        gamma=gf.gamma,
        precision=precision,
    )


def _check_lengths(gf, x):
    if gf.n_cols != len(x):
        raise LengthMismatch("surface", gf.n_cols, len(x))


def pairwise_differences(x, cyclic=False):
    x = np.asarray(x, dtype=np.float64)
    diff = np.diff(x)
    if cyclic:
        diff = np.append(diff, x[0] - x[-1])
    return diff


def energy(sys, gf, x):
    """
    Returns E(x) for surface x.
    """
    x = x.x if isinstance(x, SurfaceTrace) else np.asarray(x, dtype=float)
    _check_lengths(gf, x)

    unary = np.sum((x - gf.gamma) ** 2 / (2.0 * gf.sigma**2))
    pairwise = sys.w * np.sum(pairwise_differences(x, sys.cyclic) ** 2)
    return float(unary + pairwise)


def _solve_bands(sys, rhs):
    if sys.cyclic:
        x = tridiag.solve_cyclic(sys.diag, sys.off, sys.corner, rhs)
    else:
        x = tridiag.solve_symmetric(sys.diag, sys.off, rhs)

    # backward error check, scaled by |H| |x| so that it holds for large w
    residual = tridiag.matvec(sys.diag, sys.off, x, sys.corner) - rhs
    h_norm = np.max(np.abs(sys.diag)) + 2.0 * abs(sys.w) * 2.0
    scale = h_norm * np.max(np.abs(x)) + np.max(np.abs(rhs))
    if not np.all(np.isfinite(x)) or (
        np.max(np.abs(residual)) > SB_RESIDUAL_TOLERANCE * scale
    ):
        raise SolveFailure("smoothing solve residual is too large")

    return x


def solve(sys):
    """
    Returns the unique minimizer x* of the energy.

    Since L 1 = 0, x* = g0 + H^-1 D (gamma - g0) for any constant g0. The
    solve runs on the offsets from g0 = gamma[0], so that a constant field
    comes back exactly.
    """
    if sys.gamma is None:
        return SurfaceTrace(_solve_bands(sys, sys.rhs))

    gamma = np.asarray(sys.gamma, dtype=np.float64)
    if sys.w == 0.0:
        # H is diagonal, x* = gamma
        return SurfaceTrace(gamma.copy())

    g0 = gamma[0]
    offset = _solve_bands(sys, sys.precision * (gamma - g0))
    return SurfaceTrace(g0 + offset)


def laplacian_apply(x, cyclic=False):
    """
    Returns L x for the chain (or ring) graph Laplacian L.
    """
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    off = np.full(n - 1, -1.0)
    corner = -1.0 if cyclic else 0.0
    return tridiag.matvec(_degrees(n, cyclic), off, x, corner)


def backward(sys, gf, x_star, g_up):
    """
    Returns the SmoothGradients of a loss given g_up = dLoss/dx*.
    """
    x = x_star.x if isinstance(x_star, SurfaceTrace) else np.asarray(x_star)
    g_up = np.asarray(g_up, dtype=np.float64)
    _check_lengths(gf, x)
    _check_lengths(gf, g_up)

    if not np.any(g_up):
        n = gf.n_cols
        return SmoothGradients(np.zeros(n), np.zeros(n), 0.0)

    y = _solve_bands(sys, g_up)
    sigma = gf.sigma

    return SmoothGradients(
        d_gamma=y / sigma**2,
        d_sigma=2.0 * y * (x - gf.gamma) / sigma**3,
        d_w=float(-2.0 * np.dot(y, laplacian_apply(x, sys.cyclic))),
    )


def smooth(gf, w, wrap=False):
    """
    Assembles and solves in one call, returns (SurfaceTrace, SmoothSystem).
    """
    sys = assemble(gf, w, wrap)
    return solve(sys), sys


def total_variation(x):
    x = x.x if isinstance(x, SurfaceTrace) else np.asarray(x)
    return float(np.sum(np.abs(np.diff(x))))


def ldl_pivots(sys):
    """
    Returns the LDL^T pivots of the chain Hessian H.
    """
    return tridiag.ldl_pivots(sys.diag, sys.off)
