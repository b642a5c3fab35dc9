"""
Training targets and losses.

Pretraining compares the predictor column distributions P to Gaussian
relaxed targets T (a discretized Gaussian around the ground truth instead of
a one-hot label) with the Kullback-Leibler divergence. Fine-tuning compares
the smoothed surface to the ground truth with the squared position error.
"""

from dataclasses import dataclass

import numpy as np

from surfseg.defaults import KLD_EPS_P, KLD_SUM_TOLERANCE, SIGMA_REL
from surfseg.errors import (
    BadInputError,
    LengthMismatch,
    NotADistribution,
    TruthOutOfRange,
)
from surfseg.grid import Grid2, Kind, SurfaceTrace, probmap


@dataclass(frozen=True)
class GaussianTargets:
    t_map: Grid2
    sigma_rel: float


def discretized_gaussians(centers, sigmas, n_rows):
    """
    Returns an n_rows x len(centers) array whose column i is the Gaussian
    density of mean centers[i] and std sigmas[i] sampled at rows 0..N2-1,
    normalized to sum 1. Mass falling outside the rows is dropped. The
    computation runs in log space so that a tiny sigma gives a one-hot
    column rather than an all-zero one.
    """
    centers = np.asarray(centers, dtype=np.float64)
    sigmas = np.asarray(sigmas, dtype=np.float64)
    sigmas = np.broadcast_to(sigmas, centers.shape)
    j = np.arange(n_rows, dtype=np.float64)[:, None]

    logd = -((j - centers) ** 2) / (2.0 * sigmas**2)
    logd -= logd.max(axis=0)
    d = np.exp(logd)
    return d / d.sum(axis=0)


def check_truth(truth, n_rows):
    x = truth.x
    out = np.flatnonzero((x < 0) | (x > n_rows - 1))
    if len(out) > 0:
        i = int(out[0])
        raise TruthOutOfRange(i, float(x[i]), n_rows)


def make_targets(truth, n_rows, sigma_rel=SIGMA_REL):
    """
    Builds the Gaussian relaxed targets of std sigma_rel * n_rows centered
    on the ground truth surface.
    """
    if not sigma_rel > 0:
        raise BadInputError("sigma_rel must be positive, got %r" % sigma_rel)

    check_truth(truth, n_rows)
    sigma = sigma_rel * n_rows
    t_map = probmap(discretized_gaussians(truth.x, sigma, n_rows))

    return GaussianTargets(t_map=t_map, sigma_rel=sigma_rel)


def _check_distribution(p):
    if p.kind != Kind.ProbMap:
        raise BadInputError("expected a probability map, got an image")

    totals = p.data.sum(axis=0)
    bad = np.flatnonzero(np.abs(totals - 1.0) > KLD_SUM_TOLERANCE)
    if len(bad) > 0:
        i = int(bad[0])
        raise NotADistribution(i, float(totals[i]))


def _check_shapes(p, targets):
    t = targets.t_map.data
    if t.shape[0] != p.n_rows:
        raise LengthMismatch("target rows", p.n_rows, t.shape[0])
    if t.shape[1] != p.n_cols:
        raise LengthMismatch("target columns", p.n_cols, t.shape[1])


def kld_loss(p, targets, eps_p=KLD_EPS_P):
    """
    Returns (loss, grad) where loss = sum_i KL(T_i || P_i) over the columns
    and grad = dloss/dP = -T / P. Both T and P are floored at eps_p inside
    the logarithm, so that KL(T || T) is exactly 0.
    """
    _check_distribution(p)
    _check_shapes(p, targets)

    t = targets.t_map.data
    pf = np.maximum(p.data, eps_p)

    # 0 ln 0 = 0
    positive = t > 0
    terms = np.zeros_like(t)
    terms[positive] = t[positive] * (
        np.log(np.maximum(t[positive], eps_p)) - np.log(pf[positive])
    )

    return float(np.sum(terms)), -t / pf


def kld_logits_grad(p, targets, temperature=1.0):
    """
    Returns dloss/dlogits for P = softmax(logits / temperature) per column,
    which is (P - T) / temperature.
    """
    _check_distribution(p)
    _check_shapes(p, targets)

    return (p.data - targets.t_map.data) / temperature


def mse_loss(x, t):
    """
    Returns (loss, grad) with loss = sum_i (x_i - t_i)^2 and grad = 2 (x - t).
    """
    x = x.x if isinstance(x, SurfaceTrace) else np.asarray(x, dtype=float)
    t = t.x if isinstance(t, SurfaceTrace) else np.asarray(t, dtype=float)

    if len(x) != len(t):
        raise LengthMismatch("surface", len(t), len(x))

    diff = x - t
    return float(np.dot(diff, diff)), 2.0 * diff
