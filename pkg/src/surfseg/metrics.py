"""
Evaluation metrics.

  - UMSP: unsigned mean surface positioning error, in physical units.
  - JM: Jaccard measure of two regions.
  - PAD: percentage of area difference, relative to the truth region.
  - HD: Hausdorff distance between two contour point sets.

Regions are filled contours rasterized on pixel centers, pixel (r, c)
having its center at x = c, y = r. For a terrain-like surface on its own
grid, the region is the set of pixels above the surface (row <= x_c) and the
contour is the set of points (c, x_c).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from surfseg.errors import (
    EmptyRegion,
    EmptySet,
    ExtentMismatch,
    LengthMismatch,
)
from surfseg.geometry import surface_to_contour
from surfseg.grid import PixelSpacing

METRICS = ("umsp", "jm", "pad", "hd")


@dataclass(frozen=True)
class RegionMask:
    mask: np.ndarray

    def __post_init__(self):
        mask = np.array(self.mask, dtype=bool)
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @property
    def extent(self):
        return self.mask.shape

    @property
    def area(self):
        return int(np.count_nonzero(self.mask))


def umsp(pred, truth, spacing=PixelSpacing()):
    if pred.n_cols != truth.n_cols:
        raise LengthMismatch("predicted surface", truth.n_cols, pred.n_cols)

    return float(np.mean(np.abs(pred.x - truth.x)) * spacing.row_spacing)


def polygon_area(points):
    """
    Returns the signed shoelace area of a closed polygon.
    """
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def contour_to_mask(points, extent):
    """
    Rasterizes a closed polygon of (x, y) points on an extent of (rows,
    cols) pixels with the even-odd rule applied to pixel centers. Centers
    lying exactly on an edge are inside.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 3 or points.shape[1] != 2:
        raise EmptyRegion("a polygon needs at least 3 (x, y) points")
    if polygon_area(points) == 0:
        raise EmptyRegion("polygon has zero area")

    rows, cols = extent
    py, px = np.mgrid[0:rows, 0:cols].astype(np.float64)

    inside = np.zeros((rows, cols), dtype=bool)
    boundary = np.zeros((rows, cols), dtype=bool)

    n = len(points)
    for k in range(n):
        x1, y1 = points[k]
        x2, y2 = points[(k + 1) % n]

        # even-odd crossing of the ray going to +x
        crosses = (y1 > py) != (y2 > py)
        if np.any(crosses):
            x_at = x1 + (py - y1) * (x2 - x1) / np.where(
                y2 == y1, 1.0, y2 - y1
            )
            inside ^= crosses & (px < x_at)

        cross = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)
        scale = max(abs(x2 - x1), abs(y2 - y1))
        boundary |= (
            (np.abs(cross) <= 1e-12 * scale)
            & (px >= min(x1, x2))
            & (px <= max(x1, x2))
            & (py >= min(y1, y2))
            & (py <= max(y1, y2))
        )

    return RegionMask(inside | boundary)


def _check_extent(a, b):
    if a.extent != b.extent:
        raise ExtentMismatch(
            "region extents differ: %s and %s" % (a.extent, b.extent)
        )


def jaccard(a, b):
    _check_extent(a, b)

    union = np.count_nonzero(a.mask | b.mask)
    if union == 0:
        return 1.0
    return np.count_nonzero(a.mask & b.mask) / union


def pad(a, b_truth):
    _check_extent(a, b_truth)

    if b_truth.area == 0:
        raise EmptyRegion("the truth region is empty")
    return abs(a.area - b_truth.area) / b_truth.area


def hausdorff(a, b, spacing=PixelSpacing()):
    """
    Returns the Hausdorff distance between two point sets, by exact pairwise
    computation. Pixels are square, of side spacing.row_spacing.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1, 2)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 2)
    if len(a) == 0 or len(b) == 0:
        raise EmptySet("Hausdorff distance needs two non-empty point sets")

    d = cdist(a, b)
    h = max(d.min(axis=1).max(), d.min(axis=0).max())
    return float(h) * spacing.row_spacing


def surface_region(x, n_rows):
    """
    Returns the region above a terrain-like surface: pixel (r, c) is in
    when r <= x_c.
    """
    rows = np.arange(n_rows, dtype=np.float64)[:, None]
    return RegionMask(rows <= x.x[None, :])


def surface_points(x):
    return np.column_stack([np.arange(x.n_cols, dtype=np.float64), x.x])


def evaluate(
    pred,
    truth,
    spacing=PixelSpacing(),
    metrics=METRICS,
    n_rows=None,
    polar=None,
):
    """
    Returns a dict of the requested metrics for one predicted surface. When
    polar is given the surfaces are polar rows and the region metrics are
    computed on the Cartesian contours; otherwise regions and contours come
    from surface_region() and surface_points() on an n_rows grid.
    """
    record = {}

    if "umsp" in metrics:
        record["umsp"] = umsp(pred, truth, spacing)

    if polar is not None:
        pred_points = surface_to_contour(pred, polar)
        truth_points = surface_to_contour(truth, polar)
    else:
        pred_points = surface_points(pred)
        truth_points = surface_points(truth)

    if "jm" in metrics or "pad" in metrics:
        if polar is not None:
            extent = polar.cartesian_shape()
            a = contour_to_mask(pred_points, extent)
            b = contour_to_mask(truth_points, extent)
        else:
            if n_rows is None:
                n_rows = int(math.ceil(max(pred.x.max(), truth.x.max()))) + 1
            a = surface_region(pred, n_rows)
            b = surface_region(truth, n_rows)

        if "jm" in metrics:
            record["jm"] = jaccard(a, b)
        if "pad" in metrics:
            record["pad"] = pad(a, b)

    if "hd" in metrics:
        record["hd"] = hausdorff(pred_points, truth_points, spacing)

    return record


def summarize(records):
    """
    Returns {metric: {"mean": ..., "std": ...}} over a list of records, the
    std being the population standard deviation.
    """
    summary = {}
    names = sorted({name for r in records for name in r})
    for name in names:
        values = np.array([r[name] for r in records if name in r])
        summary[name] = {
            "mean": float(np.mean(values)),
            "std": float(np.std(values)),
        }
    return summary
