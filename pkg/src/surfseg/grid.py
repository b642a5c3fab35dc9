"""
Domain types shared by all surfseg modules, and the elementary operations on
probability maps: validation, per-column normalization, argmax surface.

Rows are positions along a column (N2 of them), columns are the surface
sample positions (N1 of them). Surface positions are continuous 0-based row
coordinates.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from surfseg.errors import (
    BadInputError,
    ConstantColumn,
    DegenerateColumn,
    LengthMismatch,
    NegativeValue,
    NonFinite,
    NonPositiveSigma,
)


class Kind(Enum):
    Image = 1
    ProbMap = 2


@dataclass(frozen=True)
class Grid2:
    """
    A dense N2 x N1 scalar field, either an image or a probability map.
    """

    data: np.ndarray
    kind: Kind = Kind.Image

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise BadInputError(
                "a grid needs a 2-D non-empty array, got shape %s"
                % (data.shape,)
            )
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

        bad = np.argwhere(~np.isfinite(data))
        if len(bad) > 0:
            raise NonFinite(int(bad[0][0]), int(bad[0][1]))

        if self.kind == Kind.ProbMap:
            neg = np.argwhere(data < 0)
            if len(neg) > 0:
                raise NegativeValue(int(neg[0][0]), int(neg[0][1]))

    @property
    def n_rows(self):
        return self.data.shape[0]

    @property
    def n_cols(self):
        return self.data.shape[1]

    def column(self, i):
        return self.data[:, i]

    def as_kind(self, kind):
        """
        Returns the same data labelled with another kind, validated again.
        """
        return Grid2(self.data, kind)


def probmap(data):
    return Grid2(data, Kind.ProbMap)


def image(data):
    return Grid2(data, Kind.Image)


@dataclass(frozen=True)
class GaussianField:
    """
    Per-column Gaussian parameterization (gamma, sigma) output by D2C.
    """

    gamma: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        gamma = np.array(self.gamma, dtype=np.float64).ravel()
        sigma = np.array(self.sigma, dtype=np.float64).ravel()

        if len(gamma) != len(sigma):
            raise LengthMismatch("sigma", len(gamma), len(sigma))
        if not np.all(np.isfinite(gamma)):
            raise BadInputError("gamma values must be finite")
        bad = np.flatnonzero(~(sigma > 0) | ~np.isfinite(sigma))
        if len(bad) > 0:
            raise NonPositiveSigma(int(bad[0]))

        gamma.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n_cols(self):
        return len(self.gamma)


@dataclass(frozen=True)
class SurfaceTrace:
    """
    A terrain-like surface: one continuous row position per column.
    """

    x: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64).ravel()
        if len(x) < 1:
            raise BadInputError("a surface needs at least one column")
        if not np.all(np.isfinite(x)):
            raise BadInputError("surface positions must be finite")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @property
    def n_cols(self):
        return len(self.x)


@dataclass(frozen=True)
class PixelSpacing:
    row_spacing: float = 1.0
    unit_label: str = "px"

    def __post_init__(self):
        if not self.row_spacing > 0:
            raise BadInputError(
                "row_spacing must be positive, got %r" % self.row_spacing
            )


@dataclass(frozen=True)
class Sample:
    """
    One dataset item: an image with its ground truth surface, and optionally
    a precomputed probability map (oracle data).
    """

    image: Grid2
    truth: SurfaceTrace
    probmap: Grid2 = None
    name: str = ""
    index: int = 0
    flags: tuple = field(default_factory=tuple)


def validate_probmap(g):
    """
    Returns g unchanged when it is a valid probability map: non-negative,
    finite, and no column entirely zero.
    """
    if g.kind != Kind.ProbMap:
        raise BadInputError("expected a probability map, got an image")

    # Grid2 construction already checked finiteness and signs
    zero = np.flatnonzero(np.all(g.data == 0, axis=0))
    if len(zero) > 0:
        raise DegenerateColumn(int(zero[0]))

    return g


def column_normalize(g):
    """
    Maps each column linearly to [0, 1]: (v - min) / (max - min).
    """
    validate_probmap(g)

    lo = g.data.min(axis=0)
    hi = g.data.max(axis=0)
    flat = np.flatnonzero(hi == lo)
    if len(flat) > 0:
        raise ConstantColumn(int(flat[0]))

    return probmap((g.data - lo) / (hi - lo))


def argmax_surface(g):
    """
    Returns the row index of each column maximum, ties going to the smaller
    row index.
    """
    validate_probmap(g)

    # np.argmax returns the first occurrence of the maximum
    return SurfaceTrace(np.argmax(g.data, axis=0).astype(np.float64))
