"""
Polar resampling and data augmentation.

Ring-like objects (vessel walls in intravascular ultrasound) become
terrain-like surfaces once the image is resampled in polar coordinates: the
polar columns are the angles, the polar rows the radii.

Cartesian conventions: pixel (r, c) has its center at x = c, y = r.
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from surfseg.defaults import STREAM_AUGMENT
from surfseg.errors import BadInputError
from surfseg.grid import Grid2, Kind, SurfaceTrace
from surfseg.random_utils import generator

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PolarSpec:
    """
    Polar rays around (cx, cy) out to r_max. The center and r_max may be
    left unset: they then default to the center of the image and to half its
    smallest dimension, the image being the one resampled or image_shape.
    """

    cx: float = None
    cy: float = None
    n_angles: int = None
    n_radii: int = None
    r_max: float = None
    wrap: bool = False
    image_shape: tuple = None

    def __post_init__(self):
        if self.n_angles is None or self.n_radii is None:
            raise BadInputError("n_angles and n_radii are required")
        if self.n_angles < 2 or self.n_radii < 2:
            raise BadInputError(
                "n_angles and n_radii must be >= 2, got %r and %r"
                % (self.n_angles, self.n_radii)
            )
        if self.r_max is not None and not self.r_max > 0:
            raise BadInputError("r_max must be positive, got %r" % self.r_max)
        if (self.cx is None) != (self.cy is None):
            raise BadInputError(
                "cx and cy are set together, got %r and %r"
                % (self.cx, self.cy)
            )
        if self.image_shape is not None:
            shape = tuple(self.image_shape)
            if len(shape) != 2 or not all(
                isinstance(v, int) and v >= 1 for v in shape
            ):
                raise BadInputError(
                    "image_shape must be [rows, cols], got %r"
                    % (self.image_shape,)
                )
            object.__setattr__(self, "image_shape", shape)

    @classmethod
    def for_shape(cls, shape, n_angles, n_radii, wrap=False):
        """
        Centers the spec on an image of the given (rows, cols) shape, with
        r_max half its smallest dimension.
        """
        rows, cols = shape
        return cls(
            cx=(cols - 1) / 2.0,
            cy=(rows - 1) / 2.0,
            n_angles=n_angles,
            n_radii=n_radii,
            r_max=min(rows, cols) / 2.0,
            wrap=wrap,
        )

    @property
    def centered(self):
        return self.cx is not None and self.r_max is not None

    def resolve(self, shape=None):
        """
        Returns the spec with its unset center and r_max taken from an image
        of the given (rows, cols) shape, by default image_shape.
        """
        if self.centered:
            return self

        shape = shape or self.image_shape
        if shape is None:
            raise BadInputError(
                "polar cx, cy and r_max are unset and the image shape is "
                "unknown, set them or image_shape"
            )
        image_center = PolarSpec.for_shape(
            shape, self.n_angles, self.n_radii
        )
        return replace(
            self,
            cx=image_center.cx if self.cx is None else self.cx,
            cy=image_center.cy if self.cy is None else self.cy,
            r_max=image_center.r_max if self.r_max is None else self.r_max,
        )

    def radii(self):
        r_max = self.resolve().r_max
        return (np.arange(self.n_radii) + 0.5) * r_max / self.n_radii

    def angles(self):
        return 2.0 * math.pi * np.arange(self.n_angles) / self.n_angles

    def radius_of_row(self, x):
        x = np.asarray(x, dtype=np.float64)
        return (x + 0.5) * self.resolve().r_max / self.n_radii

    def cartesian_shape(self):
        """
        Returns the (rows, cols) of the image this spec is centered on.
        """
        if self.image_shape is not None:
            return self.image_shape
        spec = self.resolve()
        return (int(round(2 * spec.cy + 1)), int(round(2 * spec.cx + 1)))


def to_polar(img, spec):
    """
    Returns the n_radii x n_angles polar image: output(j, i) is the bilinear
    sample of img at radius r_j and angle theta_i. Samples outside img take
    the nearest border value.
    """
    spec = spec.resolve(img.data.shape)
    r = spec.radii()[:, None]
    theta = spec.angles()[None, :]

    xs = spec.cx + r * np.cos(theta)
    ys = spec.cy + r * np.sin(theta)

    polar = ndimage.map_coordinates(
        img.data, [ys, xs], order=1, mode="nearest"
    )
    return Grid2(polar, img.kind)


def from_polar(polar_img, spec, shape=None):
    """
    Resamples a polar image back onto a Cartesian grid of the given shape
    (by default the one spec is centered on), bilinear with angular
    wrap-around.
    """
    spec = spec.resolve(shape)
    rows, cols = shape or spec.cartesian_shape()
    y, x = np.mgrid[0:rows, 0:cols].astype(np.float64)

    dx = x - spec.cx
    dy = y - spec.cy
    rho = np.hypot(dx, dy)
    theta = np.mod(np.arctan2(dy, dx), 2.0 * math.pi)

    j = rho * spec.n_radii / spec.r_max - 0.5
    i = theta * spec.n_angles / (2.0 * math.pi)

    # append column 0 after the last one so that angles wrap
    data = np.concatenate([polar_img.data, polar_img.data[:, :1]], axis=1)

    cart = ndimage.map_coordinates(data, [j, i], order=1, mode="nearest")
    return Grid2(cart, polar_img.kind)


def surface_to_contour(x, spec):
    """
    Returns the closed contour, an n_angles x 2 array of Cartesian (x, y)
    points, of a surface found in polar rows.
    """
    spec = spec.resolve()
    r = spec.radius_of_row(x.x)
    theta = spec.angles()
    return np.column_stack(
        [spec.cx + r * np.cos(theta), spec.cy + r * np.sin(theta)]
    )


def normalize_intensity(img, mode="minmax"):
    """
    "minmax" maps intensities linearly to [-1, 1], "zscore" to zero mean and
    unit variance, "none" leaves the image unchanged. A constant image maps
    to zeros.
    """
    data = img.data

    if mode == "none":
        return img

    if mode == "minmax":
        lo, hi = data.min(), data.max()
        if hi == lo:
            return Grid2(np.zeros_like(data), img.kind)
        return Grid2(2.0 * (data - lo) / (hi - lo) - 1.0, img.kind)

    if mode == "zscore":
        std = data.std()
        if std == 0:
            return Grid2(np.zeros_like(data), img.kind)
        return Grid2((data - data.mean()) / std, img.kind)

    raise BadInputError("unknown intensity normalization %r" % mode)


@dataclass(frozen=True)
class AugmentOp:
    """
    One augmentation operation. The value is the op parameter: the shift of
    circ_shift and axial_translate (random when None), the noise std, the
    salt and pepper fraction, the crop fraction.
    """

    name: str
    value: float = None

    def __post_init__(self):
        if self.name not in AUGMENT_OPS:
            raise BadInputError("unknown augmentation %r" % self.name)

    def __str__(self):
        if self.value is None:
            return self.name
        return "%s:%s" % (self.name, self.value)


def parse_op(op):
    """
    Accepts an AugmentOp, "name" or "name:value".
    """
    if isinstance(op, AugmentOp):
        return op

    name, sep, value = str(op).partition(":")
    if not sep:
        return AugmentOp(name)

    try:
        return AugmentOp(name, float(value))
    except ValueError:
        raise BadInputError("augmentation %r has a non-numeric value" % op)


def _with_data(grid, data):
    if grid is None:
        return None
    return Grid2(data, grid.kind)


def _both(sample, fn):
    """
    Applies a geometric transform to the image and the probability map.
    """
    return (
        _with_data(sample.image, fn(sample.image.data)),
        None
        if sample.probmap is None
        else _with_data(sample.probmap, fn(sample.probmap.data)),
    )


def _mirror(sample, op, rng):
    image, pmap = _both(sample, lambda d: d[:, ::-1])
    return replace(
        sample,
        image=image,
        probmap=pmap,
        truth=SurfaceTrace(sample.truth.x[::-1]),
    )


def _circ_shift(sample, op, rng):
    n_cols = sample.image.n_cols
    k = int(rng.integers(n_cols)) if op.value is None else int(op.value)

    image, pmap = _both(sample, lambda d: np.roll(d, k, axis=1))
    return replace(
        sample,
        image=image,
        probmap=pmap,
        truth=SurfaceTrace(np.roll(sample.truth.x, k)),
    )


def _gaussian_noise(sample, op, rng):
    std = 0.1 if op.value is None else float(op.value)
    data = sample.image.data
    noisy = data + rng.normal(0.0, std, size=data.shape)
    return replace(sample, image=Grid2(noisy, sample.image.kind))


def _salt_pepper(sample, op, rng):
    fraction = 0.05 if op.value is None else float(op.value)
    data = sample.image.data

    hit = rng.random(data.shape) < fraction
    salt = rng.random(data.shape) < 0.5

    noisy = np.where(hit, np.where(salt, data.max(), data.min()), data)
    return replace(sample, image=Grid2(noisy, sample.image.kind))


def _clip_truth(sample, x, n_rows, op):
    clipped = np.clip(x, 0.0, n_rows - 1.0)
    flags = sample.flags
    if np.any(clipped != x):
        log.warning(
            "augmentation %s moved the truth of sample %r out of range, "
            "clipped",
            op,
            sample.name,
        )
        if "clipped" not in flags:
            flags = flags + ("clipped",)
    return SurfaceTrace(clipped), flags


def _crop_resize(sample, op, rng):
    fraction = 0.9 if op.value is None else float(op.value)
    if not 0 < fraction <= 1:
        raise BadInputError(
            "crop fraction must be in (0, 1], got %r" % fraction
        )

    n_rows, n_cols = sample.image.n_rows, sample.image.n_cols
    h = max(2, int(round(fraction * n_rows)))
    w = max(2, int(round(fraction * n_cols)))
    r0 = int(rng.integers(n_rows - h + 1))
    c0 = int(rng.integers(n_cols - w + 1))

    # output pixel (j, i) samples the crop at these coordinates
    rows = r0 + np.arange(n_rows) * (h - 1) / max(n_rows - 1, 1)
    cols = c0 + np.arange(n_cols) * (w - 1) / max(n_cols - 1, 1)
    rr, cc = np.meshgrid(rows, cols, indexing="ij")

    def resize(d):
        return ndimage.map_coordinates(d, [rr, cc], order=1, mode="nearest")

    image, pmap = _both(sample, resize)
    if pmap is not None:
        pmap = Grid2(pmap.data / pmap.data.sum(axis=0), Kind.ProbMap)

    t = np.interp(cols, np.arange(n_cols), sample.truth.x)
    t = (t - r0) * (n_rows - 1) / (h - 1)
    truth, flags = _clip_truth(sample, t, n_rows, op)

    return replace(sample, image=image, probmap=pmap, truth=truth, flags=flags)


def _axial_translate(sample, op, rng):
    n_rows = sample.image.n_rows
    if op.value is None:
        limit = max(1, n_rows // 10)
        delta = int(rng.integers(-limit, limit + 1))
    else:
        delta = int(op.value)

    image, pmap = _both(sample, lambda d: np.roll(d, delta, axis=0))
    truth, flags = _clip_truth(sample, sample.truth.x + delta, n_rows, op)

    return replace(sample, image=image, probmap=pmap, truth=truth, flags=flags)


AUGMENT_OPS = {
    "mirror": _mirror,
    "circ_shift": _circ_shift,
    "gaussian_noise": _gaussian_noise,
    "salt_pepper": _salt_pepper,
    "crop_resize": _crop_resize,
    "axial_translate": _axial_translate,
}

GEOMETRIC_OPS = ("mirror", "circ_shift", "crop_resize", "axial_translate")


def augment(sample, ops, seed, index=0):
    """
    Applies the augmentation ops in order to a Sample, transforming its
    image, probability map and ground truth consistently. All the random
    draws come from the (seed, augmentation stream, index) generator.
    """
    rng = generator(seed, STREAM_AUGMENT, index)

    for op in ops:
        op = parse_op(op)
        sample = AUGMENT_OPS[op.name](sample, op, rng)

    return sample
