import math

import numpy as np
from nose.tools import assert_raises, eq_

import tests.surfseg_utils as utils
from surfseg import d2c, geometry
from surfseg.errors import BadInputError
from surfseg.geometry import AugmentOp, PolarSpec
from surfseg.grid import Sample, SurfaceTrace, image, probmap
from surfseg.metrics import polygon_area, umsp
from surfseg.predictor import OracleNoiseSpec, oracle_predict
from surfseg.synth import SynthSpec, gen_image

sample = None


def setup_module():
    global sample

    # a ridge kept well away from the top and bottom rows
    spec = SynthSpec(n_cols=64, n_rows=128, image_noise_std=0.0, seed=5)
    i = np.arange(64.0)
    truth = SurfaceTrace(64.0 + 5.0 * np.sin(2 * math.pi * i / 64) + 0.1 * i)
    sample = Sample(
        image=gen_image(truth, spec),
        truth=truth,
        probmap=oracle_predict(OracleNoiseSpec(), truth, 128),
        name="ridge",
    )


def blob(shape, cx, cy, sigma):
    y, x = np.mgrid[0 : shape[0], 0 : shape[1]].astype(float)
    return np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * sigma**2))


def ridge_surface(img):
    """
    Surface of a noise-free ridge image, fitted by D2C.
    """
    gf, _ = d2c.fit_field(probmap(img.data))
    return SurfaceTrace(gf.gamma)


def test_000_polar_spec():
    spec = PolarSpec.for_shape((65, 81), 16, 8)
    eq_((spec.cx, spec.cy, spec.r_max), (40.0, 32.0, 32.5))
    eq_(spec.cartesian_shape(), (65, 81))
    assert np.allclose(spec.radii()[[0, -1]], [0.5 * 32.5 / 8, 7.5 * 32.5 / 8])

    with assert_raises(BadInputError):
        PolarSpec(0.0, 0.0, 1, 8, 10.0)
    with assert_raises(BadInputError):
        PolarSpec(0.0, 0.0, 8, 8, 0.0)


def test_001_constant_image():
    img = image(np.full((40, 50), 3.25))
    polar = geometry.to_polar(img, PolarSpec.for_shape((40, 50), 32, 16))

    eq_(polar.data.shape, (16, 32))
    assert np.allclose(polar.data, 3.25, rtol=0, atol=1e-12)


def test_002_radial_image_gives_identical_columns():
    spec = PolarSpec.for_shape((101, 101), 64, 32)
    img = image(blob((101, 101), spec.cx, spec.cy, 15.0))
    polar = geometry.to_polar(img, spec).data

    assert np.max(np.abs(polar - polar[:, :1])) <= 5e-3
    assert np.all(np.diff(polar[:, 0]) < 0)


def test_003_zero_angle_ray():
    y, x = np.mgrid[0:65, 0:65].astype(float)
    spec = PolarSpec(32.0, 32.0, 8, 16, 30.0)
    polar = geometry.to_polar(image(x + 0 * y), spec)

    assert np.allclose(polar.data[:, 0], 32.0 + spec.radii(), atol=1e-12)
    # theta = pi / 2 points down the rows, x stays at the center
    assert np.allclose(polar.data[:, 2], 32.0, atol=1e-12)


def test_004_contour_of_constant_trace():
    spec = PolarSpec(50.0, 40.0, 256, 128, 64.0)
    trace = SurfaceTrace(np.full(256, 63.5))
    contour = geometry.surface_to_contour(trace, spec)

    eq_(contour.shape, (256, 2))
    r = np.hypot(contour[:, 0] - 50.0, contour[:, 1] - 40.0)
    assert np.allclose(r, 32.0, rtol=0, atol=1e-12)
    assert np.allclose(contour[0], [82.0, 40.0], rtol=0, atol=1e-12)

    n = 256
    expected = 0.5 * n * math.sin(2 * math.pi / n) * 32.0**2
    assert abs(abs(polygon_area(contour)) - expected) <= 1e-9 * expected
    assert abs(abs(polygon_area(contour)) - math.pi * 32.0**2) <= (
        0.01 * math.pi * 32.0**2
    )


def test_005_polar_round_trip():
    """
    A smooth blob resampled to 256 x 128 polar and back stays within 2% RMS.
    """
    shape = (129, 129)
    spec = PolarSpec.for_shape(shape, 256, 128)
    original = blob(shape, 74.0, 55.0, 12.0)

    polar = geometry.to_polar(image(original), spec)
    back = geometry.from_polar(polar, spec).data
    eq_(back.shape, shape)

    y, x = np.mgrid[0:129, 0:129].astype(float)
    inside = np.hypot(x - spec.cx, y - spec.cy) <= spec.r_max - 1.0
    rms = np.sqrt(np.mean((back[inside] - original[inside]) ** 2))

    print("round trip RMS error %.5f" % rms)
    assert rms <= 0.02 * np.max(original)


def test_006_normalize_intensity():
    rng = utils.seeded_rng(6)
    img = image(rng.uniform(3.0, 9.0, (20, 30)))

    scaled = geometry.normalize_intensity(img, "minmax").data
    eq_((scaled.min(), scaled.max()), (-1.0, 1.0))

    z = geometry.normalize_intensity(img, "zscore").data
    assert abs(z.mean()) <= 1e-12
    assert abs(z.std() - 1.0) <= 1e-12

    assert geometry.normalize_intensity(img, "none") is img

    flat = image(np.full((4, 4), 2.0))
    for mode in ("minmax", "zscore"):
        assert np.array_equal(
            geometry.normalize_intensity(flat, mode).data, np.zeros((4, 4))
        )

    with assert_raises(BadInputError):
        geometry.normalize_intensity(img, "log")


def test_007_parse_op():
    eq_(geometry.parse_op("mirror"), AugmentOp("mirror"))
    eq_(geometry.parse_op("salt_pepper:0.1"), AugmentOp("salt_pepper", 0.1))
    eq_(str(AugmentOp("crop_resize", 0.9)), "crop_resize:0.9")

    with assert_raises(BadInputError):
        geometry.parse_op("rotate")
    with assert_raises(BadInputError):
        geometry.parse_op("gaussian_noise:loud")


def test_008_mirror_twice():
    out = geometry.augment(sample, ["mirror", "mirror"], seed=1)

    assert np.array_equal(out.image.data, sample.image.data)
    assert np.array_equal(out.probmap.data, sample.probmap.data)
    assert np.array_equal(out.truth.x, sample.truth.x)

    once = geometry.augment(sample, ["mirror"], seed=1)
    assert np.array_equal(once.truth.x, sample.truth.x[::-1])


def test_009_full_circular_shift():
    n = sample.image.n_cols
    out = geometry.augment(sample, [AugmentOp("circ_shift", n)], seed=1)

    assert np.array_equal(out.image.data, sample.image.data)
    assert np.array_equal(out.truth.x, sample.truth.x)


def test_010_salt_pepper_count():
    rng = utils.seeded_rng(10)
    noisy = image(rng.uniform(0.1, 0.9, (128, 256)))
    base = Sample(image=noisy, truth=SurfaceTrace(np.full(256, 64.0)))

    counts = []
    for index in range(20):
        out = geometry.augment(base, ["salt_pepper"], seed=3, index=index)
        counts.append(int(np.sum(out.image.data != noisy.data)))

    mean = np.mean(counts)
    print("mean altered pixel count %.1f" % mean)
    assert abs(mean - 0.05 * 128 * 256) <= 30


def test_011_gaussian_noise():
    out = geometry.augment(sample, ["gaussian_noise"], seed=2)
    diff = out.image.data - sample.image.data

    assert abs(diff.std() - 0.1) <= 0.005
    assert np.array_equal(out.truth.x, sample.truth.x)


def test_012_truth_consistency():
    """
    Every geometric augmentation keeps the truth on the ridge of the
    transformed image.
    """
    ops = (
        ["mirror"],
        ["circ_shift"],
        [AugmentOp("circ_shift", 17)],
        ["crop_resize"],
        [AugmentOp("crop_resize", 0.8)],
        [AugmentOp("axial_translate", 5)],
        [AugmentOp("axial_translate", -7)],
        ["mirror", "crop_resize", "circ_shift"],
    )
    for k, op in enumerate(ops):
        out = geometry.augment(sample, op, seed=4, index=k)
        error = umsp(ridge_surface(out.image), out.truth)
        print("%s: UMSP %.3f" % (", ".join(str(o) for o in op), error))
        assert error <= 0.51
        assert np.all(np.abs(out.probmap.data.sum(axis=0) - 1.0) <= 1e-9)


def test_013_crop_whole_image_is_identity():
    out = geometry.augment(sample, [AugmentOp("crop_resize", 1.0)], seed=0)

    assert np.allclose(out.image.data, sample.image.data, rtol=0, atol=1e-12)
    assert np.allclose(out.truth.x, sample.truth.x, rtol=0, atol=1e-12)


def test_014_translation_out_of_range_is_clipped():
    out = geometry.augment(sample, [AugmentOp("axial_translate", 500)], seed=0)

    eq_(out.truth.x.max(), 127.0)
    assert "clipped" in out.flags


def test_015_augment_determinism():
    ops = ["mirror", "circ_shift", "gaussian_noise", "salt_pepper"]
    ops.append("crop_resize")
    a = geometry.augment(sample, ops, seed=8, index=3)
    b = geometry.augment(sample, ops, seed=8, index=3)
    c = geometry.augment(sample, ops, seed=8, index=4)

    assert np.array_equal(a.image.data, b.image.data)
    assert np.array_equal(a.truth.x, b.truth.x)
    assert not np.array_equal(a.image.data, c.image.data)


def test_016_polar_defaults_to_image_center():
    spec = PolarSpec(n_angles=32, n_radii=16)
    centered = PolarSpec.for_shape((40, 50), 32, 16)
    img = image(blob((40, 50), 20.0, 15.0, 6.0))

    eq_(spec.resolve((40, 50)), centered)
    assert np.array_equal(
        geometry.to_polar(img, spec).data,
        geometry.to_polar(img, centered).data,
    )

    with assert_raises(BadInputError):
        spec.radii()
    with assert_raises(BadInputError):
        PolarSpec(cx=3.0, n_angles=32, n_radii=16)
    with assert_raises(BadInputError):
        PolarSpec(0.0, 0.0)

    # a set center is kept, only r_max comes from the image
    partial = PolarSpec(cx=10.0, cy=12.0, n_angles=32, n_radii=16)
    eq_(partial.resolve((40, 50)).r_max, 20.0)
    eq_(partial.resolve((40, 50)).cx, 10.0)
