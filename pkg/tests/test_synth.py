import json
import os.path
import shutil
import tempfile

import numpy as np
from nose.tools import assert_raises, eq_

from surfseg import d2c, synth
from surfseg.errors import (
    BadInputError,
    FormatError,
    SpecInfeasible,
    TruthOutOfRange,
)
from surfseg.grid import SurfaceTrace, probmap
from surfseg.predictor import OracleNoiseSpec
from surfseg.synth import SynthSpec

workdir = None
small_spec = SynthSpec(n_cols=10, n_rows=64, amplitude=10.0, seed=12)


def setup_module():
    global workdir
    workdir = tempfile.mkdtemp(prefix="surfseg-synth-")


def teardown_module():
    shutil.rmtree(workdir, ignore_errors=True)


def read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


def test_000_flat_surfaces():
    for spec in (
        SynthSpec(n_cols=20, n_rows=64, n_harmonics=0, seed=1),
        SynthSpec(n_cols=20, n_rows=64, amplitude=0.0, seed=1),
        SynthSpec(n_cols=20, n_rows=64, smoothness=0.0, seed=1),
    ):
        x = synth.gen_surface(spec).x
        eq_(np.ptp(x), 0.0)


def test_001_surface_determinism():
    spec = SynthSpec(seed=3)
    a = synth.gen_surface(spec, 4)

    assert np.array_equal(a.x, synth.gen_surface(spec, 4).x)
    assert not np.array_equal(a.x, synth.gen_surface(spec, 5).x)
    assert not np.array_equal(a.x, synth.gen_surface(SynthSpec(seed=4), 4).x)


def test_002_surface_slope_and_margins():
    for seed in range(20):
        for smoothness in (0.1, 0.5, 2.0):
            spec = SynthSpec(smoothness=smoothness, seed=seed)
            x = synth.gen_surface(spec, seed).x

            eq_(len(x), spec.n_cols)
            assert np.max(np.abs(np.diff(x))) <= smoothness
            assert x.min() >= spec.margin - 1e-9
            assert x.max() <= spec.n_rows - 1 - spec.margin + 1e-9


def test_003_noise_free_image():
    """
    Without noise, the column argmax is the nearest row of the surface and
    the D2C block recovers the surface exactly.
    """
    spec = SynthSpec(image_noise_std=0.0, seed=6)
    truth = synth.gen_surface(spec, 2)
    img = synth.gen_image(truth, spec, 2)

    eq_((img.n_rows, img.n_cols), (512, 60))
    assert np.array_equal(
        np.argmax(img.data, axis=0), np.round(truth.x).astype(int)
    )

    gf, reports = d2c.fit_field(probmap(img.data))
    assert not any(r.fallback_used for r in reports)
    assert np.max(np.abs(gf.gamma - truth.x)) <= 1e-6
    assert np.allclose(gf.sigma, spec.ridge_width, rtol=0, atol=1e-6)


def test_004_image_noise():
    spec = SynthSpec(seed=6)
    clean = SynthSpec(image_noise_std=0.0, seed=6)
    truth = synth.gen_surface(spec, 0)

    noisy = synth.gen_image(truth, spec).data
    noise = noisy - synth.gen_image(truth, clean).data
    assert abs(noise.std() - spec.image_noise_std) <= 0.005

    with assert_raises(TruthOutOfRange):
        synth.gen_image(SurfaceTrace(np.full(60, 600.0)), spec)


def test_005_infeasible_specs():
    for kwargs in (
        {"n_rows": 10},
        {"n_cols": 0},
        {"ridge_width": 0.0},
        {"smoothness": -1.0},
        {"image_noise_std": -0.1},
    ):
        with assert_raises(SpecInfeasible):
            SynthSpec(**kwargs)


def test_006_split_counts():
    eq_(synth.split_counts(100, (0.6, 0.2, 0.2)), [60, 20, 20])
    eq_(synth.split_counts(100, (1.0, 0.0, 0.0)), [100, 0, 0])
    eq_(synth.split_counts(7, (0.6, 0.2, 0.2)), [4, 2, 1])
    eq_(sum(synth.split_counts(13, (0.5, 0.3, 0.2))), 13)

    with assert_raises(BadInputError):
        synth.split_counts(10, (0.5, 0.5, 0.5))
    with assert_raises(BadInputError):
        synth.split_counts(10, (0.5, 0.5))


def test_007_assign_splits():
    names = synth.assign_splits(100, (0.6, 0.2, 0.2), 5)

    eq_(names.count("train"), 60)
    eq_(names.count("val"), 20)
    eq_(names.count("test"), 20)
    eq_(names, synth.assign_splits(100, (0.6, 0.2, 0.2), 5))
    assert names != synth.assign_splits(100, (0.6, 0.2, 0.2), 6)

    eq_(set(synth.assign_splits(10, (1.0, 0.0, 0.0), 5)), {"train"})


def test_008_dataset_files():
    out_dir = os.path.join(workdir, "small")
    manifest = synth.gen_dataset(
        small_spec, out_dir, n_samples=5, oracle=OracleNoiseSpec()
    )

    eq_(len(manifest["samples"]), 5)
    eq_(manifest["spec"]["seed"], 12)
    eq_(manifest["oracle"]["sigma_emit"], OracleNoiseSpec().sigma_emit)

    on_disk = json.loads(read_bytes(os.path.join(out_dir, synth.MANIFEST)))
    eq_(on_disk, manifest)

    for entry in manifest["samples"]:
        for key in ("image", "truth", "probmap"):
            assert os.path.isfile(os.path.join(out_dir, entry[key]))


def test_009_dataset_round_trip():
    out_dir = os.path.join(workdir, "roundtrip")
    synth.gen_dataset(
        small_spec, out_dir, n_samples=5, oracle=OracleNoiseSpec()
    )
    path = os.path.join(out_dir, synth.MANIFEST)

    samples = synth.load_dataset(path, with_probmap=True)
    eq_([s.index for s in samples], list(range(5)))

    for sample in samples:
        expected = synth.gen_sample(small_spec, sample.index, OracleNoiseSpec())
        eq_(sample.name, expected.name)
        assert np.array_equal(sample.image.data, expected.image.data)
        assert np.array_equal(sample.truth.x, expected.truth.x)
        assert np.array_equal(sample.probmap.data, expected.probmap.data)

    train = synth.load_dataset(path, split="train")
    eq_(len(train), 3)
    assert all(s.probmap is None for s in train)


def test_010_datasets_are_reproducible():
    a = os.path.join(workdir, "rerun-a")
    b = os.path.join(workdir, "rerun-b")
    synth.gen_dataset(small_spec, a, n_samples=4)
    synth.gen_dataset(small_spec, b, n_samples=4)

    eq_(
        read_bytes(os.path.join(a, synth.MANIFEST)),
        read_bytes(os.path.join(b, synth.MANIFEST)),
    )
    for name in sorted(os.listdir(os.path.join(a, synth.SAMPLES_DIR))):
        eq_(
            read_bytes(os.path.join(a, synth.SAMPLES_DIR, name)),
            read_bytes(os.path.join(b, synth.SAMPLES_DIR, name)),
        )


def test_011_dataset_errors():
    out_dir = os.path.join(workdir, "no-oracle")
    synth.gen_dataset(small_spec, out_dir, n_samples=2)
    path = os.path.join(out_dir, synth.MANIFEST)

    with assert_raises(FormatError):
        synth.load_dataset(path, with_probmap=True)

    broken = os.path.join(workdir, "broken.json")
    with open(broken, "w") as f:
        f.write('{"spec": {}}\n')
    with assert_raises(FormatError):
        synth.load_dataset(broken)

    with assert_raises(BadInputError):
        synth.gen_dataset(small_spec, out_dir, n_samples=0)
