"""
Synthetic data: terrain-like ground truth surfaces, ridge images and
(optionally) oracle probability maps, written as a dataset directory with a
manifest.

Every random draw comes from random_utils.generator(seed, stream, index)
where index is the sample number, so that any sample can be regenerated on
its own and the result doesn't depend on the generation order.
"""

import logging
import math
import os.path
from dataclasses import asdict, dataclass

import numpy as np

from surfseg import file_utils
from surfseg.defaults import (
    BENCH_A_AMPLITUDE,
    BENCH_A_IMAGE_NOISE_STD,
    BENCH_A_N_COLS,
    BENCH_A_N_HARMONICS,
    BENCH_A_N_ROWS,
    BENCH_A_RIDGE_WIDTH,
    BENCH_A_SMOOTHNESS,
    N_SAMPLES,
    SPLIT,
    SPLIT_NAMES,
    STREAM_IMAGE_NOISE,
    STREAM_SPLIT,
    STREAM_SURFACE,
)
from surfseg.env_utils import parallel_map
from surfseg.errors import BadInputError, FormatError, SpecInfeasible
from surfseg.grid import Kind, Sample, SurfaceTrace, image
from surfseg.learning import check_truth
from surfseg.predictor import oracle_predict
from surfseg.random_utils import generator

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"
SAMPLES_DIR = "samples"

# keeps the rescaled slopes below the bound after rounding
SLOPE_SAFETY = 1.0 - 1e-9


@dataclass(frozen=True)
class SynthSpec:
    """
    Parameters of a synthetic dataset. The defaults are the "bench-A"
    benchmark.
    """

    n_cols: int = BENCH_A_N_COLS
    n_rows: int = BENCH_A_N_ROWS
    smoothness: float = BENCH_A_SMOOTHNESS
    n_harmonics: int = BENCH_A_N_HARMONICS
    amplitude: float = BENCH_A_AMPLITUDE
    ridge_width: float = BENCH_A_RIDGE_WIDTH
    image_noise_std: float = BENCH_A_IMAGE_NOISE_STD
    seed: int = 0

    def __post_init__(self):
        if self.n_cols < 1 or self.n_rows < 1:
            raise SpecInfeasible(
                "n_cols and n_rows must be positive, got %r and %r"
                % (self.n_cols, self.n_rows)
            )
        if not self.ridge_width > 0:
            raise SpecInfeasible(
                "ridge_width must be positive, got %r" % self.ridge_width
            )
        if self.smoothness < 0 or self.amplitude < 0:
            raise SpecInfeasible("smoothness and amplitude must be >= 0")
        if self.n_harmonics < 0:
            raise SpecInfeasible("n_harmonics must be >= 0")
        if self.image_noise_std < 0:
            raise SpecInfeasible("image_noise_std must be >= 0")
        if self.half_room < 0:
            raise SpecInfeasible(
                "%d rows can't hold a ridge of width %g with its margins"
                % (self.n_rows, self.ridge_width)
            )

    @property
    def margin(self):
        return 3.0 * self.ridge_width

    @property
    def half_room(self):
        """
        How far the surface may go from the middle row.
        """
        return (self.n_rows - 1) / 2.0 - self.margin


def gen_surface(spec, index=0):
    """
    Returns a ground truth surface: a baseline plus n_harmonics seeded
    sines, rescaled so that adjacent columns differ by at most
    spec.smoothness and the surface keeps its margins.
    """
    rng = generator(spec.seed, STREAM_SURFACE, index)
    n = spec.n_cols
    i = np.arange(n, dtype=np.float64)

    raw = np.zeros(n)
    for k in range(1, spec.n_harmonics + 1):
        a_k = rng.uniform(-1.0, 1.0) / k
        phi_k = rng.uniform(0.0, 2.0 * math.pi)
        raw += a_k * np.sin(2.0 * math.pi * k * i / n + phi_k)

    peak = np.max(np.abs(raw))
    scale = 0.0
    if peak > 0 and spec.amplitude > 0:
        scale = min(spec.amplitude, spec.half_room) / peak
        slope = np.max(np.abs(np.diff(raw))) if n > 1 else 0.0
        if slope > 0:
            scale = min(scale, spec.smoothness / slope)
        scale *= SLOPE_SAFETY

    shape = scale * raw
    room = spec.half_room - np.max(np.abs(shape))
    baseline = (spec.n_rows - 1) / 2.0 + rng.uniform(-1.0, 1.0) * room

    return SurfaceTrace(baseline + shape)


def gen_image(truth, spec, index=0):
    """
    Returns the ridge image of a surface: a Gaussian ridge of std
    ridge_width along the surface plus seeded Gaussian noise.
    """
    check_truth(truth, spec.n_rows)

    j = np.arange(spec.n_rows, dtype=np.float64)[:, None]
    data = np.exp(-((j - truth.x[None, :]) ** 2) / (2.0 * spec.ridge_width**2))

    if spec.image_noise_std > 0:
        rng = generator(spec.seed, STREAM_IMAGE_NOISE, index)
        data = data + rng.normal(0.0, spec.image_noise_std, size=data.shape)

    return image(data)


def split_counts(n_samples, split):
    """
    Returns the number of samples of each split: the floors of the
    fractions, the remaining samples going to the largest remainders.
    """
    split = tuple(float(f) for f in split)
    if len(split) != len(SPLIT_NAMES):
        raise BadInputError(
            "expected %d split fractions, got %d"
            % (len(SPLIT_NAMES), len(split))
        )
    if any(f < 0 for f in split) or abs(math.fsum(split) - 1.0) > 1e-9:
        raise BadInputError("split fractions must be >= 0 and sum to 1")

    exact = [f * n_samples for f in split]
    counts = [int(math.floor(e + 1e-9)) for e in exact]
    remainders = sorted(
        range(len(split)), key=lambda k: (-(exact[k] - counts[k]), k)
    )
    for k in remainders[: n_samples - sum(counts)]:
        counts[k] += 1
    return counts


def assign_splits(n_samples, split, seed):
    counts = split_counts(n_samples, split)
    order = generator(seed, STREAM_SPLIT).permutation(n_samples)

    names = [None] * n_samples
    start = 0
    for name, count in zip(SPLIT_NAMES, counts):
        for k in order[start : start + count]:
            names[int(k)] = name
        start += count
    return names


def sample_name(index):
    return "sample_%04d" % index


def gen_sample(spec, index, oracle=None):
    truth = gen_surface(spec, index)
    img = gen_image(truth, spec, index)
    pmap = None
    if oracle is not None:
        pmap = oracle_predict(oracle, truth, spec.n_rows, index)
    return Sample(
        image=img,
        truth=truth,
        probmap=pmap,
        name=sample_name(index),
        index=index,
    )


def gen_dataset(
    spec, out_dir, n_samples=N_SAMPLES, split=SPLIT, oracle=None
):
    """
    Writes n_samples samples under out_dir and returns the manifest, which is
    also written to out_dir/manifest.json. Paths in the manifest are
    relative to out_dir.
    """
    if n_samples < 1:
        raise BadInputError("n_samples must be positive, got %r" % n_samples)

    splits = assign_splits(n_samples, split, spec.seed)

    def write(index):
        sample = gen_sample(spec, index, oracle)
        prefix = os.path.join(SAMPLES_DIR, sample.name)
        entry = {
            "name": sample.name,
            "index": index,
            "split": splits[index],
            "image": prefix + "_image.csv",
            "truth": prefix + "_truth.csv",
        }
        file_utils.write_grid(
            os.path.join(out_dir, entry["image"]), sample.image
        )
        file_utils.write_trace(
            os.path.join(out_dir, entry["truth"]), sample.truth
        )

        if sample.probmap is not None:
            entry["probmap"] = prefix + "_probmap.csv"
            file_utils.write_grid(
                os.path.join(out_dir, entry["probmap"]), sample.probmap
            )
        return entry

    entries = parallel_map(write, range(n_samples))

    manifest = {"spec": asdict(spec), "samples": entries}
    if oracle is not None:
        manifest["oracle"] = asdict(oracle)

    file_utils.write_json(os.path.join(out_dir, MANIFEST), manifest)

    counts = {name: splits.count(name) for name in SPLIT_NAMES}
    log.info(
        "wrote %d samples to %s: %d train, %d val, %d test",
        n_samples,
        out_dir,
        counts["train"],
        counts["val"],
        counts["test"],
    )
    return manifest


def load_dataset(manifest_path, split=None, with_probmap=False):
    """
    Returns the list of Samples of a dataset, restricted to one split when
    split is given.
    """
    manifest = file_utils.read_json(manifest_path)
    base = os.path.dirname(manifest_path)

    try:
        entries = manifest["samples"]
    except (KeyError, TypeError):
        raise FormatError(manifest_path, "manifest has no samples list")

    samples = []
    for entry in entries:
        if not isinstance(entry, dict) or not {"image", "truth"} <= set(entry):
            raise FormatError(manifest_path, "sample entry lacks its files")
        if split is not None and entry.get("split") != split:
            continue

        img = file_utils.read_grid(os.path.join(base, entry["image"]))
        truth = file_utils.read_trace(os.path.join(base, entry["truth"]))
        if truth.n_cols != img.n_cols:
            raise FormatError(
                entry["truth"],
                "truth has %d columns, image has %d"
                % (truth.n_cols, img.n_cols),
            )

        pmap = None
        if with_probmap:
            if "probmap" not in entry:
                raise FormatError(
                    manifest_path,
                    "sample %s has no probability map" % entry["name"],
                )
            pmap = file_utils.read_grid(
                os.path.join(base, entry["probmap"]), Kind.ProbMap
            )

        samples.append(
            Sample(
                image=img,
                truth=truth,
                probmap=pmap,
                name=entry.get("name", ""),
                index=int(entry.get("index", len(samples))),
            )
        )

    return samples
