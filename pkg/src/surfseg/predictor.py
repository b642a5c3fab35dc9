"""
Unary probability predictors.

A predictor turns an image into a probability map whose columns are
distributions over the rows. Three predictors are provided:

  - LinearPatchScorer, a trainable linear filter over an image patch around
    each pixel, followed by a softmax over each column,
  - OraclePredictor, which emits Gaussian columns around the (possibly
    corrupted) ground truth, for controlled experiments,
  - ProbMapPredictor, which reads precomputed probability maps.

All of them share forward() and backward(), so the training schedules treat
them the same way. Predictors without parameters are frozen.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from surfseg import geometry
from surfseg import log as surfseg_log
from surfseg.defaults import (
    BATCH_SIZE,
    EP_PRETRAIN,
    LR_PRETRAIN,
    PATCH_COLS,
    PATCH_ROWS,
    SIGMA_REL,
    STREAM_BATCH_ORDER,
    STREAM_ORACLE,
    TEMPERATURE,
)
from surfseg.errors import (
    BadInputError,
    EmptySplit,
    LengthMismatch,
    TrainingDiverged,
)
from surfseg.grid import probmap, validate_probmap
from surfseg.learning import (
    check_truth,
    discretized_gaussians,
    kld_logits_grad,
    kld_loss,
    make_targets,
)
from surfseg.optimizer import AdamGroup, adam_step
from surfseg.random_utils import generator

log = logging.getLogger(__name__)


def softmax_columns(logits, temperature=1.0):
    z = logits / temperature
    z = z - z.max(axis=0)
    e = np.exp(z)
    return e / e.sum(axis=0)


@dataclass(frozen=True)
class LinearPatchScorer:
    """
    logit(j, i) = weights . patch(image, j, i) + bias, where the patch is
    centered on pixel (j, i) and the image is extended by edge replication.
    The weights vector holds the patch cells row-major, then the bias.
    """

    patch_rows: int = PATCH_ROWS
    patch_cols: int = PATCH_COLS
    weights: np.ndarray = None
    temperature: float = TEMPERATURE

    kind = "linear_patch"

    def __post_init__(self):
        for name in ("patch_rows", "patch_cols"):
            value = getattr(self, name)
            if value < 1 or value % 2 != 1:
                raise BadInputError(
                    "%s must be an odd positive integer, got %r"
                    % (name, value)
                )
        if not self.temperature > 0:
            raise BadInputError(
                "temperature must be positive, got %r" % self.temperature
            )

        n = self.patch_rows * self.patch_cols + 1
        if self.weights is None:
            weights = np.zeros(n)
        else:
            weights = np.array(self.weights, dtype=np.float64).ravel()
        if len(weights) != n:
            raise LengthMismatch("patch weights", n, len(weights))

        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def identity(cls, patch_rows=PATCH_ROWS, patch_cols=PATCH_COLS, **kwargs):
        """
        Returns the scorer whose logits are the image intensities.
        """
        weights = np.zeros(patch_rows * patch_cols + 1)
        weights[(patch_rows // 2) * patch_cols + patch_cols // 2] = 1.0
        return cls(patch_rows, patch_cols, weights, **kwargs)

    @property
    def params(self):
        return self.weights

    @property
    def trainable(self):
        return True

    def with_params(self, params):
        return replace(self, weights=params)

    def describe(self):
        return {
            "kind": self.kind,
            "patch_rows": self.patch_rows,
            "patch_cols": self.patch_cols,
            "temperature": self.temperature,
        }

    def patches(self, image):
        """
        Returns the N2 x N1 x (patch_rows * patch_cols) array of patches.
        """
        hr, hc = self.patch_rows // 2, self.patch_cols // 2
        padded = np.pad(image.data, ((hr, hr), (hc, hc)), mode="edge")
        windows = sliding_window_view(
            padded, (self.patch_rows, self.patch_cols)
        )
        return windows.reshape(image.n_rows, image.n_cols, -1)

    def logits(self, patches):
        return patches @ self.weights[:-1] + self.weights[-1]

    def predict(self, image):
        return self.forward_image(image)[0]

    def forward_image(self, image):
        patches = self.patches(image)
        p = softmax_columns(self.logits(patches), self.temperature)
        return probmap(p), patches

    def forward(self, sample):
        p, patches = self.forward_image(sample.image)
        return p, (p.data, patches)

    def backward_logits(self, context, d_logits):
        _, patches = context
        grad = np.empty(len(self.weights))
        grad[:-1] = np.tensordot(d_logits, patches, axes=([0, 1], [0, 1]))
        grad[-1] = np.sum(d_logits)
        return grad

    def backward(self, context, d_probmap):
        """
        Returns dLoss/dweights given dLoss/dP.
        """
        p, _ = context
        inner = np.sum(p * d_probmap, axis=0)
        d_logits = p * (d_probmap - inner) / self.temperature
        return self.backward_logits(context, d_logits)


@dataclass(frozen=True)
class OracleNoiseSpec:
    """
    A seeded corrupt_fraction of the columns have their center displaced by
    Gaussian noise of std position_noise_std. Clean columns are emitted with
    std sigma_emit, corrupted columns with corrupt_sigma (sigma_emit when
    not given).
    """

    corrupt_fraction: float = 0.0
    position_noise_std: float = 0.0
    sigma_emit: float = 2.0
    seed: int = 0
    corrupt_sigma: float = None

    def __post_init__(self):
        if not 0 <= self.corrupt_fraction <= 1:
            raise BadInputError(
                "corrupt_fraction must be in [0, 1], got %r"
                % self.corrupt_fraction
            )
        if not self.position_noise_std >= 0:
            raise BadInputError(
                "position_noise_std must be >= 0, got %r"
                % self.position_noise_std
            )
        if not self.sigma_emit > 0:
            raise BadInputError(
                "sigma_emit must be positive, got %r" % self.sigma_emit
            )
        if self.corrupt_sigma is not None and not self.corrupt_sigma > 0:
            raise BadInputError(
                "corrupt_sigma must be positive, got %r" % self.corrupt_sigma
            )

    @property
    def sigma_corrupted(self):
        if self.corrupt_sigma is None:
            return self.sigma_emit
        return self.corrupt_sigma


def oracle_corruption(spec, n_cols, index=0):
    """
    Returns (corrupted mask, center offsets) for sample index.
    """
    rng = generator(spec.seed, STREAM_ORACLE, index)
    corrupted = rng.random(n_cols) < spec.corrupt_fraction
    noise = rng.standard_normal(n_cols) * spec.position_noise_std
    return corrupted, np.where(corrupted, noise, 0.0)


def oracle_predict(spec, truth, n_rows, index=0):
    """
    Returns the oracle probability map for a ground truth surface. Samples
    of a dataset use their index to draw independent corruptions.
    """
    check_truth(truth, n_rows)

    corrupted, offsets = oracle_corruption(spec, truth.n_cols, index)
    sigmas = np.where(corrupted, spec.sigma_corrupted, spec.sigma_emit)

    surfseg_log.trace(
        log,
        "oracle sample %d: %d of %d columns corrupted",
        index,
        int(np.sum(corrupted)),
        truth.n_cols,
    )
    return probmap(discretized_gaussians(truth.x + offsets, sigmas, n_rows))


@dataclass(frozen=True)
class OraclePredictor:
    spec: OracleNoiseSpec

    kind = "oracle"
    params = np.zeros(0)
    trainable = False

    def with_params(self, params):
        return self

    def describe(self):
        return {"kind": self.kind}

    def forward(self, sample):
        p = oracle_predict(
            self.spec, sample.truth, sample.image.n_rows, sample.index
        )
        return p, None

    def backward(self, context, d_probmap):
        return np.zeros(0)


@dataclass(frozen=True)
class ProbMapPredictor:
    """
    Uses the probability map stored with each sample.
    """

    kind = "probmap"
    params = np.zeros(0)
    trainable = False

    def with_params(self, params):
        return self

    def describe(self):
        return {"kind": self.kind}

    def forward(self, sample):
        if sample.probmap is None:
            raise BadInputError(
                "sample %r has no probability map" % (sample.name,)
            )
        return validate_probmap(sample.probmap), None

    def backward(self, context, d_probmap):
        return np.zeros(0)


def predict(model, image):
    """
    Runs the predictor on an image and returns the probability map.
    """
    return model.predict(image)


def batches(n, batch_size, seed, epoch):
    """
    Yields lists of sample indices: a seeded permutation of range(n) cut in
    batches of batch_size.
    """
    if batch_size < 1:
        raise BadInputError("batch_size must be >= 1, got %r" % batch_size)

    order = generator(seed, STREAM_BATCH_ORDER, epoch).permutation(n)
    for start in range(0, n, batch_size):
        yield [int(k) for k in order[start : start + batch_size]]


@dataclass(frozen=True)
class PretrainResult:
    model: LinearPatchScorer
    group: AdamGroup
    history: tuple


def pretrain(
    model,
    samples,
    sigma_rel=SIGMA_REL,
    lr=LR_PRETRAIN,
    epochs=EP_PRETRAIN,
    seed=0,
    batch_size=BATCH_SIZE,
    augment_ops=(),
):
    """
    Trains the predictor by minimizing the KL divergence between its column
    distributions and the Gaussian relaxed targets, with Adam. Returns a
    PretrainResult holding the trained model, its optimizer group and the
    mean loss of every epoch.
    """
    samples = list(samples)
    if len(samples) == 0:
        raise EmptySplit("train")

    group = AdamGroup.fresh(model.params)
    history = []
    n = len(samples)

    for epoch in range(epochs):
        total = 0.0

        for batch in batches(n, batch_size, seed, epoch):
            grad = np.zeros(len(group))

            for k in batch:
                sample = samples[k]
                if augment_ops:
                    sample = geometry.augment(
                        sample, augment_ops, seed, epoch * n + k
                    )

                targets = make_targets(
                    sample.truth, sample.image.n_rows, sigma_rel
                )
                p, context = model.forward(sample)
                loss, _ = kld_loss(p, targets)

                if not np.isfinite(loss):
                    raise TrainingDiverged(
                        "pretraining loss is not finite at epoch %d" % epoch,
                        group,
                    )

                d_logits = kld_logits_grad(p, targets, model.temperature)
                grad += model.backward_logits(context, d_logits)
                total += loss

            group = adam_step(group, grad, lr)
            model = model.with_params(group.params)

        history.append(total / n)
        log.info("pretrain epoch %d/%d: KLD %.6g", epoch + 1, epochs, total / n)

    return PretrainResult(model=model, group=group, history=tuple(history))
