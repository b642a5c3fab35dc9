"""
The Adam optimizer and the training state.

Parameters are organized in groups, each with its own moment vectors and
step counter: the predictor weights, and the log-smoothness parameter
theta = ln(w_comp). Optimizing theta rather than w_comp keeps the smoothness
weight positive whatever the update sequence.
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from surfseg import log as surfseg_log
from surfseg.defaults import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPSILON,
    SCHEDULE_ALTERNATE,
    W_INIT,
)
from surfseg.errors import BadInputError, LengthMismatch, NonFiniteGradient

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdamGroup:
    """
    A parameter vector with its Adam first and second moments.
    """

    params: np.ndarray
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    def __post_init__(self):
        for name in ("params", "m", "v"):
            value = np.array(getattr(self, name), dtype=np.float64).ravel()
            value.setflags(write=False)
            object.__setattr__(self, name, value)

        n = len(self.params)
        if len(self.m) != n:
            raise LengthMismatch("first moment", n, len(self.m))
        if len(self.v) != n:
            raise LengthMismatch("second moment", n, len(self.v))

    @classmethod
    def fresh(cls, params):
        params = np.asarray(params, dtype=np.float64).ravel()
        return cls(params, np.zeros(len(params)), np.zeros(len(params)), 0)

    def __len__(self):
        return len(self.params)


def adam_step(group, grads, lr):
    """
    Returns the AdamGroup after one bias-corrected Adam update with learning
    rate lr >= 0. A zero learning rate leaves the parameters unchanged and
    still advances the moments.
    """
    grads = np.asarray(grads, dtype=np.float64).ravel()

    if len(grads) != len(group):
        raise LengthMismatch("gradient", len(group), len(grads))
    if not np.all(np.isfinite(grads)):
        raise NonFiniteGradient("gradient has non-finite entries")
    if not lr >= 0 or not math.isfinite(lr):
        raise BadInputError("learning rate must be >= 0, got %r" % lr)

    step = group.step + 1
    m = ADAM_BETA1 * group.m + (1.0 - ADAM_BETA1) * grads
    v = ADAM_BETA2 * group.v + (1.0 - ADAM_BETA2) * grads * grads

    m_hat = m / (1.0 - ADAM_BETA1**step)
    v_hat = v / (1.0 - ADAM_BETA2**step)

    params = group.params - lr * m_hat / (np.sqrt(v_hat) + ADAM_EPSILON)

    return AdamGroup(params, m, v, step)


@dataclass(frozen=True)
class TrainState:
    """
    Everything needed to resume training: the predictor parameter group,
    the log_w group (one value), the schedule counters and the seed.
    """

    predictor: AdamGroup
    smoothness: AdamGroup
    epochs_unet: int = 0
    epochs_sb: int = 0
    rounds_done: int = 0
    schedule: str = SCHEDULE_ALTERNATE
    rng_seed: int = 0

    def __post_init__(self):
        if len(self.smoothness) != 1:
            raise LengthMismatch("log_w group", 1, len(self.smoothness))

    @property
    def predictor_params(self):
        return self.predictor.params

    @property
    def log_w(self):
        return float(self.smoothness.params[0])

    @property
    def w(self):
        return math.exp(self.log_w)

    def with_predictor(self, group):
        return replace(self, predictor=group)

    def with_smoothness(self, group):
        surfseg_log.trace(
            log, "log_w %.12g -> %.12g", self.log_w, group.params[0]
        )
        return replace(self, smoothness=group)


def initial_state(
    predictor_params, w_init=W_INIT, seed=0, schedule=SCHEDULE_ALTERNATE
):
    """
    Returns a TrainState with fresh moments, theta = ln(w_init).
    """
    if not w_init > 0:
        raise BadInputError("w_init must be positive, got %r" % w_init)

    return TrainState(
        predictor=AdamGroup.fresh(predictor_params),
        smoothness=AdamGroup.fresh([math.log(w_init)]),
        schedule=schedule,
        rng_seed=int(seed),
    )
