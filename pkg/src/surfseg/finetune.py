"""
Fine-tuning schedules.

A forward pass runs predictor -> D2C -> smoothing block and scores the
smoothed surface against the ground truth with the squared error. The
backward pass goes through smoothing.backward(), then d2c.backward_field(),
then the predictor.

The alternating schedule repeats, for the configured number of rounds:

  - ep_unet epochs updating the predictor on the training split, w_comp
    frozen,
  - ep_sb epochs updating theta = ln(w_comp) on the validation split, the
    predictor frozen.

The joint schedule updates both parameter groups together on the training
split, for rounds * ep_unet epochs.
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from surfseg import d2c, smoothing
from surfseg import log as surfseg_log
from surfseg.defaults import (
    BATCH_SIZE,
    D2C_TAU,
    EP_SB,
    EP_UNET,
    LR_PREDICTOR,
    LR_SB,
    ROUNDS,
    SCHEDULE_ALTERNATE,
    SCHEDULE_JOINT,
)
from surfseg.env_utils import parallel_map
from surfseg.errors import BadInputError, EmptySplit, TrainingDiverged
from surfseg.learning import mse_loss
from surfseg.optimizer import adam_step
from surfseg.predictor import batches

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FinetuneConfig:
    lr_predictor: float = LR_PREDICTOR
    lr_sb: float = LR_SB
    ep_unet: int = EP_UNET
    ep_sb: int = EP_SB
    rounds: int = ROUNDS
    batch_size: int = BATCH_SIZE
    schedule: str = SCHEDULE_ALTERNATE
    tau: float = D2C_TAU
    wrap: bool = False

    def __post_init__(self):
        for name in ("ep_unet", "ep_sb", "rounds"):
            if getattr(self, name) < 0:
                raise BadInputError(
                    "%s must be >= 0, got %r" % (name, getattr(self, name))
                )
        if self.schedule not in (SCHEDULE_ALTERNATE, SCHEDULE_JOINT):
            raise BadInputError("unknown schedule %r" % self.schedule)


@dataclass(frozen=True)
class SampleGradient:
    loss: float
    d_params: np.ndarray
    d_log_w: float


def forward_fit(model, sample, tau):
    """
    Runs the predictor and D2C, returns (gf, d2c cache, predictor context).
    """
    p, context = model.forward(sample)
    gf, _, cache = d2c.fit_field(p, tau, with_cache=True)
    return gf, cache, context


def sample_gradient(
    model, sample, w, tau, wrap, want_params, fitted=None
):
    """
    Returns the SampleGradient of the fine-tuning loss of one sample. The
    predictor gradient is only computed when want_params is set; fitted
    holds a precomputed forward_fit() result for a frozen predictor.
    """
    gf, cache, context = fitted or forward_fit(model, sample, tau)

    system = smoothing.assemble(gf, w, wrap)
    x_star = smoothing.solve(system)
    loss, g_up = mse_loss(x_star, sample.truth)

    if not math.isfinite(loss):
        return SampleGradient(loss, None, 0.0)

    grads = smoothing.backward(system, gf, x_star, g_up)

    d_params = None
    if want_params:
        d_probmap = d2c.backward_field(cache, grads.d_gamma, grads.d_sigma)
        d_params = model.backward(context, d_probmap)

    return SampleGradient(loss, d_params, w * grads.d_w)


def _reduce(results, n_params):
    """
    Sums the per-sample gradients in input order.
    """
    loss = 0.0
    d_params = np.zeros(n_params)
    d_log_w = 0.0
    for r in results:
        loss += r.loss
        if r.d_params is not None:
            d_params += r.d_params
        d_log_w += r.d_log_w
    return loss, d_params, d_log_w


def _epoch_index(state):
    return state.epochs_unet + state.epochs_sb


def _run_epoch(
    model, samples, state, config, update_params, update_w, fits=None
):
    """
    Runs one epoch of mini-batch updates, returns (model, state, mean loss).
    """
    n = len(samples)
    total = 0.0
    n_params = len(model.params)

    for batch in batches(
        n, config.batch_size, state.rng_seed, _epoch_index(state)
    ):
        w = state.w

        def one(k):
            return sample_gradient(
                model,
                samples[k],
                w,
                config.tau,
                config.wrap,
                update_params,
                None if fits is None else fits[k],
            )

        loss, d_params, d_log_w = _reduce(parallel_map(one, batch), n_params)

        if not math.isfinite(loss):
            raise TrainingDiverged(
                "fine-tuning loss is not finite after %d epochs"
                % _epoch_index(state),
                state,
            )

        if update_params:
            group = adam_step(state.predictor, d_params, config.lr_predictor)
            state = state.with_predictor(group)
            model = model.with_params(group.params)

        if update_w:
            group = adam_step(state.smoothness, [d_log_w], config.lr_sb)
            state = state.with_smoothness(group)

        total += loss

    return model, state, total / n


def _frozen_fits(model, samples, tau):
    return parallel_map(lambda s: forward_fit(model, s, tau), samples)


def _predictor_phase(model, train_set, state, config):
    for _ in range(config.ep_unet):
        if model.trainable:
            model, state, loss = _run_epoch(
                model, train_set, state, config, True, False
            )
            log.debug(
                "predictor epoch %d: loss %.6g", state.epochs_unet + 1, loss
            )
        state = replace(state, epochs_unet=state.epochs_unet + 1)
    return model, state


def _smoothing_phase(model, val_set, state, config, fits):
    if config.ep_sb > 0 and fits is None:
        fits = _frozen_fits(model, val_set, config.tau)

    for _ in range(config.ep_sb):
        model, state, loss = _run_epoch(
            model, val_set, state, config, False, True, fits
        )
        log.debug(
            "smoothing epoch %d: loss %.6g, w_comp %.6g",
            state.epochs_sb + 1,
            loss,
            state.w,
        )
        state = replace(state, epochs_sb=state.epochs_sb + 1)
    return state


def _check_splits(train_set, val_set):
    if len(train_set) == 0:
        raise EmptySplit("train")
    if val_set is not None and len(val_set) == 0:
        raise EmptySplit("val")


def alternate_finetune(model, train_set, val_set, state, config):
    """
    Runs the alternating schedule and returns the final TrainState. The
    predictor parameters in state override the ones of model.
    """
    train_set = list(train_set)
    val_set = list(val_set)
    _check_splits(train_set, val_set)

    model = model.with_params(state.predictor_params)

    # a frozen predictor gives the same fits in every round
    fits = None
    if not model.trainable:
        fits = _frozen_fits(model, val_set, config.tau)

    for r in range(config.rounds):
        model, state = _predictor_phase(model, train_set, state, config)
        state = _smoothing_phase(model, val_set, state, config, fits)
        state = replace(state, rounds_done=state.rounds_done + 1)

        log.info(
            "fine-tuning round %d/%d: w_comp %.6g",
            r + 1,
            config.rounds,
            state.w,
        )

    return state


def joint_finetune(model, train_set, state, config):
    """
    Trains the predictor and theta together on the training split. The
    validation split is not used.
    """
    train_set = list(train_set)
    _check_splits(train_set, None)

    model = model.with_params(state.predictor_params)
    fits = None
    if not model.trainable:
        fits = _frozen_fits(model, train_set, config.tau)

    for r in range(config.rounds):
        for _ in range(config.ep_unet):
            model, state, loss = _run_epoch(
                model, train_set, state, config, model.trainable, True, fits
            )
            surfseg_log.trace(log, "joint epoch loss %.6g", loss)
            state = replace(
                state,
                epochs_unet=state.epochs_unet + 1,
                epochs_sb=state.epochs_sb + 1,
            )
        state = replace(state, rounds_done=state.rounds_done + 1)

        log.info(
            "joint fine-tuning round %d/%d: w_comp %.6g",
            r + 1,
            config.rounds,
            state.w,
        )

    return state


def finetune(model, train_set, val_set, state, config):
    """
    Runs the schedule named by config.schedule.
    """
    if config.schedule == SCHEDULE_JOINT:
        return joint_finetune(model, train_set, state, config)
    return alternate_finetune(model, train_set, val_set, state, config)
