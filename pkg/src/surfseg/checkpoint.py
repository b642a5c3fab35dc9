"""
Checkpoint files.

A checkpoint stores a predictor and its TrainState. The file starts with
one line of JSON, the header, followed by the payload: a flat array of
little-endian float64 values. The payload holds, for each parameter group
listed in the header (predictor, then log_w), the parameters then the Adam
first and second moments. The header declares the payload length.

Pretrained model files use the same format, with fresh counters.
"""

import json
import logging
import os.path

import numpy as np

from surfseg.errors import FormatError
from surfseg.optimizer import AdamGroup, TrainState
from surfseg.predictor import (
    LinearPatchScorer,
    OracleNoiseSpec,
    OraclePredictor,
    ProbMapPredictor,
)

log = logging.getLogger(__name__)

FORMAT_NAME = "surfseg-checkpoint"
FORMAT_VERSION = 1
PAYLOAD_DTYPE = np.dtype("<f8")
GROUPS = ("predictor", "log_w")
HEADER_KEYS = (
    "epochs_sb",
    "epochs_unet",
    "groups",
    "log_w",
    "model",
    "payload_length",
    "rng_seed",
    "rounds_done",
    "schedule",
)


def _model_header(model):
    header = model.describe()
    if isinstance(model, OraclePredictor):
        spec = model.spec
        header["oracle"] = {
            "corrupt_fraction": spec.corrupt_fraction,
            "position_noise_std": spec.position_noise_std,
            "sigma_emit": spec.sigma_emit,
            "corrupt_sigma": spec.corrupt_sigma,
            "seed": spec.seed,
        }
    return header


def _model_from_header(path, header, params):
    kind = header.get("kind")

    if kind == LinearPatchScorer.kind:
        return LinearPatchScorer(
            patch_rows=int(header["patch_rows"]),
            patch_cols=int(header["patch_cols"]),
            weights=params,
            temperature=float(header["temperature"]),
        )
    if kind == OraclePredictor.kind:
        return OraclePredictor(OracleNoiseSpec(**header["oracle"]))
    if kind == ProbMapPredictor.kind:
        return ProbMapPredictor()

    raise FormatError(path, "unknown model kind %r" % kind)


def encode(model, state):
    """
    Returns the checkpoint file contents as bytes.
    """
    groups = (state.predictor, state.smoothness)

    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "model": _model_header(model),
        "log_w": state.log_w,
        "epochs_unet": state.epochs_unet,
        "epochs_sb": state.epochs_sb,
        "rounds_done": state.rounds_done,
        "schedule": state.schedule,
        "rng_seed": state.rng_seed,
        "groups": [
            {"name": name, "length": len(g), "step": g.step}
            for name, g in zip(GROUPS, groups)
        ],
        "payload_length": sum(3 * len(g) for g in groups),
    }

    payload = np.concatenate(
        [np.concatenate([g.params, g.m, g.v]) for g in groups]
    ).astype(PAYLOAD_DTYPE)

    line = json.dumps(header, sort_keys=True, separators=(",", ":"))
    return line.encode("utf-8") + b"\n" + payload.tobytes()


def decode(data, path="<checkpoint>"):
    """
    Returns (model, TrainState) from checkpoint file contents.
    """
    newline = data.find(b"\n")
    if newline < 0:
        raise FormatError(path, "missing checkpoint header")

    try:
        header = json.loads(data[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(path, "invalid checkpoint header: %s" % e)

    if not isinstance(header, dict) or header.get("format") != FORMAT_NAME:
        raise FormatError(path, "not a surfseg checkpoint")
    if header.get("version") != FORMAT_VERSION:
        raise FormatError(
            path, "unsupported checkpoint version %r" % header.get("version")
        )

    missing = [k for k in HEADER_KEYS if k not in header]
    if missing:
        raise FormatError(
            path, "checkpoint header lacks %s" % ", ".join(missing)
        )

    raw = data[newline + 1 :]
    length = int(header["payload_length"])
    if len(raw) != length * PAYLOAD_DTYPE.itemsize:
        raise FormatError(
            path,
            "payload has %d bytes, header declares %d values"
            % (len(raw), length),
        )
    payload = np.frombuffer(raw, dtype=PAYLOAD_DTYPE).astype(np.float64)

    groups = []
    offset = 0
    for spec, name in zip(header["groups"], GROUPS):
        if spec["name"] != name:
            raise FormatError(path, "unexpected group %r" % spec["name"])
        n = int(spec["length"])
        params = payload[offset : offset + n]
        m = payload[offset + n : offset + 2 * n]
        v = payload[offset + 2 * n : offset + 3 * n]
        groups.append(AdamGroup(params, m, v, int(spec["step"])))
        offset += 3 * n

    if len(groups) != len(GROUPS):
        raise FormatError(path, "expected %d parameter groups" % len(GROUPS))

    state = TrainState(
        predictor=groups[0],
        smoothness=groups[1],
        epochs_unet=int(header["epochs_unet"]),
        epochs_sb=int(header["epochs_sb"]),
        rounds_done=int(header["rounds_done"]),
        schedule=header["schedule"],
        rng_seed=int(header["rng_seed"]),
    )
    model = _model_from_header(path, header["model"], groups[0].params)

    return model, state


def write_checkpoint(path, model, state):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    with open(path, "wb") as f:
        f.write(encode(model, state))

    log.debug("wrote checkpoint %s, w_comp %.6g", path, state.w)


def read_checkpoint(path):
    with open(path, "rb") as f:
        return decode(f.read(), path)
