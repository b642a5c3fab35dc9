"""
The run configuration.

A run is configured by a single JSON file made of sections, each section
mapping option names to values. Options are named "section.option" in error
messages, for instance "training.lr_sb". Every option is optional and
defaults to the values in defaults.py; unknown sections and options are
rejected.

    {
      "training": {"lr_sb": 0.01, "rounds": 5, "seed": 7},
      "synth": {"n_cols": 60, "n_rows": 512},
      "dataset": {"n_samples": 100, "split": [0.6, 0.2, 0.2]},
      "oracle": {"corrupt_fraction": 0.2, "position_noise_std": 4.0},
      "spacing": {"row_spacing": 3.24, "unit_label": "um"},
      "tau": 0.001
    }
"""

import dataclasses
import logging
from dataclasses import dataclass, field

from surfseg import file_utils
from surfseg.defaults import (
    BATCH_SIZE,
    D2C_TAU,
    EP_PRETRAIN,
    EP_SB,
    EP_UNET,
    LR_PREDICTOR,
    LR_PRETRAIN,
    LR_SB,
    N_SAMPLES,
    PATCH_COLS,
    PATCH_ROWS,
    ROUNDS,
    SCHEDULE_ALTERNATE,
    SCHEDULE_JOINT,
    SIGMA_REL,
    SPLIT,
    TEMPERATURE,
    W_INIT,
)
from surfseg.errors import BadInputError, ConfigError
from surfseg.finetune import FinetuneConfig
from surfseg.geometry import PolarSpec, parse_op
from surfseg.grid import PixelSpacing
from surfseg.predictor import LinearPatchScorer, OracleNoiseSpec
from surfseg.synth import SynthSpec

log = logging.getLogger(__name__)

INTENSITY_MODES = ("none", "minmax", "zscore")


@dataclass(frozen=True)
class TrainingConfig:
    lr_pretrain: float = LR_PRETRAIN
    ep_pretrain: int = EP_PRETRAIN
    lr_predictor: float = LR_PREDICTOR
    lr_sb: float = LR_SB
    ep_unet: int = EP_UNET
    ep_sb: int = EP_SB
    rounds: int = ROUNDS
    sigma_rel: float = SIGMA_REL
    w_init: float = W_INIT
    seed: int = 0
    batch_size: int = BATCH_SIZE
    schedule: str = SCHEDULE_ALTERNATE
    augment: tuple = ()

    def __post_init__(self):
        for name in (
            "lr_pretrain",
            "lr_predictor",
            "lr_sb",
            "ep_pretrain",
            "ep_unet",
            "ep_sb",
            "rounds",
        ):
            if getattr(self, name) < 0:
                raise BadInputError("%s must be >= 0" % name)
        for name in ("sigma_rel", "w_init"):
            if not getattr(self, name) > 0:
                raise BadInputError("%s must be positive" % name)
        if self.batch_size < 1:
            raise BadInputError("batch_size must be >= 1")
        if self.schedule not in (SCHEDULE_ALTERNATE, SCHEDULE_JOINT):
            raise BadInputError("unknown schedule %r" % self.schedule)
        object.__setattr__(
            self, "augment", tuple(parse_op(op) for op in self.augment)
        )

    def finetune_config(self, tau=D2C_TAU, wrap=False):
        return FinetuneConfig(
            lr_predictor=self.lr_predictor,
            lr_sb=self.lr_sb,
            ep_unet=self.ep_unet,
            ep_sb=self.ep_sb,
            rounds=self.rounds,
            batch_size=self.batch_size,
            schedule=self.schedule,
            tau=tau,
            wrap=wrap,
        )


@dataclass(frozen=True)
class PredictorConfig:
    patch_rows: int = PATCH_ROWS
    patch_cols: int = PATCH_COLS
    temperature: float = TEMPERATURE

    def build(self):
        return LinearPatchScorer(
            self.patch_rows, self.patch_cols, temperature=self.temperature
        )


@dataclass(frozen=True)
class DatasetConfig:
    n_samples: int = N_SAMPLES
    split: tuple = SPLIT

    def __post_init__(self):
        object.__setattr__(self, "split", tuple(self.split))


@dataclass(frozen=True)
class PreprocessConfig:
    intensity: str = "none"

    def __post_init__(self):
        if self.intensity not in INTENSITY_MODES:
            raise BadInputError(
                "intensity must be one of %s" % ", ".join(INTENSITY_MODES)
            )


@dataclass(frozen=True)
class RunConfig:
    training: TrainingConfig = field(default_factory=TrainingConfig)
    predictor: PredictorConfig = field(default_factory=PredictorConfig)
    synth: SynthSpec = field(default_factory=SynthSpec)
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    oracle: OracleNoiseSpec = None
    polar: PolarSpec = None
    spacing: PixelSpacing = field(default_factory=PixelSpacing)
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    tau: float = D2C_TAU

    @property
    def wrap(self):
        return self.polar is not None and self.polar.wrap

    def with_seed(self, seed):
        """
        Returns the config with the training, synth and oracle seeds set to
        seed, as the --seed option does.
        """
        if seed is None:
            return self

        changes = {
            "training": dataclasses.replace(self.training, seed=seed),
            "synth": dataclasses.replace(self.synth, seed=seed),
        }
        if self.oracle is not None:
            changes["oracle"] = dataclasses.replace(self.oracle, seed=seed)
        return dataclasses.replace(self, **changes)


SECTIONS = {
    "training": TrainingConfig,
    "predictor": PredictorConfig,
    "synth": SynthSpec,
    "dataset": DatasetConfig,
    "oracle": OracleNoiseSpec,
    "polar": PolarSpec,
    "spacing": PixelSpacing,
    "preprocess": PreprocessConfig,
}


def _check_value(key, value, default, kind=None):
    """
    Checks that a JSON value has the type of the option default, or of the
    declared field type when the default is None.
    """
    if default is None and kind in (int, tuple):
        default = kind()

    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int) and default is not None:
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, float) or default is None:
        ok = value is None or (
            isinstance(value, (int, float)) and not isinstance(value, bool)
        )
    elif isinstance(default, str):
        ok = isinstance(value, str)
    elif isinstance(default, tuple):
        ok = isinstance(value, list)
    else:
        ok = True

    if not ok:
        raise ConfigError(
            key, "expected a value like %r, got %r" % (default, value)
        )
    if isinstance(value, float) and value != value:
        raise ConfigError(key, "NaN is not a valid value")


def _defaults(cls):
    values = {}
    for f in dataclasses.fields(cls):
        if f.default is not dataclasses.MISSING:
            values[f.name] = (f.default, f.type)
        else:
            values[f.name] = (None, f.type)
    return values


def _parse_section(name, cls, document):
    if not isinstance(document, dict):
        raise ConfigError(name, "expected an object")

    defaults = _defaults(cls)
    for option, value in document.items():
        key = "%s.%s" % (name, option)
        if option not in defaults:
            raise ConfigError(key, "unknown option")
        default, kind = defaults[option]
        _check_value(key, value, default, kind)

    try:
        return cls(**document)
    except TypeError as e:
        raise ConfigError(name, str(e))
    except BadInputError as e:
        option = _guess_option(str(e), document)
        raise ConfigError(option and "%s.%s" % (name, option) or name, str(e))


def _guess_option(message, document):
    for option in sorted(document, key=len, reverse=True):
        if option in message:
            return option
    return None


def parse_run_config(document):
    """
    Returns the RunConfig of a parsed JSON document.
    """
    if not isinstance(document, dict):
        raise ConfigError("(root)", "expected a JSON object")

    values = {}
    for key, section in document.items():
        if key == "tau":
            _check_value("tau", section, D2C_TAU)
            if not 0 < section < 1:
                raise ConfigError("tau", "must be in (0, 1), got %r" % section)
            values["tau"] = float(section)
        elif key in SECTIONS:
            values[key] = _parse_section(key, SECTIONS[key], section)
        else:
            raise ConfigError(key, "unknown section")

    return RunConfig(**values)


def load_run_config(path):
    """
    Reads a run config file, or returns the defaults when path is None.
    """
    if path is None:
        return RunConfig()

    config = parse_run_config(file_utils.read_json(path))
    log.debug("loaded run configuration %s", path)
    return config
