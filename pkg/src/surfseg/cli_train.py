"""
surfseg pretrain and surfseg finetune.

pretrain trains the linear patch predictor on the train split of a dataset
with the KLD loss and writes a model file. finetune reads a model file (or
uses the oracle probability maps of the dataset with --oracle) and runs the
configured fine-tuning schedule, the predictor on the train split and the
smoothness weight on the val split.
"""

import dataclasses
import logging

from surfseg.checkpoint import read_checkpoint, write_checkpoint
from surfseg.errors import BadInputError
from surfseg.finetune import finetune
from surfseg.geometry import normalize_intensity
from surfseg.optimizer import initial_state
from surfseg.predictor import ProbMapPredictor, pretrain
from surfseg.run_config import load_run_config
from surfseg.synth import load_dataset

log = logging.getLogger(__name__)


def register(subparsers, parents):
    parser = subparsers.add_parser(
        "pretrain",
        parents=parents,
        help="pretrain the predictor",
        description="Pretrain the predictor with the KLD loss.",
    )
    parser.add_argument("--data", required=True, help="dataset manifest")
    parser.add_argument("--out", required=True, help="model file to write")
    parser.add_argument("--epochs", type=int, help="override ep_pretrain")
    parser.add_argument("--lr", type=float, help="override lr_pretrain")
    parser.set_defaults(func=cli_pretrain)

    parser = subparsers.add_parser(
        "finetune",
        parents=parents,
        help="fine-tune the predictor and the smoothness weight",
        description="Run the fine-tuning schedule on a pretrained model.",
    )
    parser.add_argument("--data", required=True, help="dataset manifest")
    parser.add_argument("--model", help="pretrained model file")
    parser.add_argument("--out", required=True, help="checkpoint to write")
    parser.add_argument(
        "--oracle",
        action="store_true",
        help="use the oracle probability maps of the dataset",
    )
    parser.set_defaults(func=cli_finetune)


def load_split(config, manifest, split, with_probmap=False):
    """
    Loads one split of a dataset with the configured intensity
    normalization applied to its images.
    """
    samples = load_dataset(manifest, split, with_probmap)
    mode = config.preprocess.intensity

    return [
        dataclasses.replace(s, image=normalize_intensity(s.image, mode))
        for s in samples
    ]


def cli_pretrain(args):
    config = load_run_config(args.config).with_seed(args.seed)
    training = config.training

    epochs = training.ep_pretrain if args.epochs is None else args.epochs
    lr = training.lr_pretrain if args.lr is None else args.lr

    train_set = load_split(config, args.data, "train")
    log.info(
        "pretraining on %d samples for %d epochs, lr %g",
        len(train_set),
        epochs,
        lr,
    )

    result = pretrain(
        config.predictor.build(),
        train_set,
        sigma_rel=training.sigma_rel,
        lr=lr,
        epochs=epochs,
        seed=training.seed,
        batch_size=training.batch_size,
        augment_ops=training.augment,
    )

    state = initial_state(
        result.model.params, training.w_init, training.seed, training.schedule
    )
    write_checkpoint(args.out, result.model, state)
    return result


def cli_finetune(args):
    config = load_run_config(args.config).with_seed(args.seed)
    training = config.training

    if args.model is not None:
        model, state = read_checkpoint(args.model)
    elif args.oracle:
        state = initial_state(
            [], training.w_init, training.seed, training.schedule
        )
    else:
        raise BadInputError("finetune needs --model, or --oracle")

    if args.oracle:
        model = ProbMapPredictor()

    state = dataclasses.replace(state, schedule=training.schedule)
    if args.seed is not None:
        state = dataclasses.replace(state, rng_seed=training.seed)

    train_set = load_split(config, args.data, "train", args.oracle)
    val_set = load_split(config, args.data, "val", args.oracle)

    log.info(
        "fine-tuning on %d train and %d val samples, w_comp %g",
        len(train_set),
        len(val_set),
        state.w,
    )

    state = finetune(
        model,
        train_set,
        val_set,
        state,
        training.finetune_config(config.tau, config.wrap),
    )

    write_checkpoint(args.out, model.with_params(state.predictor_params), state)
    return state
