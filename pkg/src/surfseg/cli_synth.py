"""
surfseg synth: writes a synthetic dataset.

The dataset is described by the synth, dataset and (optionally) oracle
sections of the run configuration. With an oracle section, every sample
also gets an oracle probability map.
"""

import logging

from surfseg.run_config import load_run_config
from surfseg.synth import gen_dataset

log = logging.getLogger(__name__)


def register(subparsers, parents):
    parser = subparsers.add_parser(
        "synth",
        parents=parents,
        help="generate a synthetic dataset",
        description="Generate a synthetic dataset and its manifest.",
    )
    parser.add_argument(
        "--out", required=True, help="directory where to write the dataset"
    )
    parser.set_defaults(func=cli_synth)


def cli_synth(args):
    config = load_run_config(args.config).with_seed(args.seed)

    return gen_dataset(
        config.synth,
        args.out,
        n_samples=config.dataset.n_samples,
        split=config.dataset.split,
        oracle=config.oracle,
    )
