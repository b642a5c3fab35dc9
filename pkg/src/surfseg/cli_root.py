"""
The surfseg command line.

    surfseg [-v|-vv|-q] <command> [options]

Commands:
    synth       generate a synthetic dataset
    pretrain    pretrain the predictor with the KLD loss
    finetune    fine-tune the predictor and the smoothness weight
    infer       segment the surface of one image
    eval        compute evaluation metrics
    fit-gauss   fit the Gaussian field of a probability map
    smooth      solve the smoothing block for a Gaussian field

Exit codes: 0 on success, 1 on internal errors, 2 on bad input (including
command line errors), 3 on numerical failures.
"""

import argparse
import logging
import sys

from surfseg import __version__, cli_eval, cli_infer, cli_synth, cli_train
from surfseg import log as surfseg_log
from surfseg.defaults import (
    EXIT_CODE_BAD_INPUT,
    EXIT_CODE_INTERNAL_ERROR,
    EXIT_CODE_QUIT,
)
from surfseg.errors import SurfsegError

log = logging.getLogger("surfseg.cli")

COMMANDS = (cli_synth, cli_train, cli_infer, cli_eval)


def common_options():
    """
    Returns the parent parser of the options every command accepts.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="log debug messages, twice for trace messages",
    )
    common.add_argument(
        "-q", "--quiet", action="store_true", help="log errors only"
    )
    common.add_argument("--config", help="run configuration JSON file")
    common.add_argument(
        "--seed", type=int, help="override the configured random seeds"
    )
    return common


def build_parser():
    parser = argparse.ArgumentParser(
        prog="surfseg",
        description="Globally optimal terrain-like surface segmentation.",
    )
    parser.add_argument(
        "--version", action="version", version="surfseg " + __version__
    )

    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True

    parents = [common_options()]
    for module in COMMANDS:
        module.register(subparsers, parents)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    surfseg_log.setup(args.verbose, args.quiet)

    try:
        args.func(args)

    except SurfsegError as e:
        log.error("%s", e)
        return e.exit_code

    except OSError as e:
        log.error("%s", e)
        return EXIT_CODE_BAD_INPUT

    except Exception:
        log.critical("unexpected error", exc_info=True)
        return EXIT_CODE_INTERNAL_ERROR

    return EXIT_CODE_QUIT


if __name__ == "__main__":
    sys.exit(main())
