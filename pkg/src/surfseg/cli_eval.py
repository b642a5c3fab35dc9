"""
surfseg eval: compares predicted surfaces with ground truth surfaces.

Predictions and truths are given as two lists of SurfaceTrace CSV files,
paired in order. The output is a JSON document with one record per sample
and the mean and standard deviation of every metric, rounded to 6
significant digits.
"""

import logging
import os.path

from surfseg import file_utils, metrics
from surfseg.defaults import EVAL_SIGNIFICANT_DIGITS
from surfseg.errors import BadInputError
from surfseg.run_config import load_run_config

log = logging.getLogger(__name__)


def register(subparsers, parents):
    parser = subparsers.add_parser(
        "eval",
        parents=parents,
        help="compute evaluation metrics",
        description="Compute UMSP, JM, PAD and HD of predicted surfaces.",
    )
    parser.add_argument(
        "--pred", required=True, nargs="+", help="predicted surface CSV files"
    )
    parser.add_argument(
        "--truth", required=True, nargs="+", help="truth surface CSV files"
    )
    parser.add_argument(
        "--metrics",
        default=",".join(metrics.METRICS),
        help="comma separated subset of %s" % ",".join(metrics.METRICS),
    )
    parser.add_argument(
        "--n-rows",
        dest="n_rows",
        type=int,
        help="rows of the surface grid for the region metrics",
    )
    parser.add_argument(
        "--out", default="-", help="output JSON file, stdout by default"
    )
    parser.set_defaults(func=cli_eval)


def parse_metrics(text):
    names = [name.strip() for name in text.split(",") if name.strip()]
    unknown = [name for name in names if name not in metrics.METRICS]
    if unknown or not names:
        raise BadInputError(
            "unknown metrics %r, expected a subset of %s"
            % (text, ",".join(metrics.METRICS))
        )
    return tuple(name for name in metrics.METRICS if name in names)


def round_significant(value, digits=EVAL_SIGNIFICANT_DIGITS):
    return float("%.*g" % (digits, value))


def _rounded(record):
    return {name: round_significant(v) for name, v in record.items()}


def cli_eval(args):
    config = load_run_config(args.config)
    selected = parse_metrics(args.metrics)

    if len(args.pred) != len(args.truth):
        raise BadInputError(
            "got %d predictions and %d truths"
            % (len(args.pred), len(args.truth))
        )

    records = []
    samples = []
    for pred_path, truth_path in zip(args.pred, args.truth):
        pred = file_utils.read_trace(pred_path)
        truth = file_utils.read_trace(truth_path)

        record = metrics.evaluate(
            pred,
            truth,
            spacing=config.spacing,
            metrics=selected,
            n_rows=args.n_rows,
            polar=config.polar,
        )
        log.debug("%s: %s", pred_path, record)

        records.append(record)
        samples.append(
            dict(_rounded(record), name=os.path.basename(pred_path))
        )

    summary = {
        name: _rounded(stats)
        for name, stats in metrics.summarize(records).items()
    }
    document = {
        "samples": samples,
        "summary": summary,
        "unit": config.spacing.unit_label,
    }

    if args.out == "-":
        print(file_utils.dumps_json(document), end="")
    else:
        file_utils.write_json(args.out, document)

    return document
