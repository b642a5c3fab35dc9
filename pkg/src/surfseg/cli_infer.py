"""
surfseg infer, fit-gauss and smooth.

infer runs the inference pipeline on one image: predictor, column softmax
map, D2C, then the smoothing block unless --no-sb is given. fit-gauss and
smooth run the D2C and smoothing blocks on their own, reading and writing
the CSV formats of file_utils.
"""

import logging
import sys
import time
from contextlib import contextmanager

from surfseg import d2c, file_utils, smoothing
from surfseg.checkpoint import read_checkpoint
from surfseg.defaults import ENERGY_FLOAT_FORMAT
from surfseg.errors import BadInputError
from surfseg.geometry import normalize_intensity
from surfseg.grid import Kind, SurfaceTrace
from surfseg.predictor import predict
from surfseg.run_config import load_run_config

log = logging.getLogger(__name__)


def register(subparsers, parents):
    parser = subparsers.add_parser(
        "infer",
        parents=parents,
        help="segment the surface of an image",
        description="Run predictor, D2C and smoothing block on an image.",
    )
    parser.add_argument("--model", required=True, help="model or checkpoint")
    parser.add_argument("--image", required=True, help="image CSV file")
    parser.add_argument(
        "--probmap",
        action="store_true",
        help="the input is already a probability map, skip the predictor",
    )
    parser.add_argument(
        "--no-sb",
        dest="no_sb",
        action="store_true",
        help="output the D2C means, without smoothing",
    )
    parser.add_argument("--w", type=float, help="override the learned w_comp")
    parser.add_argument("--tau", type=float, help="D2C relative cutoff")
    add_wrap_option(parser)
    parser.add_argument(
        "--report",
        action="store_true",
        help="print a JSON summary on stderr",
    )
    parser.add_argument(
        "--time", action="store_true", help="print stage timings on stderr"
    )
    add_out_option(parser)
    parser.set_defaults(func=cli_infer)

    parser = subparsers.add_parser(
        "fit-gauss",
        parents=parents,
        help="fit the Gaussian field of a probability map",
        description="Fit a Gaussian to every column of a probability map.",
    )
    parser.add_argument("--probmap", required=True, help="probability map CSV")
    parser.add_argument("--tau", type=float, help="D2C relative cutoff")
    parser.add_argument(
        "--report", action="store_true", help="add a line of fallback flags"
    )
    add_out_option(parser)
    parser.set_defaults(func=cli_fit_gauss)

    parser = subparsers.add_parser(
        "smooth",
        parents=parents,
        help="solve the smoothing block",
        description="Find the surface minimizing the smoothing energy.",
    )
    parser.add_argument(
        "--gaussians", required=True, help="gamma and sigma CSV file"
    )
    parser.add_argument(
        "--w", type=float, required=True, help="smoothness weight w_comp"
    )
    parser.add_argument(
        "--energy", action="store_true", help="also print the optimal energy"
    )
    add_wrap_option(parser)
    add_out_option(parser)
    parser.set_defaults(func=cli_smooth)


def add_out_option(parser):
    parser.add_argument(
        "--out", default="-", help="output CSV file, stdout by default"
    )


def add_wrap_option(parser):
    parser.add_argument(
        "--wrap",
        action="store_true",
        help="make the first and last columns neighbors",
    )


class StageTimer:
    """
    Measures the wall time of the pipeline stages.
    """

    def __init__(self):
        self.stages = []

    @contextmanager
    def stage(self, name):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.stages.append((name, time.perf_counter() - start))

    def print(self, stream=None):
        stream = stream or sys.stderr
        for name, seconds in self.stages:
            print("%-10s %.6f s" % (name, seconds), file=stream)


def resolve_tau(args, config):
    return config.tau if args.tau is None else args.tau


def cli_infer(args):
    config = load_run_config(args.config).with_seed(args.seed)
    tau = resolve_tau(args, config)
    wrap = args.wrap or config.wrap
    timer = StageTimer()

    model, state = read_checkpoint(args.model)

    with timer.stage("predictor"):
        if args.probmap:
            p = file_utils.read_grid(args.image, Kind.ProbMap)
        elif not model.trainable:
            raise BadInputError(
                "a %s model reads probability maps, use --probmap"
                % model.kind
            )
        else:
            img = file_utils.read_grid(args.image)
            img = normalize_intensity(img, config.preprocess.intensity)
            p = predict(model, img)

    with timer.stage("D2C"):
        gf, reports = d2c.fit_field(p, tau)

    report = {
        "fallback_columns": sum(1 for r in reports if r.fallback_used),
        "n_cols": gf.n_cols,
        "w": None,
        "energy": None,
    }

    if args.no_sb:
        x = SurfaceTrace(gf.gamma)
    else:
        w = state.w if args.w is None else args.w
        with timer.stage("SB"):
            x, system = smoothing.smooth(gf, w, wrap)
        report["w"] = w
        report["energy"] = smoothing.energy(system, gf, x)

    file_utils.write_trace(args.out, x)

    if args.time:
        timer.print()
    if args.report:
        sys.stderr.write(file_utils.dumps_json(report))

    return x


def cli_fit_gauss(args):
    config = load_run_config(args.config)
    tau = resolve_tau(args, config)

    p = file_utils.read_grid(args.probmap, Kind.ProbMap)
    gf, reports = d2c.fit_field(p, tau)

    fallback = [r.fallback_used for r in reports] if args.report else None
    file_utils.write_gaussians(args.out, gf, fallback)

    return gf


def cli_smooth(args):
    config = load_run_config(args.config)
    wrap = args.wrap or config.wrap

    gf = file_utils.read_gaussians(args.gaussians)
    x, system = smoothing.smooth(gf, args.w, wrap)

    file_utils.write_trace(args.out, x)

    if args.energy:
        print(ENERGY_FLOAT_FORMAT % smoothing.energy(system, gf, x))

    return x
