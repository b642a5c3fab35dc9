"""
Reading and writing the surfseg file formats.

  - Grid2 CSV: one line per row, comma separated floats, no header.
  - SurfaceTrace CSV: one line of N1 floats.
  - Gaussian CSV: line 1 gamma, line 2 sigma, optional line 3 fallback flags.
  - JSON documents (configs, manifests), written with sorted keys so that
    reruns produce byte-identical files.

Floats are written with 17 significant digits for an exact round-trip.
"""

import json
import os
import os.path

import numpy as np

from surfseg.defaults import CSV_FLOAT_FORMAT
from surfseg.errors import FormatError, LengthMismatch
from surfseg.grid import GaussianField, Grid2, Kind, SurfaceTrace


def format_floats(values):
    return ",".join(CSV_FLOAT_FORMAT % v for v in values)


def read_csv_rows(path):
    """
    Returns the list of rows of float values found in a CSV file, skipping
    empty lines.
    """
    rows = []
    with open(path, "r") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if line == "":
                continue
            try:
                rows.append([float(v) for v in line.split(",")])
            except ValueError:
                raise FormatError(path, "line %d is not numeric" % lineno)
    return rows


def write_lines(path, lines):
    """
    Writes lines to path, or to stdout when path is None or "-".
    """
    text = "".join(line + "\n" for line in lines)

    if path is None or path == "-":
        print(text, end="")
        return

    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    with open(path, "w") as f:
        f.write(text)


def read_grid(path, kind=Kind.Image):
    rows = read_csv_rows(path)

    if len(rows) == 0:
        raise FormatError(path, "empty grid")

    width = len(rows[0])
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise FormatError(
                path,
                "line %d has %d fields, expected %d"
                % (lineno, len(row), width),
            )

    return Grid2(np.array(rows), kind)


def write_grid(path, grid):
    write_lines(path, [format_floats(row) for row in grid.data])


def read_trace(path):
    rows = read_csv_rows(path)
    if len(rows) != 1:
        raise FormatError(path, "expected one line, found %d" % len(rows))
    return SurfaceTrace(rows[0])


def write_trace(path, trace):
    write_lines(path, [format_floats(trace.x)])


def read_gaussians(path):
    """
    Reads a Gaussian CSV file: gamma and sigma lines, fallback flags are
    ignored when present.
    """
    rows = read_csv_rows(path)
    if len(rows) < 2:
        raise FormatError(path, "expected gamma and sigma lines")
    if len(rows[0]) != len(rows[1]):
        raise LengthMismatch("sigma line", len(rows[0]), len(rows[1]))
    return GaussianField(rows[0], rows[1])


def write_gaussians(path, gf, fallback=None):
    lines = [format_floats(gf.gamma), format_floats(gf.sigma)]
    if fallback is not None:
        lines.append(",".join("1" if f else "0" for f in fallback))
    write_lines(path, lines)


def read_json(path):
    try:
        with open(path, "r") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(path, "invalid JSON: %s" % e)


def dumps_json(document):
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def write_json(path, document):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    with open(path, "w") as f:
        f.write(dumps_json(document))
