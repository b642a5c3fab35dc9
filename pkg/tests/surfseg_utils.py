import os
import os.path
import shutil
import subprocess
import sys
import tempfile

import numpy as np
from scipy import linalg

from surfseg.grid import GaussianField, probmap
from surfseg.random_utils import generator

COMMAND_TIMEOUT = 300

SRC_DIR = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src"
)


# Append stderr output to default CalledProcessError message
class CalledProcessError(subprocess.CalledProcessError):
    def __str__(self):
        return super().__str__() + "\n\t" + self.stderr


class SurfSegCtl:
    """
    Runs the surfseg command line in a subprocess, from a working directory
    where tests write their files.
    """

    def __init__(self, workdir=None):
        self.workdir = workdir or tempfile.mkdtemp(prefix="surfseg-")
        self.program = [sys.executable, "-m", "surfseg"]
        self.last_returncode = None
        self.cmd = ""

        self.env = dict(os.environ)
        path = self.env.get("PYTHONPATH")
        self.env["PYTHONPATH"] = SRC_DIR if not path else SRC_DIR + ":" + path

    def path(self, *names):
        return os.path.join(self.workdir, *names)

    def run(self, *args, timeout=COMMAND_TIMEOUT):
        """
        Runs a surfseg command and returns (out, err, returncode), whatever
        the exit code.
        """
        command = self.program + [str(a) for a in args]
        self.cmd = " ".join(command)

        proc = subprocess.run(
            command,
            cwd=self.workdir,
            env=self.env,
            text=True,
            capture_output=True,
            timeout=timeout,
        )
        self.last_returncode = proc.returncode
        return proc.stdout, proc.stderr, proc.returncode

    def execute(self, *args, timeout=COMMAND_TIMEOUT):
        """
        Runs a surfseg command, raises CalledProcessError when it fails.
        """
        out, err, returncode = self.run(*args, timeout=timeout)

        if returncode > 0:
            raise CalledProcessError(returncode, self.cmd, out, err)

        return out, err

    def write(self, name, text):
        with open(self.path(name), "w") as f:
            f.write(text)
        return self.path(name)

    def read(self, name, mode="r"):
        with open(self.path(name), mode) as f:
            return f.read()

    def destroy(self):
        shutil.rmtree(self.workdir, ignore_errors=True)


#
# Oracles: straightforward dense implementations the library is checked
# against.
#
def dense_hessian(system):
    n = system.n_cols
    h = np.diag(np.array(system.diag))
    for k in range(n - 1):
        h[k, k + 1] = h[k + 1, k] = system.off[k]
    if system.cyclic:
        h[0, n - 1] = h[n - 1, 0] = system.corner
    return h


def dense_solve(system):
    return linalg.solve(dense_hessian(system), np.array(system.rhs))


def dense_energy(gamma, sigma, w, x, cyclic=False):
    gamma, sigma, x = (np.asarray(v, dtype=float) for v in (gamma, sigma, x))
    e = np.sum((x - gamma) ** 2 / (2 * sigma**2))
    for i in range(len(x) - 1):
        e += w * (x[i] - x[i + 1]) ** 2
    if cyclic:
        e += w * (x[-1] - x[0]) ** 2
    return e


def central_difference(fn, h=1e-5):
    return (fn(h) - fn(-h)) / (2 * h)


def relative_error(a, b, floor=1e-8):
    return abs(a - b) / max(abs(a), abs(b), floor)


def random_field(rng, n):
    """
    Returns a random GaussianField with gamma in [0, 100] and sigma in
    [0.5, 20].
    """
    return GaussianField(rng.uniform(0, 100, n), rng.uniform(0.5, 20, n))


def seeded_rng(index=0):
    return generator(20240, 99, index)


def sampled_gaussian(n, gamma, sigma):
    """
    Returns exp(-(j - gamma)^2 / (2 sigma^2)) for j in 0..n-1.
    """
    j = np.arange(n, dtype=float)
    return np.exp(-((j - gamma) ** 2) / (2 * sigma**2))


def gaussian_map(n_rows, gammas, sigmas):
    sigmas = np.broadcast_to(sigmas, np.shape(gammas))
    return probmap(
        np.column_stack(
            [sampled_gaussian(n_rows, g, s) for g, s in zip(gammas, sigmas)]
        )
    )


def weighted_logquad_lstsq(f, tau):
    """
    Weighted log-quadratic least squares fit of a column with numpy, in the
    raw j coordinate.
    """
    f = np.asarray(f, dtype=float)
    idx = np.flatnonzero((f >= tau * f.max()) & (f > 0))
    j = idx.astype(float)
    w = f[idx]
    a = np.column_stack([np.ones_like(j), j, j * j]) * w[:, None]
    y = np.log(f[idx]) * w
    coef, _, _, _ = np.linalg.lstsq(a, y, rcond=None)
    return coef
