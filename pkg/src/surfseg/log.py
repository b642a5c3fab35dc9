"""
Logging setup for surfseg.

Log lines go to stderr with the format "HH:MM:SS LEVEL message", with the
levels TRACE, DEBUG, INFO, WARN, ERROR and FATAL. The command line -v, -vv
and -q switches select the level, see setup().
"""

import logging
import sys

TRACE = 5

logging.addLevelName(TRACE, "TRACE")
logging.addLevelName(logging.WARNING, "WARN")
logging.addLevelName(logging.CRITICAL, "FATAL")

LOG_FORMAT = "%(asctime)s %(levelname)s %(message)s"
LOG_DATE_FORMAT = "%H:%M:%S"


def level_for(verbose=0, quiet=False):
    """
    Returns the logging level matching the command line switches.
    """
    if quiet:
        return logging.ERROR
    if verbose >= 2:
        return TRACE
    if verbose == 1:
        return logging.DEBUG
    return logging.INFO


def setup(verbose=0, quiet=False, stream=None):
    """
    Configures the "surfseg" logger. Calling setup() again replaces the
    handler, so that each command line run gets its own stream.
    """
    logger = logging.getLogger("surfseg")
    logger.setLevel(level_for(verbose, quiet))

    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT))
    logger.addHandler(handler)
    logger.propagate = False

    return logger


def trace(logger, msg, *args):
    if logger.isEnabledFor(TRACE):
        logger.log(TRACE, msg, *args)
