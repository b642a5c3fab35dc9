"""
Facilities that depend on the process environment.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor

from surfseg.defaults import THREADS_ENV
from surfseg.errors import ConfigError

log = logging.getLogger(__name__)


def thread_count():
    """
    Returns the number of worker threads allowed by SURFSEG_THREADS, where 0
    or an unset variable means one thread per CPU.
    """
    value = os.getenv(THREADS_ENV, "0").strip() or "0"

    try:
        count = int(value)
    except ValueError:
        raise ConfigError(THREADS_ENV, "expected an integer, got %r" % value)

    if count < 0:
        raise ConfigError(THREADS_ENV, "expected a count >= 0, got %d" % count)

    if count == 0:
        count = os.cpu_count() or 1

    return count


def parallel_map(fn, items):
    """
    Applies fn to every item and returns the results in input order. Work is
    spread over thread_count() threads; the caller reduces the results
    sequentially, so the outcome doesn't depend on scheduling.
    """
    items = list(items)
    workers = min(thread_count(), len(items))

    if workers <= 1:
        return [fn(item) for item in items]

    log.debug("running %d tasks on %d threads", len(items), workers)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
