"""Numba switch.

Kernels are compiled with numba when it is importable, unless the
environment variable ``DDAHASH_NO_NUMBA`` is set to a truthy value, in which
case the pure-numpy implementations are used instead.  Both variants stay
importable so they can be compared against each other.
"""

import logging
import os

logger = logging.getLogger(__name__)

ENV_FLAG = "DDAHASH_NO_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on the environment
    numba = None
    HAVE_NUMBA = False

DISABLED = os.environ.get(ENV_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}
USE_NUMBA = HAVE_NUMBA and not DISABLED

if DISABLED:
    logger.debug("%s set: using numpy kernels", ENV_FLAG)


def njit(*args, **kwargs):
    """``numba.njit`` when numba is installed, otherwise a no-op decorator."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)

    def wrap(func):
        return func

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return wrap


def backend():
    """Name of the kernel backend selected at import time."""
    return "numba" if USE_NUMBA else "numpy"
