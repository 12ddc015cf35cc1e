"""Kernel backend selection.

The compiled extension is used when it imports; set ``HEMISHUFFLE_PURE=1``
to force the numpy fallback.
"""

import os

from . import _pykernels

pure = _pykernels

if os.environ.get("HEMISHUFFLE_PURE", "") not in ("", "0"):
    kernels = _pykernels
    NAME = "numpy"
else:
    try:
        from . import _kernels as kernels
        NAME = "cython"
    except ImportError:
        kernels = _pykernels
        NAME = "numpy"

compiled = kernels if NAME == "cython" else None


def resolve_threads(threads=None):
    """Thread cap: explicit value, else ``HEMISHUFFLE_THREADS``, else the CPU count."""
    if threads is None:
        env = os.environ.get("HEMISHUFFLE_THREADS", "")
        threads = int(env) if env.strip() else (os.cpu_count() or 1)
    threads = int(threads)
    if threads < 1:
        raise ValueError("threads must be >= 1")
    return threads
