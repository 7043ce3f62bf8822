"""Backend selection for the learning kernels.

``COMMITMENT_LAB_BACKEND=numpy`` forces the pure-numpy path; the default is
``numba`` when it can be imported.
"""

import os
import warnings

from . import _np

BACKEND_ENV = "COMMITMENT_LAB_BACKEND"
BACKENDS = ("numba", "numpy")

try:
    from . import _jit
except ImportError:  # pragma: no cover - numba is a declared dependency
    _jit = None


def get_backend(name=None):
    """Return the kernel module for ``name`` (or the env-selected default)."""
    if name is None:
        name = os.environ.get(BACKEND_ENV, "numba").strip().lower() or "numba"
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; expected one of {BACKENDS}")
    if name == "numba":
        if _jit is None:
            warnings.warn("numba not importable, falling back to numpy kernels")
            return _np
        return _jit
    return _np


def backend_name(module=None):
    module = module or get_backend()
    return "numba" if module is _jit and _jit is not None else "numpy"
