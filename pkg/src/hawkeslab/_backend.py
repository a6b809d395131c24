"""Selection of the thinning-kernel backend.

The compiled extension (``hawkeslab._core``) is preferred; the pure-Python
reference (``hawkeslab._kernel_py``) is the fallback when the extension is
unavailable.  Both produce bitwise-identical output, so the choice only
affects speed.  Set ``HAWKES_LAB_BACKEND=python`` (or ``cython``) to force
one, e.g. for the parity tests and the benchmark.
"""

from __future__ import annotations

import os
import warnings

from . import _kernel_py

try:
    from . import _core
except ImportError:  # pragma: no cover - exercised only in source-tree runs
    _core = None

_ENV = "HAWKES_LAB_BACKEND"
_BACKENDS = {"python": _kernel_py}
if _core is not None:
    _BACKENDS["cython"] = _core


def get_kernel(name: str | None = None):
    """Kernel module for ``name`` (None/'auto' picks the fastest available)."""
    if name is None:
        name = os.environ.get(_ENV, "auto")
    name = name.lower()
    if name == "auto":
        if _core is not None:
            return _core
        warnings.warn(
            "hawkeslab._core extension not built; falling back to the slow "
            "pure-Python kernel",
            RuntimeWarning,
            stacklevel=2,
        )
        return _kernel_py
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown backend {name!r}; available: {sorted(_BACKENDS)} or 'auto'"
        ) from None


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))
