"""Path kernels, compiled when available.

Set ``RIESZLAB_PURE_PYTHON=1`` to force the NumPy implementation.
"""

import os

from . import _pathcore_py

BACKEND = "python"
if not os.environ.get("RIESZLAB_PURE_PYTHON"):
    try:
        from . import _pathcore as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pathcore_py
else:
    _impl = _pathcore_py

BACKENDS = {"python": _pathcore_py}
if BACKEND == "cython":
    BACKENDS["cython"] = _impl


def get_backend(name: str | None = None):
    if name is None:
        return _impl
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None


heisenberg_paths = _impl.heisenberg_paths
martingale_paths = _impl.martingale_paths
