"""Backend selection for the hot loops.

The compiled ``_core`` extension is used when it imports; otherwise the numpy
versions in ``_kernels_py`` take over.  Set ``CONREC_PURE_PYTHON=1`` to force
the fallback (used by the benchmark and the backend-agreement tests).
"""

import os

from . import _kernels_py

_compiled = None
if not os.environ.get("CONREC_PURE_PYTHON"):
    try:
        from . import _core as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernels_py

vertex_max_norm = _impl.vertex_max_norm
pocs = _impl.pocs
pocs_batch = _impl.pocs_batch


def get_backend(name=None):
    """Return the kernel module for ``name`` ('compiled', 'python' or None for the active one)."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
