"""Select the compiled kernels when available; ROBINFLOW_PURE=1 forces Python."""
from __future__ import annotations

import os

from . import _pykernels

_compiled = None
if os.environ.get("ROBINFLOW_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]
    except ImportError:  # extension not built
        _compiled = None

kernels = _compiled if _compiled is not None else _pykernels
NAME: str = kernels.NAME


def get(name: str | None = None):
    """Return a kernel module by name ("cython" or "python"); None gives the default."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def available() -> list[str]:
    return ["python"] + (["cython"] if _compiled is not None else [])
