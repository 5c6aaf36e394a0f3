"""Backend selection for the numeric inner loops.

The compiled Cython extension is used when it imports cleanly; otherwise the
numpy implementations are used. ``CJDESIGN_BACKEND=python`` (or ``compiled``)
forces a choice at import time.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

KERNEL_NAMES = (
    "diff_matvec",
    "diff_rmatvec",
    "diff_column",
    "mgs_sweep",
    "weighted_row_sumsq",
    "pair_variances",
    "fill_delta",
)


def available_backends() -> list[str]:
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "compiled")
    return names


def get_backend(name: str = "auto") -> ModuleType:
    """Return the kernel module for ``name`` (``auto``, ``compiled`` or ``python``)."""
    if name == "auto":
        return _compiled if _compiled is not None else _pykernels
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; reinstall with Cython available")
        return _compiled
    if name == "python":
        return _pykernels
    raise ValueError(f"unknown kernel backend {name!r}")


def _select() -> tuple[str, ModuleType]:
    requested = os.environ.get("CJDESIGN_BACKEND", "auto").strip().lower() or "auto"
    module = get_backend(requested)
    return ("compiled" if module is _compiled else "python"), module


BACKEND, _active = _select()


def resolve(backend: str | None = None) -> ModuleType:
    """Kernel module for an optional per-call override; ``None`` means the active one."""
    return _active if backend is None else get_backend(backend)


diff_matvec = _active.diff_matvec
diff_rmatvec = _active.diff_rmatvec
diff_column = _active.diff_column
mgs_sweep = _active.mgs_sweep
weighted_row_sumsq = _active.weighted_row_sumsq
pair_variances = _active.pair_variances
fill_delta = _active.fill_delta
