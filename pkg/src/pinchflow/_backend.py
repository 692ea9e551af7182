"""Kernel backend selection.

The compiled numba path is the default; set ``PINCHFLOW_BACKEND=numpy`` to
force the pure numpy/scipy fallback (or ``numba`` to insist on the compiled
path).  Both expose the same functions: ``step_once``, ``curvature_diag``,
``advance`` and ``make_scratch``.
"""

from __future__ import annotations

import os
import warnings

_ENV_VAR = "PINCHFLOW_BACKEND"
_selected = None


def _load(name: str):
    if name == "numpy":
        from . import _kernels_numpy
        return _kernels_numpy
    if name == "numba":
        from . import _kernels_numba
        return _kernels_numba
    raise ValueError(f"unknown backend {name!r}; choose 'numba' or 'numpy'")


def get_backend():
    """Currently selected kernel module (env-driven, lazily resolved)."""
    global _selected
    if _selected is None:
        requested = os.environ.get(_ENV_VAR, "").strip().lower()
        if requested:
            _selected = _load(requested)
        else:
            try:
                _selected = _load("numba")
            except ImportError as exc:  # pragma: no cover - depends on env
                warnings.warn(f"numba backend unavailable ({exc}); "
                              f"falling back to the numpy kernels")
                _selected = _load("numpy")
    return _selected


def set_backend(name: str):
    """Force a backend programmatically (mainly for tests and benchmarks)."""
    global _selected
    _selected = _load(name)
    return _selected


def backend_name() -> str:
    return get_backend().NAME
