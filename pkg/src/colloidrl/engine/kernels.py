"""Kernel backend selection.

The compiled extension is preferred; set ``COLLOIDRL_PURE_PYTHON=1`` to
force the numpy implementation.
"""

from __future__ import annotations

import importlib
import os
from types import ModuleType

from . import _kernels_py


def _load_compiled() -> ModuleType | None:
    try:
        return importlib.import_module("colloidrl.engine._kernels")
    except ImportError:
        return None


def get_backend(name: str | None = None) -> ModuleType:
    """Return a kernel module: ``"cython"``, ``"python"`` or ``None`` for the default."""
    if name == "python":
        return _kernels_py
    compiled = _load_compiled()
    if name == "cython":
        if compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return compiled
    if name is not None:
        raise ValueError(f"unknown backend {name!r}")
    if os.environ.get("COLLOIDRL_PURE_PYTHON", "") not in ("", "0"):
        return _kernels_py
    return compiled if compiled is not None else _kernels_py


def available_backends() -> list[str]:
    return ["cython", "python"] if _load_compiled() is not None else ["python"]


_default = get_backend()
BACKEND: str = _default.BACKEND
wca_forces = _default.wca_forces
langevin_step = _default.langevin_step
