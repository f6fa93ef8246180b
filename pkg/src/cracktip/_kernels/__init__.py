"""Stencil kernels with a compiled fast path.

``BACKEND`` records which implementation is live: "compiled" when the
Cython extension imported, "pure" otherwise.  Set ``CRACKTIP_PURE_PYTHON=1``
in the environment to force the numpy fallback (used by the benchmark and
the backend-equivalence tests).  Only the hot kernels (Laplacian apply,
cell gradients) have compiled versions; the once-per-sweep helpers are
always numpy.
"""

from __future__ import annotations

import importlib
import os

import numpy as np

from . import fallback
from .fallback import cell_mean, edge_weights, lap_diag, node_cell_avg

_core = None
if os.environ.get("CRACKTIP_PURE_PYTHON", "") != "1":
    try:
        _core = importlib.import_module("._core", __name__)
    except ImportError:
        _core = None

BACKEND = "compiled" if _core is not None else "pure"


def _c(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def lap_apply(u: np.ndarray, weights) -> np.ndarray:
    if _core is not None and u.ndim == 2:
        return _core.lap_apply_2d(_c(u), _c(weights[0]), _c(weights[1]))
    if _core is not None and u.ndim == 3:
        return _core.lap_apply_3d(_c(u), _c(weights[0]), _c(weights[1]),
                                  _c(weights[2]))
    return fallback.lap_apply(u, weights)


def cell_grad_sq(u: np.ndarray, h: float) -> np.ndarray:
    if _core is not None and u.ndim == 2:
        return _core.cell_grad_sq_2d(_c(u), h)
    if _core is not None and u.ndim == 3:
        return _core.cell_grad_sq_3d(_c(u), h)
    return fallback.cell_grad_sq(u, h)


__all__ = [
    "BACKEND",
    "lap_apply",
    "lap_diag",
    "cell_grad_sq",
    "cell_mean",
    "edge_weights",
    "node_cell_avg",
]
