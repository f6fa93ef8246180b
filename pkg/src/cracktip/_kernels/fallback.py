"""Pure-numpy stencil kernels (reference implementations).

The compiled module mirrors these exactly; the import-time selector in
``__init__`` prefers the compiled versions for 2D/3D arrays.  All
operators act on full structured-grid arrays; masking is handled by the
caller through zero cell weights.
"""

from __future__ import annotations

import numpy as np


def lap_apply(u: np.ndarray, weights) -> np.ndarray:
    """Apply the edge-weighted graph Laplacian  sum_d D_d^T W_d D_d  u.

    ``weights[d]`` holds one weight per grid edge along axis d (shape of
    ``u`` with that axis shortened by one).  The quadratic form is
    sum_e W_e (u_j - u_i)^2, so zero-weight edges decouple nodes.
    """
    out = np.zeros_like(u)
    for ax, W in enumerate(weights):
        flux = W * np.diff(u, axis=ax)
        lo = [slice(None)] * u.ndim
        hi = [slice(None)] * u.ndim
        lo[ax] = slice(0, -1)
        hi[ax] = slice(1, None)
        out[tuple(lo)] -= flux
        out[tuple(hi)] += flux
    return out


def lap_diag(shape, weights) -> np.ndarray:
    """Diagonal of the edge-weighted Laplacian (sum of incident edge weights)."""
    diag = np.zeros(shape)
    for ax, W in enumerate(weights):
        lo = [slice(None)] * len(shape)
        hi = [slice(None)] * len(shape)
        lo[ax] = slice(0, -1)
        hi[ax] = slice(1, None)
        diag[tuple(lo)] += W
        diag[tuple(hi)] += W
    return diag


def cell_grad_sq(u: np.ndarray, h: float) -> np.ndarray:
    """Per-cell squared-gradient form: for each direction, the mean of the
    squared forward differences over the 2^{d-1} parallel cell edges."""
    g = None
    d = u.ndim
    for ax in range(d):
        sq = (np.diff(u, axis=ax) / h) ** 2
        for other in range(d):
            if other == ax:
                continue
            lo = [slice(None)] * d
            hi = [slice(None)] * d
            lo[other] = slice(0, -1)
            hi[other] = slice(1, None)
            sq = 0.5 * (sq[tuple(lo)] + sq[tuple(hi)])
        g = sq if g is None else g + sq
    return g


def cell_mean(a: np.ndarray) -> np.ndarray:
    """Per-cell mean of a node array over the 2^d cell corners."""
    m = a
    for ax in range(a.ndim):
        lo = [slice(None)] * a.ndim
        hi = [slice(None)] * a.ndim
        lo[ax] = slice(0, -1)
        hi[ax] = slice(1, None)
        m = 0.5 * (m[tuple(lo)] + m[tuple(hi)])
    return m


def _windowed_avg(a: np.ndarray, ax: int) -> np.ndarray:
    pad = [(0, 0)] * a.ndim
    pad[ax] = (1, 1)
    ap = np.pad(a, pad)
    lo = [slice(None)] * a.ndim
    hi = [slice(None)] * a.ndim
    lo[ax] = slice(0, -1)
    hi[ax] = slice(1, None)
    return 0.5 * (ap[tuple(lo)] + ap[tuple(hi)])


def edge_weights(cellw: np.ndarray, axis: int) -> np.ndarray:
    """Edge array along ``axis``: (1/2^{d-1}) sum of the adjacent cell
    weights (cells outside the grid count as zero)."""
    w = cellw
    for ax in range(cellw.ndim):
        if ax != axis:
            w = _windowed_avg(w, ax)
    return w


def node_cell_avg(cellw: np.ndarray) -> np.ndarray:
    """Node array: (1/2^d) sum of the incident cell values."""
    w = cellw
    for ax in range(cellw.ndim):
        w = _windowed_avg(w, ax)
    return w
