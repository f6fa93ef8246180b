"""Composite Gauss-Legendre panels, geometric grading, and extrapolation.

Internal helpers shared by the stationarity and competitor modules.  All
rules are tensor products of 1D panels; panel edges are placed so that no
panel ever straddles a crack or an excision boundary.
"""

from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np

__all__ = [
    "gauss_panels",
    "graded_edges",
    "tensor_rule",
    "aitken_limit",
    "richardson_limit",
    "neville_limit",
]

_GAUSS_CACHE = {}


def _leggauss(n: int):
    if n not in _GAUSS_CACHE:
        _GAUSS_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GAUSS_CACHE[n]


def gauss_panels(edges: Sequence[float], n_gauss: int = 8) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss rule on the panels defined by ``edges``.

    Returns (nodes, weights); nodes are strictly interior to each panel,
    so panel edges may sit exactly on discontinuities.
    """
    x, w = _leggauss(n_gauss)
    edges = np.asarray(edges, dtype=float)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def graded_edges(a: float, b: float, n_panels: int, ratio: float = 2.0) -> np.ndarray:
    """Panel edges on [a, b] geometrically refined toward ``a``.

    ratio > 1 concentrates panels near a (each panel ``ratio`` times the
    previous); ratio == 1 is uniform.
    """
    if ratio == 1.0:
        return np.linspace(a, b, n_panels + 1)
    t = (ratio ** np.arange(n_panels + 1) - 1.0) / (ratio ** n_panels - 1.0)
    return a + (b - a) * t


def tensor_rule(rule_a, rule_b):
    """Outer product of two 1D rules -> flattened nodes/weights pair."""
    (xa, wa), (xb, wb) = rule_a, rule_b
    A, B = np.meshgrid(xa, xb, indexing="ij")
    W = np.outer(wa, wb)
    return (A.ravel(), B.ravel()), W.ravel()


def aitken_limit(seq: Sequence[float], atol: float = 0.0) -> Tuple[float, float]:
    """Aitken delta-squared limit of a geometrically converging sequence.

    Returns (limit, error_estimate).  Falls back to the last entry when
    the differences are below ``atol`` (already converged) or when the
    acceleration is ill-conditioned.
    """
    s = np.asarray(seq, dtype=float)
    if len(s) < 3:
        return float(s[-1]), float(abs(s[-1] - s[0])) if len(s) > 1 else np.inf
    d1 = s[-2] - s[-3]
    d2 = s[-1] - s[-2]
    denom = d2 - d1
    if abs(d2) <= atol or abs(denom) <= 1e-300 or abs(denom) < 1e-3 * abs(d2):
        # flat or non-geometric tail: take the last value, spread as error
        return float(s[-1]), float(abs(d2))
    limit = s[-1] - d2 * d2 / denom
    return float(limit), float(abs(limit - s[-1]))


def richardson_limit(eps_values: Sequence[float], values: Sequence[float],
                     exponents: Sequence[float]) -> Tuple[float, float]:
    """Extrapolate values(eps) -> eps=0 assuming an expansion
    v(eps) = v0 + sum_k a_k eps^{p_k} with known exponents p_k.

    Returns (v0, error_estimate); the estimate compares the full model
    against a leading-order two-point fit.
    """
    eps = np.asarray(eps_values, dtype=float)
    v = np.asarray(values, dtype=float)
    A = np.column_stack([np.ones_like(eps)] + [eps ** p for p in exponents])
    coef, *_ = np.linalg.lstsq(A, v, rcond=None)
    v0 = float(coef[0])
    # leading-order fit on the two smallest eps as a cross-check
    order = np.argsort(eps)[:2]
    e2, v2 = eps[order], v[order]
    p0 = min(exponents)
    a = (v2[1] - v2[0]) / (e2[1] ** p0 - e2[0] ** p0)
    v0_lead = float(v2[0] - a * e2[0] ** p0)
    resid = float(np.max(np.abs(A @ coef - v))) if len(v) > len(exponents) + 1 else 0.0
    return v0, abs(v0 - v0_lead) + resid


def neville_limit(eps_values: Sequence[float], values: Sequence[float]) -> Tuple[float, float]:
    """Polynomial extrapolation of a smooth v(eps) to eps = 0.

    Standard Neville tableau; appropriate when v admits a Taylor expansion
    in eps (the boundary-circle integrals do).  Returns (limit, spread of
    the last tableau column) -- the spread is a practical error estimate.
    """
    e = np.asarray(eps_values, dtype=float)
    p = np.asarray(values, dtype=float).copy()
    n = len(p)
    for level in range(1, n):
        for i in range(n - level):
            p[i] = p[i + 1] + (p[i + 1] - p[i]) * e[i + level] / (e[i] - e[i + level])
    spread = abs(p[0] - p[1]) if n > 1 else np.inf
    return float(p[0]), float(spread)
