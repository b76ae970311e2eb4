"""Deterministic quadrature building blocks shared by solver and oracles.

Two families: tensor Gauss-Hermite rules matched to the whitened kernel
weight exp(-|xi|^2), and composite Gauss-Legendre panels with dyadic
grading toward marked kink locations (used where integrands carry |.|^q
kinks or sign jumps that would wreck a plain Hermite rule).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def hermite_rule(order: int):
    """1-D Gauss-Hermite nodes/weights for weight exp(-x^2)."""
    x, w = np.polynomial.hermite.hermgauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=64)
def hermite_tensor(order: int, dim: int):
    """Tensor-product Gauss-Hermite rule on R^dim.

    Returns nodes of shape (order^dim, dim) and the product weights. The
    weights sum to pi^(dim/2) exactly up to roundoff, which makes the rule
    exact for constant data.
    """
    x, w = hermite_rule(order)
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    nodes = np.stack([g.reshape(-1) for g in grids], axis=-1)
    weights = np.ones(nodes.shape[0])
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    for g in wgrids:
        weights = weights * g.reshape(-1)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=64)
def legendre_rule(order: int):
    """1-D Gauss-Legendre nodes/weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_edges(lo: float, hi: float, kinks=(), base_panels: int = 32, levels: int = 44):
    """Panel edges on [lo, hi]: uniform base grid plus dyadic grading.

    Around every interior kink the edges refine geometrically down to
    (hi - lo) * 2^-levels, so integrands with algebraic kinks or steep
    sigmoidal transitions there are resolved to near machine precision.
    """
    if not hi > lo:
        raise ValueError(f"empty panel interval [{lo}, {hi}]")
    width = hi - lo
    edges = list(np.linspace(lo, hi, base_panels + 1))
    for kink in kinks:
        if not lo < kink < hi:
            continue
        edges.append(kink)
        for j in range(1, levels + 1):
            step = width * 0.5**j
            if kink - step > lo:
                edges.append(kink - step)
            if kink + step < hi:
                edges.append(kink + step)
    edges = np.unique(np.asarray(edges, dtype=float))
    # drop zero-width panels caused by clustering near the interval ends
    keep = np.concatenate([[True], np.diff(edges) > 1e-15 * width])
    return edges[keep]


def panel_nodes(edges: np.ndarray, order: int = 12):
    """All Gauss-Legendre nodes/weights for the panels between edges."""
    x, w = legendre_rule(order)
    a = edges[:-1][:, None]
    b = edges[1:][:, None]
    half = 0.5 * (b - a)
    nodes = (a + half * (x[None, :] + 1.0)).reshape(-1)
    weights = (half * w[None, :]).reshape(-1)
    return nodes, weights


def integrate_panels(f, lo: float, hi: float, kinks=(), base_panels: int = 32,
                     order: int = 12, levels: int = 44) -> float:
    """Integrate a vectorized scalar function over [lo, hi] with grading."""
    nodes, weights = panel_nodes(panel_edges(lo, hi, kinks, base_panels, levels), order)
    return float(weights @ f(nodes))
