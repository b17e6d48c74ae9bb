"""Composite Gauss-Legendre rules, vectorised over batches of segments."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


class QuadratureError(RuntimeError):
    def __init__(self, msg, estimate=None):
        super().__init__(msg)
        self.estimate = estimate


@lru_cache(maxsize=None)
def gauss_legendre(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def composite_rule(a: float, b: float, panels: int, order: int = 8):
    """Nodes and weights of a composite Gauss rule on [a, b]."""
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def tensor_rule(intervals, panels, order: int = 8):
    """Tensor-product composite rule on a box.

    ``intervals`` is a sequence of (lo, hi); ``panels`` an int or one int
    per axis. Returns the node list with shape (n, d) and weights (n,).
    """
    d = len(intervals)
    panels = [panels] * d if np.isscalar(panels) else list(panels)
    rules = [composite_rule(lo, hi, p, order) for (lo, hi), p in zip(intervals, panels)]
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wgrid = np.ones_like(grids[0])
    for axis, (_, w) in enumerate(rules):
        shape = [1] * d
        shape[axis] = len(w)
        wgrid = wgrid * w.reshape(shape)
    return np.stack([g.ravel() for g in grids], axis=-1), wgrid.ravel()


def integrate_segments(f, a, b, panels: int = 8, order: int = 8):
    """``int_{a_i}^{b_i} f_i`` for a batch of segments.

    ``f`` receives nodes shaped (n, panels*order) and returns values of the
    same shape.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    x, w = composite_rule(0.0, 1.0, panels, order)
    length = (b - a)[:, None]
    nodes = a[:, None] + length * x[None, :]
    return np.sum(f(nodes) * w[None, :], axis=1) * length[:, 0]


def adaptive_segments(f, a, b, tol: float = 1e-10, order: int = 8,
                      panels: int = 4, max_panels: int = 4096):
    """Double the panel count until successive batch results agree to ``tol``.

    Returns ``(values, error_estimate)``; raises :class:`QuadratureError`
    carrying the last estimate if ``max_panels`` is reached first.
    """
    prev = integrate_segments(f, a, b, panels, order)
    while True:
        panels *= 2
        cur = integrate_segments(f, a, b, panels, order)
        err = float(np.max(np.abs(cur - prev))) if cur.size else 0.0
        if err <= tol:
            return cur, err
        if panels >= max_panels:
            raise QuadratureError(
                f"quadrature did not reach tol={tol:g} with {panels} panels; estimate {err:.3g}",
                estimate=err,
            )
        prev = cur


@lru_cache(maxsize=None)
def tanh_sinh(step: float):
    """Double-exponential nodes and weights on (-1, 1) with mesh ``step``.

    The rule converges geometrically in 1/step even when the integrand has
    an essential singularity at an endpoint, which is how the bump seeds
    behave at the edge of their support.
    """
    n = int(np.ceil(3.2 / step))
    k = np.arange(-n, n + 1) * step
    arg = 0.5 * np.pi * np.sinh(k)
    x = np.tanh(arg)
    w = step * 0.5 * np.pi * np.cosh(k) / np.cosh(arg) ** 2
    keep = (np.abs(x) < 1.0) & (w > 1e-300)
    x, w = x[keep], w[keep]
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def breakpoint_rule(breaks, step: float):
    """Tanh-sinh on each piece of a sorted breakpoint list."""
    b = np.unique(np.asarray(breaks, dtype=float))
    x, w = tanh_sinh(step)
    lo, hi = b[:-1, None], b[1:, None]
    nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x[None, :]
    weights = 0.5 * (hi - lo) * w[None, :]
    return nodes.ravel(), weights.ravel()


def product_rule(rules):
    """Tensor product of 1D ``(nodes, weights)`` rules; returns (pts, w)."""
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    w = rules[0][1]
    for r in rules[1:]:
        w = np.multiply.outer(w, r[1])
    return np.stack([g.ravel() for g in grids], axis=-1), np.asarray(w).ravel()


def refine_until(evaluate, tol: float, step: float = 0.2, min_step: float = 0.0125):
    """Halve the tanh-sinh step until ``evaluate(step)`` settles.

    ``evaluate`` returns an array of integrals. Returns ``(values, estimate)``
    where the estimate is the largest change in the last halving.
    """
    prev = np.asarray(evaluate(step), dtype=float)
    while True:
        step *= 0.5
        cur = np.asarray(evaluate(step), dtype=float)
        err = float(np.max(np.abs(cur - prev))) if cur.size else 0.0
        if err <= tol:
            return cur, err
        if step <= min_step:
            raise QuadratureError(
                f"tanh-sinh rule did not reach tol={tol:g} at step {step:g}; estimate {err:.3g}",
                estimate=err,
            )
        prev = cur
