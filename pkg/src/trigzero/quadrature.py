"""Composite and adaptive Gauss-Legendre quadrature on intervals.

Everything here is vectorized: the integrand receives one flat array holding
every node of every pending panel, so a refinement sweep costs one call.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NotConverged


@lru_cache(maxsize=64)
def gauss_legendre(order):
    """Nodes and weights of the ``order``-point rule on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(a, b, order):
    """Map the reference rule onto panels ``[a_i, b_i]``.

    Returns ``(nodes, weights)`` with shape ``(len(a), order)``.
    """
    x, w = gauss_legendre(order)
    a = np.asarray(a, dtype=float)[:, None]
    b = np.asarray(b, dtype=float)[:, None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def composite(f, edges, order=10):
    """Fixed composite rule over consecutive ``edges``; returns per-panel sums."""
    edges = np.asarray(edges, dtype=float)
    t, w = panel_nodes(edges[:-1], edges[1:], order)
    vals = np.asarray(f(t.ravel()), dtype=float).reshape(t.shape)
    return (vals * w).sum(axis=1)


@dataclass
class QuadResult:
    value: float
    error: float
    evaluations: int
    panels: int
    unresolved: int
    left: np.ndarray = None
    right: np.ndarray = None
    contributions: np.ndarray = None


def adaptive_gauss(f, edges, order=10, rtol=1e-8, atol=0.0, min_width=0.0,
                   max_evals=None, keep_panels=False):
    """Adaptive bisection with a Gauss-Legendre panel rule.

    Each panel is integrated once with ``order`` points and once on its two
    halves; the difference is the local error estimate. A panel is accepted
    when the estimate is below its share of the tolerance, or when it is
    narrower than ``min_width`` (counted in ``unresolved`` if still failing).

    Parameters
    ----------
    f : callable
        Vectorized integrand, called on 1-D float arrays.
    edges : array_like
        Initial panel boundaries, increasing.
    rtol, atol : float
        Relative tolerance on the total and absolute tolerance. Local
        tolerances are proportional to panel width.
    max_evals : int, optional
        Evaluation budget; exceeding it raises :class:`NotConverged`.

    Returns
    -------
    QuadResult
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1].copy(), edges[1:].copy()
    total_width = edges[-1] - edges[0]
    acc_a, acc_b, acc_v, acc_e = [], [], [], []
    evals = 0
    unresolved = 0
    scale = None

    while a.size:
        mid = 0.5 * (a + b)
        t0, w0 = panel_nodes(a, b, order)
        t1, w1 = panel_nodes(np.concatenate([a, mid]), np.concatenate([mid, b]), order)
        vals = np.asarray(f(np.concatenate([t0.ravel(), t1.ravel()])), dtype=float)
        evals += vals.size
        v0 = vals[:t0.size].reshape(t0.shape)
        v1 = vals[t0.size:].reshape(t1.shape)
        coarse = (v0 * w0).sum(axis=1)
        halves = (v1 * w1).sum(axis=1)
        fine = halves[:a.size] + halves[a.size:]
        err = np.abs(fine - coarse)

        if scale is None:
            scale = abs(fine.sum())
        width = b - a
        local_tol = np.maximum(rtol * np.abs(fine),
                               (rtol * scale + atol) * width / total_width)
        ok = err <= local_tol
        tiny = (~ok) & (0.5 * width < min_width)
        unresolved += int(tiny.sum())
        done = ok | tiny

        acc_a.append(a[done])
        acc_b.append(b[done])
        acc_v.append(fine[done])
        acc_e.append(err[done])

        keep = ~done
        a, b = np.concatenate([a[keep], mid[keep]]), np.concatenate([mid[keep], b[keep]])
        if max_evals is not None and evals > max_evals and a.size:
            pending = float(np.sum(fine[keep]))
            est = float(np.sum(np.concatenate(acc_v))) + pending
            raise NotConverged(
                f"adaptive quadrature exceeded {max_evals} evaluations "
                f"with {a.size} panels pending",
                estimate=est, error=float(np.sum(err[keep])))

    left = np.concatenate(acc_a)
    order_idx = np.argsort(left, kind="stable")
    left = left[order_idx]
    right = np.concatenate(acc_b)[order_idx]
    contrib = np.concatenate(acc_v)[order_idx]
    errs = np.concatenate(acc_e)[order_idx]
    res = QuadResult(value=float(np.sum(contrib)), error=float(np.sum(errs)),
                     evaluations=evals, panels=int(left.size), unresolved=unresolved)
    if keep_panels:
        res.left, res.right, res.contributions = left, right, contrib
    return res
