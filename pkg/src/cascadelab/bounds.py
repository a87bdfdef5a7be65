"""Closed-form theory for giant components of percolated random graphs.

All logarithms are natural. Probabilities returned by the bound functions
are clamped to [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graph import Graph

__all__ = [
    "GiantFractionSolution",
    "RankEnvelope",
    "solve_giant_fraction",
    "er_max_degree_estimate",
    "membership_miss_approx",
    "er_miss_bound",
    "chung_lu_miss_bound",
    "chung_lu_rank_envelope",
    "chung_lu_giant_condition",
    "percolation_threshold",
]

_BISECT_WIDTH = 1e-13
_BISECT_MAX_ITER = 200


@dataclass(frozen=True)
class GiantFractionSolution:
    """Root y of exp(-c*y) = 1 - y for mean retained degree c."""

    c: float
    y: float


@dataclass(frozen=True)
class RankEnvelope:
    """Growth regime of the highest rank that still joins the giant."""

    tag: str
    envelope: Callable[[float], float]


def solve_giant_fraction(c: float) -> GiantFractionSolution:
    """Solve exp(-c*y) = 1 - y for the limiting giant-component fraction.

    c is the mean degree of the retained graph (n * p * q for a percolated
    Erdos-Renyi substrate). For c <= 1 the only root is y = 0; for c > 1
    the unique positive root is found by bisection to a residual below
    1e-10.
    """
    if c <= 0:
        raise ValueError("c must be > 0")
    if c <= 1.0:
        return GiantFractionSolution(c=float(c), y=0.0)

    def f(y: float) -> float:
        return math.exp(-c * y) - 1.0 + y

    lo, hi = 1e-15, 1.0
    # f(0) = 0 is the trivial root; f < 0 just above 0 and f(1) > 0.
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < _BISECT_WIDTH:
            break
    y = 0.5 * (lo + hi)
    return GiantFractionSolution(c=float(c), y=y)


def er_max_degree_estimate(n: int) -> float:
    """Asymptotic maximum degree log(n) / log(log(n)) of a sparse ER graph.

    Requires n >= 16 so the iterated logarithm is comfortably positive.
    """
    if n < 16:
        raise ValueError("n must be >= 16")
    return math.log(n) / math.log(math.log(n))


def membership_miss_approx(k: float, y: float) -> float:
    """Approximation exp(-k*y) for the chance a k-degree node misses the giant.

    k is the node's degree in the retained graph and y the giant fraction.
    This is the crude independence approximation; it degrades for large y.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if not 0.0 <= y <= 1.0:
        raise ValueError("y must lie in [0, 1]")
    return math.exp(-k * y)


def er_miss_bound(d: float, q: float, y: float) -> float:
    """Upper bound on the chance a degree-d substrate node misses the giant.

    Combines a Chernoff bound on the retained degree falling below d*q/2
    with the membership decay at that degree:
    min(1, exp(-d*q/8) + exp(-d*q*y/2)).
    """
    if d < 0:
        raise ValueError("d must be >= 0")
    if not 0.0 < q <= 1.0:
        raise ValueError("q must lie in (0, 1]")
    if not 0.0 <= y <= 1.0:
        raise ValueError("y must lie in [0, 1]")
    return min(1.0, math.exp(-d * q / 8.0) + math.exp(-d * q * y / 2.0))


def _rank_weight_partial_sum(n: int, beta: float) -> float:
    """Exact partial sum of j**(-beta) for j = 1..n."""
    return float(np.sum(np.arange(1, n + 1, dtype=np.float64) ** (-beta)))


def chung_lu_miss_bound(
    i: int, n: int, d: float, q: float, b: float, alpha: float
) -> float:
    """Upper bound on the chance rank-i misses the giant in a percolated
    power-law graph.

    With beta = 1/b and S = sum_{j=1..n} j**(-beta) computed exactly, the
    bound is min(1, exp(-d * q * alpha * n / (i**beta * S))), where alpha is
    the giant fraction of the retained graph (measured or assumed).
    """
    if not 1 <= i <= n:
        raise ValueError("rank i must lie in 1..n")
    if d <= 0:
        raise ValueError("d must be > 0")
    if not 0.0 < q <= 1.0:
        raise ValueError("q must lie in (0, 1]")
    if b <= 0:
        raise ValueError("b must be > 0")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    beta = 1.0 / b
    s = _rank_weight_partial_sum(n, beta)
    return min(1.0, math.exp(-d * q * alpha * n / (i**beta * s)))


def chung_lu_rank_envelope(b: float) -> RankEnvelope:
    """Envelope for how many top ranks join the giant, by shape b.

    b < 1 gives n**b ranks, b = 1 gives n / log(n), and b > 1 gives order n.
    """
    if b <= 0:
        raise ValueError("b must be > 0")
    if b < 1.0:
        return RankEnvelope(
            tag="sub-polynomial ranks", envelope=lambda n, _b=b: float(n) ** _b
        )
    if b == 1.0:
        return RankEnvelope(
            tag="near-linear ranks", envelope=lambda n: n / math.log(n)
        )
    return RankEnvelope(tag="linear ranks", envelope=lambda n: float(n))


def chung_lu_giant_condition(b: float, d: float, q: float) -> bool:
    """Whether a percolated power-law graph keeps a giant component.

    True for every b in (0, 2]; for b > 2 the retained minimum expected
    degree d*q must exceed (b - 1) * (b - 2).
    """
    if b <= 0:
        raise ValueError("b must be > 0")
    if d <= 0:
        raise ValueError("d must be > 0")
    if not 0.0 < q <= 1.0:
        raise ValueError("q must lie in (0, 1]")
    if b <= 2.0:
        return True
    return d * q > (b - 1.0) * (b - 2.0)


def percolation_threshold(g: Graph) -> float:
    """Transmission probability below which no giant survives on graph g.

    Returns 1 / d_tilde with d_tilde = sum(deg**2) / sum(deg), the
    size-biased mean degree. Requires at least one edge.
    """
    if g.edge_count == 0:
        raise ValueError("graph has no edges; threshold undefined")
    deg = g.degrees.astype(np.float64)
    d_tilde = float((deg * deg).sum() / deg.sum())
    return 1.0 / d_tilde
