"""Substrate graphs for contagion experiments.

Three sources: Erdos-Renyi sampling, rank-weighted power-law sampling with
Chung-Lu expected degrees, and whitespace edge-list files as published by
public network repositories. All graphs are undirected and simple, with
dense node ids 0..n-1.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .seeding import rng_from_seed

logger = logging.getLogger(__name__)

__all__ = [
    "EdgeListFormatError",
    "EdgeListReport",
    "Graph",
    "NodeWeights",
    "generate_er",
    "chung_lu_weights",
    "generate_chung_lu",
    "load_edge_list",
    "dump_edge_list",
]

_HEADER_RE = re.compile(r"^#\s*nodes=(\d+)\s+edges=(\d+)\s*$")


class EdgeListFormatError(ValueError):
    """A line of an edge-list file could not be parsed."""


@dataclass(frozen=True)
class EdgeListReport:
    """Counts of records dropped while cleaning an edge-list file."""

    duplicates_dropped: int = 0
    self_loops_dropped: int = 0


class Graph:
    """Undirected simple graph on dense node ids 0..node_count-1.

    Edges are held as an (m, 2) int64 array with u < v in every row, sorted
    lexicographically. Instances are treated as immutable after construction
    and can be shared freely across threads.
    """

    def __init__(
        self,
        node_count: int,
        edges,
        external_ids: list[str] | None = None,
        source_report: EdgeListReport | None = None,
    ):
        node_count = int(node_count)
        if node_count < 1:
            raise ValueError("node_count must be >= 1")
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= node_count:
                raise ValueError("edge endpoint outside 0..node_count-1")
            lo = edges.min(axis=1)
            hi = edges.max(axis=1)
            if (lo == hi).any():
                raise ValueError("self-loops are not allowed")
            edges = np.column_stack([lo, hi])
            order = np.lexsort((edges[:, 1], edges[:, 0]))
            edges = edges[order]
            same = (np.diff(edges[:, 0]) == 0) & (np.diff(edges[:, 1]) == 0)
            if same.any():
                raise ValueError("duplicate edges are not allowed")
        self.node_count = node_count
        self.edges = edges
        self.external_ids = external_ids
        self.source_report = source_report

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    @cached_property
    def degrees(self) -> np.ndarray:
        """Per-node degree; sums to 2 * edge_count."""
        return np.bincount(self.edges.ravel(), minlength=self.node_count)

    @cached_property
    def adjacency(self) -> list[np.ndarray]:
        """Neighbor array per node, each sorted ascending."""
        n = self.node_count
        if self.edge_count == 0:
            return [np.empty(0, dtype=np.int64) for _ in range(n)]
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        bounds = np.searchsorted(src, np.arange(n + 1))
        return [dst[bounds[i]:bounds[i + 1]] for i in range(n)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.node_count == other.node_count and np.array_equal(
            self.edges, other.edges
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"Graph(node_count={self.node_count}, edge_count={self.edge_count})"


@dataclass(frozen=True)
class NodeWeights:
    """Expected-degree sequence w_i = d * (n / i)**(1/b) for ranks i = 1..n.

    `weights` is non-increasing, `weights[-1] == min_degree` exactly, and
    `total` is the sum l_n used as the normalizer of pair probabilities.
    """

    weights: np.ndarray
    min_degree: float
    scale: float
    beta: float
    total: float

    @property
    def node_count(self) -> int:
        return int(self.weights.size)


def generate_er(n: int, p: float, rng_seed: int) -> Graph:
    """Sample an Erdos-Renyi graph G(n, p).

    Every unordered pair is an edge independently with probability p.

    Args:
        n: number of nodes, >= 1.
        p: edge probability in [0, 1].
        rng_seed: 64-bit seed; equal seeds give equal graphs.

    Returns:
        Graph with dense ids 0..n-1.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = rng_from_seed(rng_seed)
    rows = []
    for i in range(n - 1):
        hits = np.nonzero(rng.random(n - 1 - i) < p)[0]
        if hits.size:
            rows.append(
                np.column_stack([np.full(hits.size, i, dtype=np.int64), i + 1 + hits])
            )
    edges = np.vstack(rows) if rows else np.empty((0, 2), dtype=np.int64)
    return Graph(n, edges)


def chung_lu_weights(n: int, d: float, b: float) -> NodeWeights:
    """Build the rank-based power-law weight sequence w_i = d * (n/i)**(1/b).

    Args:
        n: number of nodes, >= 1.
        d: minimum expected degree, > 0 (the weight of the last rank).
        b: power-law shape, > 0; the implied degree exponent is 1 + b.

    Returns:
        NodeWeights with beta = 1/b and total = sum of weights.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if d <= 0:
        raise ValueError("d must be > 0")
    if b <= 0:
        raise ValueError("b must be > 0")
    beta = 1.0 / b
    ranks = np.arange(1, n + 1, dtype=np.float64)
    weights = d * (n / ranks) ** beta
    return NodeWeights(
        weights=weights,
        min_degree=float(d),
        scale=float(b),
        beta=beta,
        total=float(math.fsum(weights)),
    )


def generate_chung_lu(weights: NodeWeights, rng_seed: int) -> Graph:
    """Sample a graph with the given expected-degree weights.

    Pair {i, j} is an edge independently with probability
    min(1, w_i * w_j / total). Node id i carries rank i + 1, so id 0 is the
    heaviest node.

    Args:
        weights: weight sequence from `chung_lu_weights`.
        rng_seed: 64-bit seed; equal seeds give equal graphs.
    """
    w = weights.weights
    n = weights.node_count
    total = weights.total
    rng = rng_from_seed(rng_seed)
    rows = []
    for i in range(n - 1):
        probs = w[i] * w[i + 1:] / total
        np.minimum(probs, 1.0, out=probs)
        hits = np.nonzero(rng.random(n - 1 - i) < probs)[0]
        if hits.size:
            rows.append(
                np.column_stack([np.full(hits.size, i, dtype=np.int64), i + 1 + hits])
            )
    edges = np.vstack(rows) if rows else np.empty((0, 2), dtype=np.int64)
    return Graph(n, edges)


def load_edge_list(path) -> Graph:
    """Parse a whitespace edge-list file into a Graph.

    Each non-comment line is `u v`. Lines starting with '#' are skipped.
    Self-loops and repeated edges (in either orientation) are dropped and
    counted in the returned graph's `source_report`, with one warning logged
    per file. Node ids may be arbitrary tokens; they are compacted to dense
    0-based ids in first-seen order and kept in `external_ids`.

    A leading `# nodes=<n> edges=<m>` header (as written by
    `dump_edge_list`) switches to verbatim integer ids so canonical dumps
    round-trip exactly, including isolated nodes.

    Raises:
        EdgeListFormatError: a line does not hold exactly two tokens, or ids
            under a canonical header are not integers in range.
        OSError: the file cannot be read.
    """
    path = Path(path)
    text = path.read_text()

    header_n: int | None = None
    lines = text.splitlines()
    for line in lines:
        stripped = line.strip()
        if not stripped:
            continue
        m = _HEADER_RE.match(stripped)
        if m is not None:
            header_n = int(m.group(1))
        break

    id_map: dict[str, int] = {}
    external: list[str] = []
    seen: set[tuple[int, int]] = set()
    pairs: list[tuple[int, int]] = []
    duplicates = 0
    self_loops = 0

    def intern(token: str, lineno: int) -> int:
        if header_n is not None:
            try:
                value = int(token)
            except ValueError:
                raise EdgeListFormatError(
                    f"{path}:{lineno}: non-integer id {token!r} under canonical header"
                ) from None
            if not 0 <= value < header_n:
                raise EdgeListFormatError(
                    f"{path}:{lineno}: id {value} outside 0..{header_n - 1}"
                )
            return value
        idx = id_map.get(token)
        if idx is None:
            idx = len(id_map)
            id_map[token] = idx
            external.append(token)
        return idx

    for lineno, line in enumerate(lines, 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise EdgeListFormatError(
                f"{path}:{lineno}: expected two node ids, found {len(parts)} tokens"
            )
        u = intern(parts[0], lineno)
        v = intern(parts[1], lineno)
        if u == v:
            self_loops += 1
            continue
        key = (u, v) if u < v else (v, u)
        if key in seen:
            duplicates += 1
            continue
        seen.add(key)
        pairs.append(key)

    if duplicates or self_loops:
        logger.warning(
            "%s: dropped %d duplicate edge(s) and %d self-loop(s)",
            path,
            duplicates,
            self_loops,
        )

    if header_n is not None:
        n = header_n
        ids = None
    else:
        n = len(id_map)
        ids = external
    if n < 1:
        raise EdgeListFormatError(f"{path}: no nodes found")
    edges = (
        np.array(pairs, dtype=np.int64) if pairs else np.empty((0, 2), dtype=np.int64)
    )
    return Graph(
        n,
        edges,
        external_ids=ids,
        source_report=EdgeListReport(duplicates, self_loops),
    )


def dump_edge_list(g: Graph, path) -> None:
    """Write the canonical text form: a header line then sorted `u v` rows.

    The output starts with `# nodes=<n> edges=<m>` and lists each edge once
    with u < v, sorted lexicographically. `load_edge_list` reproduces an
    identical Graph from this format.
    """
    path = Path(path)
    out = [f"# nodes={g.node_count} edges={g.edge_count}"]
    out.extend(f"{u} {v}" for u, v in g.edges)
    path.write_text("\n".join(out) + "\n")
