"""Bond percolation and seed-set contagion on a fixed substrate graph.

A contagion with per-edge transmission probability q is simulated by
retaining each edge independently with probability q and activating exactly
the retained-edge components that contain a seed. All Monte Carlo loops
derive one child seed per trial, so estimates are reproducible for any
worker count.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .distributions import EmpiricalDistribution
from .graph import Graph
from .seeding import child_seed, rng_from_seed

logger = logging.getLogger(__name__)

__all__ = [
    "DegenerateConditioningError",
    "TriggeringSet",
    "ComponentLabeling",
    "CascadeOutcome",
    "MembershipEstimate",
    "ActivitySplit",
    "percolate",
    "connected_components",
    "run_cascade",
    "sample_seeds",
    "estimate_giant_membership",
    "conditional_count_distributions",
    "conditional_giant_distributions",
]

SeedPolicy = Callable[[np.random.Generator, int, int], np.ndarray]


class DegenerateConditioningError(RuntimeError):
    """A conditional distribution received no samples in one branch."""


@dataclass(frozen=True)
class TriggeringSet:
    """Retained-edge world drawn by one percolation round."""

    base: Graph
    retained_edges: np.ndarray
    q: float

    @property
    def retained_count(self) -> int:
        return int(self.retained_edges.shape[0])


@dataclass(frozen=True)
class ComponentLabeling:
    """Connected components of a retained-edge world, ranked by size.

    `labels[v]` is the rank of v's component; rank 0 is the largest.
    `sizes` is non-increasing and sums to the node count. Equal sizes rank
    the component containing the lowest node id first.
    """

    labels: np.ndarray
    sizes: np.ndarray

    @property
    def component_count(self) -> int:
        return int(self.sizes.size)

    @property
    def giant_size(self) -> int:
        return int(self.sizes[0])

    @property
    def second_size(self) -> int:
        return int(self.sizes[1]) if self.sizes.size > 1 else 0

    @property
    def tie_at_top(self) -> bool:
        """True when the two largest components have equal size."""
        return self.sizes.size > 1 and int(self.sizes[0]) == int(self.sizes[1])


@dataclass(frozen=True)
class CascadeOutcome:
    """Result of seeding one retained-edge world."""

    seeds: np.ndarray
    activated: np.ndarray
    count: int
    giant_active: bool


@dataclass(frozen=True)
class MembershipEstimate:
    """Per-node frequency of giant-component membership over many trials."""

    trials: int
    frequency: np.ndarray
    ties_broken: int


@dataclass(frozen=True)
class ActivitySplit:
    """Activation-count distributions split by giant activity.

    `inactive` collects trials where the largest component was not seeded
    (including ambiguous trials whose two largest components tied), and
    `active` the rest. `inactive_max` and `active_min` are the extreme
    supports; `midpoint` is their average, usable as a decision threshold.
    """

    inactive: EmpiricalDistribution
    active: EmpiricalDistribution
    inactive_max: float
    active_min: float
    midpoint: float
    tie_trials: int


def percolate(g: Graph, q: float, rng_seed: int) -> TriggeringSet:
    """Retain each edge of g independently with probability q.

    One coin per undirected edge; q must lie in (0, 1]. Deterministic for a
    fixed (g, q, rng_seed).
    """
    if not 0.0 < q <= 1.0:
        raise ValueError("q must lie in (0, 1]")
    rng = rng_from_seed(rng_seed)
    mask = rng.random(g.edge_count) < q
    return TriggeringSet(base=g, retained_edges=g.edges[mask], q=q)


def connected_components(h: TriggeringSet) -> ComponentLabeling:
    """Label the connected components of the retained subgraph.

    Ranks are deterministic: descending size, then ascending lowest member
    id, so repeated runs and different thread counts agree bit for bit.
    """
    n = h.base.node_count
    edges = h.retained_edges
    if edges.shape[0] == 0:
        raw = np.arange(n, dtype=np.int64)
        ncomp = n
    else:
        mat = sparse.csr_matrix(
            (np.ones(edges.shape[0], dtype=np.int8), (edges[:, 0], edges[:, 1])),
            shape=(n, n),
        )
        ncomp, raw = csgraph.connected_components(mat, directed=False)
    sizes = np.bincount(raw, minlength=ncomp)
    # raw labels are 0..ncomp-1; first occurrence index == lowest member id
    first_member = np.unique(raw, return_index=True)[1]
    order = np.lexsort((first_member, -sizes))
    rank = np.empty(ncomp, dtype=np.int64)
    rank[order] = np.arange(ncomp, dtype=np.int64)
    return ComponentLabeling(labels=rank[raw], sizes=sizes[order])


def run_cascade(
    h: TriggeringSet,
    seeds: Iterable[int],
    labeling: ComponentLabeling | None = None,
) -> CascadeOutcome:
    """Activate every node sharing a retained-edge component with a seed.

    Equivalent to breadth-first contagion over the retained edges. An empty
    seed set is allowed (activates nothing) but logged, since experiments
    assume at least one seed. Pass `labeling` to reuse a precomputed
    component labeling of the same world.
    """
    n = h.base.node_count
    if isinstance(seeds, np.ndarray):
        seed_arr = np.unique(seeds.astype(np.int64))
    else:
        seed_arr = np.unique(np.fromiter(seeds, dtype=np.int64))
    if seed_arr.size and (seed_arr[0] < 0 or seed_arr[-1] >= n):
        raise ValueError("seed id outside 0..node_count-1")
    if seed_arr.size == 0:
        logger.warning("cascade run with an empty seed set; nothing activates")
        return CascadeOutcome(
            seeds=seed_arr,
            activated=np.zeros(n, dtype=bool),
            count=0,
            giant_active=False,
        )
    if labeling is None:
        labeling = connected_components(h)
    seeded = np.zeros(labeling.component_count, dtype=bool)
    seeded[labeling.labels[seed_arr]] = True
    activated = seeded[labeling.labels]
    return CascadeOutcome(
        seeds=seed_arr,
        activated=activated,
        count=int(activated.sum()),
        giant_active=bool(seeded[0]),
    )


def _uniform_seeds(rng: np.random.Generator, n: int, s: int) -> np.ndarray:
    return np.sort(rng.choice(n, size=s, replace=False))


def sample_seeds(n: int, s: int, rng_seed: int) -> np.ndarray:
    """Draw s distinct seed nodes uniformly from 0..n-1, sorted ascending."""
    if not 0 < s <= n:
        raise ValueError("s must satisfy 0 < s <= n")
    return _uniform_seeds(rng_from_seed(rng_seed), n, s)


def _map_trials(trial_fn, trials: int, workers: int):
    if workers <= 1:
        return [trial_fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(trial_fn, range(trials)))


def estimate_giant_membership(
    g: Graph,
    q: float,
    trials: int,
    rng_seed: int,
    workers: int = 1,
) -> MembershipEstimate:
    """Estimate each node's probability of landing in the giant component.

    Runs `trials` independent percolation rounds and counts, per node, the
    rounds whose largest retained component contained it. `frequency * trials`
    is integral by construction, and the result is identical for any
    `workers` value. `ties_broken` counts the rounds whose two largest
    components had equal size and were ordered by the lowest-id rule.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")

    def one(trial: int):
        h = percolate(g, q, child_seed(child_seed(rng_seed, trial), 0))
        lab = connected_components(h)
        return lab.labels == 0, lab.tie_at_top

    counts = np.zeros(g.node_count, dtype=np.int64)
    ties = 0
    for in_giant, tie in _map_trials(one, trials, workers):
        counts += in_giant
        ties += int(tie)
    return MembershipEstimate(
        trials=trials, frequency=counts / trials, ties_broken=ties
    )


def _joint_trial(
    g: Graph,
    q: float,
    s: int,
    rng_seed: int,
    trial: int,
    seed_policy: SeedPolicy,
):
    """One (triggering set, seed set) draw; sub-streams keyed by purpose."""
    trial_seed = child_seed(rng_seed, trial)
    h = percolate(g, q, child_seed(trial_seed, 0))
    lab = connected_components(h)
    rng = rng_from_seed(child_seed(trial_seed, 1))
    seeds = seed_policy(rng, g.node_count, s)
    out = run_cascade(h, seeds, labeling=lab)
    return lab, out


def conditional_count_distributions(
    g: Graph,
    q: float,
    s: int,
    v: int,
    trials: int,
    rng_seed: int,
    workers: int = 1,
    seed_policy: SeedPolicy = _uniform_seeds,
) -> tuple[EmpiricalDistribution, EmpiricalDistribution]:
    """Split the activation count by whether node v itself activated.

    Runs `trials` joint (percolation, seed set) draws and partitions the
    activation counts X by x_v. Returns (counts when v stayed inactive,
    counts when v activated); each carries its branch sample count.

    Raises:
        DegenerateConditioningError: one branch received zero samples, e.g.
            a connected graph at q=1 never leaves v inactive.
    """
    if not 0 < s <= g.node_count:
        raise ValueError("s must satisfy 0 < s <= node_count")
    if not 0 <= v < g.node_count:
        raise ValueError("v outside 0..node_count-1")
    if trials < 1:
        raise ValueError("trials must be >= 1")

    def one(trial: int):
        _, out = _joint_trial(g, q, s, rng_seed, trial, seed_policy)
        return bool(out.activated[v]), out.count

    inactive: list[int] = []
    active: list[int] = []
    for hit, count in _map_trials(one, trials, workers):
        (active if hit else inactive).append(count)
    if not inactive:
        raise DegenerateConditioningError(
            f"branch x_v=0 for node {v} received 0 of {trials} trials; "
            "the conditional distribution is undefined"
        )
    if not active:
        raise DegenerateConditioningError(
            f"branch x_v=1 for node {v} received 0 of {trials} trials; "
            "the conditional distribution is undefined"
        )
    return (
        EmpiricalDistribution.from_samples(inactive),
        EmpiricalDistribution.from_samples(active),
    )


def conditional_giant_distributions(
    g: Graph,
    q: float,
    s: int,
    trials: int,
    rng_seed: int,
    workers: int = 1,
    seed_policy: SeedPolicy = _uniform_seeds,
) -> ActivitySplit:
    """Split the activation count by whether the giant component activated.

    A trial counts as giant-active when a seed fell in the unique largest
    retained component; trials whose two largest components tied in size are
    ambiguous and are assigned to the inactive branch (`tie_trials` reports
    how many). The split's `midpoint` sits halfway between the largest
    inactive count and the smallest active count.

    Raises:
        DegenerateConditioningError: either branch is empty, e.g. a
            connected graph at q=1 activates the giant in every trial.
    """
    if not 0 < s <= g.node_count:
        raise ValueError("s must satisfy 0 < s <= node_count")
    if trials < 1:
        raise ValueError("trials must be >= 1")

    def one(trial: int):
        lab, out = _joint_trial(g, q, s, rng_seed, trial, seed_policy)
        return out.giant_active and not lab.tie_at_top, lab.tie_at_top, out.count

    inactive: list[int] = []
    active: list[int] = []
    ties = 0
    for is_active, tie, count in _map_trials(one, trials, workers):
        ties += int(tie)
        (active if is_active else inactive).append(count)
    if not inactive:
        raise DegenerateConditioningError(
            f"giant-inactive branch received 0 of {trials} trials; "
            "the conditional distribution is undefined"
        )
    if not active:
        raise DegenerateConditioningError(
            f"giant-active branch received 0 of {trials} trials; "
            "the conditional distribution is undefined"
        )
    x0 = EmpiricalDistribution.from_samples(inactive)
    x1 = EmpiricalDistribution.from_samples(active)
    theta0 = x0.support_max
    theta1 = x1.support_min
    return ActivitySplit(
        inactive=x0,
        active=x1,
        inactive_max=theta0,
        active_min=theta1,
        midpoint=0.5 * (theta0 + theta1),
        tie_trials=ties,
    )
