"""Inference attack on noisily released activation counts.

From one perturbed count per round, the adversary decides whether the giant
component activated and then predicts the activation bit of every node whose
giant-membership frequency clears a confidence floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import (
    _rank_weight_partial_sum,
    chung_lu_giant_condition,
    solve_giant_fraction,
)
from .graph import Graph, NodeWeights
from .percolation import (
    MembershipEstimate,
    connected_components,
    estimate_giant_membership,
    conditional_giant_distributions,
    percolate,
    run_cascade,
    _uniform_seeds,
)
from .privacy import MechanismSpec, randomized_response_estimate
from .seeding import child_seed, rng_from_seed

__all__ = [
    "AttackConfig",
    "AttackVerdict",
    "FloorStats",
    "AttackEvaluation",
    "classify_giant_status",
    "infer_nodes",
    "evaluate_attack",
    "vulnerable_set_er",
    "vulnerable_set_cl",
]

# quantile level for the mechanism's high-probability error bound
_ERROR_QUANTILE_DELTA = 1e-3


@dataclass(frozen=True)
class AttackConfig:
    """Calibrated quantities the adversary works with."""

    max_mechanism_error: float
    decision_threshold: float
    confidence_slack: float
    membership: MembershipEstimate


@dataclass(frozen=True)
class AttackVerdict:
    """Per-round inference output.

    `predicted` marks nodes whose membership frequency reached the floor;
    their `labels` entry is 1 when the giant was judged active, else 0, and
    their `confidence` entry equals the membership frequency. Other nodes
    abstain.
    """

    giant_status: str
    predicted: np.ndarray
    labels: np.ndarray
    confidence: np.ndarray

    @property
    def abstained(self) -> np.ndarray:
        return ~self.predicted


@dataclass(frozen=True)
class FloorStats:
    """Attack quality for one confidence floor."""

    floor: float
    predicted_nodes: int
    coverage: float
    precision: float


@dataclass(frozen=True)
class AttackEvaluation:
    giant_status_accuracy: float
    floors: list[FloorStats]
    per_node_accuracy: np.ndarray
    config: AttackConfig
    inactive_max: float
    active_min: float
    tie_trials: int
    calibration_trials: int
    evaluation_trials: int


def classify_giant_status(reported: float, decision_threshold: float) -> str:
    """'active' when the released count exceeds the threshold, else 'inactive'."""
    return "active" if reported > decision_threshold else "inactive"


def infer_nodes(
    giant_status: str,
    membership: MembershipEstimate,
    confidence_floor: float,
) -> AttackVerdict:
    """Predict activation bits for nodes that track the giant closely enough.

    When the giant was judged active, every node with membership frequency
    at or above the floor is predicted active; when inactive, predicted
    inactive. The reported confidence is the membership frequency itself.
    """
    if giant_status not in ("active", "inactive"):
        raise ValueError("giant_status must be 'active' or 'inactive'")
    if not 0.0 <= confidence_floor <= 1.0:
        raise ValueError("confidence_floor must lie in [0, 1]")
    freq = membership.frequency
    predicted = freq >= confidence_floor
    labels = np.zeros(freq.size, dtype=np.int8)
    if giant_status == "active":
        labels[predicted] = 1
    confidence = np.where(predicted, freq, 0.0)
    return AttackVerdict(
        giant_status=giant_status,
        predicted=predicted,
        labels=labels,
        confidence=confidence,
    )


def _mechanism_error_quantile(spec: MechanismSpec, n: int) -> float:
    """(1 - delta)-quantile of the mechanism's absolute count error."""
    if spec.kind in ("laplace", "wasserstein"):
        return float(spec.scale) * math.log(1.0 / _ERROR_QUANTILE_DELTA)
    # randomized response: normal-tail bound on the debiased count error
    f = float(spec.flip_prob)
    if f == 0.0:
        return 0.0
    sd = math.sqrt(n * (f / 2.0) * (1.0 - f / 2.0)) / (1.0 - f)
    return 3.29 * sd


def _release(
    spec: MechanismSpec, count: int, bits: np.ndarray, rng: np.random.Generator
) -> float:
    if spec.kind in ("laplace", "wasserstein"):
        out = count + float(rng.laplace(0.0, spec.scale))
    else:
        f = float(spec.flip_prob)
        flip = rng.random(bits.size) < f
        coin = rng.random(bits.size) < 0.5
        reported = np.where(flip, coin, bits)
        out = (int(reported.sum()) - bits.size * f / 2.0) / (1.0 - f)
    if spec.clamp:
        out = min(max(out, 0.0), float(bits.size))
    return out


def evaluate_attack(
    g: Graph,
    q: float,
    s: int,
    spec: MechanismSpec,
    floors,
    trials: int,
    rng_seed: int,
    workers: int = 1,
    confidence_slack: float = 0.0,
    decision_threshold: float | None = None,
) -> AttackEvaluation:
    """Measure the attack end to end against a release mechanism.

    Calibration phase: `trials` rounds estimate per-node membership
    frequencies and the activity split whose midpoint becomes the decision
    threshold. Evaluation phase: `trials` fresh rounds release a perturbed
    count, the adversary classifies giant activity and predicts node bits,
    and predictions are scored against the true activation vectors.

    Passing `decision_threshold` skips the split calibration and pins the
    cut directly; the split fields of the result are then nan/0. Needed for
    worlds whose giant is active in every round, where the split would
    degenerate, and for studying a mechanism at a fixed cut.

    Precision at a floor is the mean per-node accuracy over the nodes it
    would predict; rounds whose top components tie count as giant-inactive
    truth, matching the calibration split.
    """
    floors = [float(f) for f in floors]
    if not floors:
        raise ValueError("floors must name at least one confidence floor")
    cal_seed = child_seed(rng_seed, 1)
    eval_seed = child_seed(rng_seed, 2)
    membership = estimate_giant_membership(
        g, q, trials, child_seed(cal_seed, 0), workers=workers
    )
    if decision_threshold is None:
        split = conditional_giant_distributions(
            g, q, s, trials, child_seed(cal_seed, 1), workers=workers
        )
        threshold = split.midpoint
        inactive_max, active_min = split.inactive_max, split.active_min
        tie_trials = split.tie_trials
    else:
        threshold = float(decision_threshold)
        if not 0.0 < threshold < g.node_count:
            raise ValueError("decision_threshold must lie in (0, node_count)")
        inactive_max = active_min = float("nan")
        tie_trials = 0
    config = AttackConfig(
        max_mechanism_error=_mechanism_error_quantile(spec, g.node_count),
        decision_threshold=threshold,
        confidence_slack=confidence_slack,
        membership=membership,
    )

    n = g.node_count
    status_hits = 0
    correct = np.zeros(n, dtype=np.int64)
    for t in range(trials):
        trial_seed = child_seed(eval_seed, t)
        h = percolate(g, q, child_seed(trial_seed, 0))
        lab = connected_components(h)
        rng = rng_from_seed(child_seed(trial_seed, 1))
        seeds = _uniform_seeds(rng, n, s)
        out = run_cascade(h, seeds, labeling=lab)
        truth_active = out.giant_active and not lab.tie_at_top
        mech_rng = rng_from_seed(child_seed(trial_seed, 2))
        reported = _release(spec, out.count, out.activated, mech_rng)
        status = classify_giant_status(reported, config.decision_threshold)
        judged_active = status == "active"
        status_hits += int(judged_active == truth_active)
        predicted_bit = judged_active
        correct += out.activated == predicted_bit

    per_node_accuracy = correct / trials
    stats = []
    for floor in sorted(floors, reverse=True):
        sel = membership.frequency >= floor
        count = int(sel.sum())
        precision = float(per_node_accuracy[sel].mean()) if count else float("nan")
        stats.append(
            FloorStats(
                floor=floor,
                predicted_nodes=count,
                coverage=count / n,
                precision=precision,
            )
        )
    return AttackEvaluation(
        giant_status_accuracy=status_hits / trials,
        floors=stats,
        per_node_accuracy=per_node_accuracy,
        config=config,
        inactive_max=inactive_max,
        active_min=active_min,
        tie_trials=tie_trials,
        calibration_trials=trials,
        evaluation_trials=trials,
    )


def vulnerable_set_er(g: Graph, p: float, q: float, eps: float) -> np.ndarray:
    """Nodes of an ER substrate whose miss-probability bound is at most eps.

    Uses the giant fraction for mean retained degree n * p * q; requires the
    supercritical regime n * p * q > 1.
    """
    c = g.node_count * p * q
    if c <= 1.0:
        raise ValueError("n * p * q must exceed 1 for a giant component")
    y = solve_giant_fraction(c).y
    deg = g.degrees
    bound = np.minimum(
        1.0, np.exp(-deg * q / 8.0) + np.exp(-deg * q * y / 2.0)
    )
    return np.nonzero(bound <= eps)[0].astype(np.int64)


def vulnerable_set_cl(
    weights: NodeWeights, q: float, eps: float, alpha: float
) -> np.ndarray:
    """Node ids of a power-law substrate whose miss bound is at most eps.

    Node id i carries rank i + 1. The bound grows with rank, so the result
    is a prefix of the heaviest nodes. Requires the giant-existence
    condition for (b, d, q).
    """
    b, d = weights.scale, weights.min_degree
    if not chung_lu_giant_condition(b, d, q):
        raise ValueError("no giant component for these (b, d, q)")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    n = weights.node_count
    beta = 1.0 / b
    total = _rank_weight_partial_sum(n, beta)
    ranks = np.arange(1, n + 1, dtype=np.float64)
    bound = np.minimum(1.0, np.exp(-d * q * alpha * n / (ranks**beta * total)))
    return np.nonzero(bound <= eps)[0].astype(np.int64)
