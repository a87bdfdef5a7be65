"""Tests for edge percolation, component labeling, and cascade trials."""

import itertools
import logging
import math

import numpy as np
import pytest
from scipy import stats

from cascadelab.graph import Graph, generate_er
from cascadelab.percolation import (
    DegenerateConditioningError,
    TriggeringSet,
    conditional_count_distributions,
    conditional_giant_distributions,
    connected_components,
    estimate_giant_membership,
    percolate,
    run_cascade,
    sample_seeds,
)
from cascadelab.seeding import child_seed

from oracles import bfs_activated, component_sets, giant_component


def retained_set(h):
    return {tuple(e) for e in h.retained_edges.tolist()}


class TestPercolate:
    def test_q_one_keeps_everything(self):
        g = generate_er(30, 0.2, rng_seed=1)
        h = percolate(g, 1.0, rng_seed=2)
        assert np.array_equal(h.retained_edges, g.edges)

    def test_tiny_q_keeps_nothing(self):
        # union bound: P(any of 1e4 edges) < 1e4 * 1e-12 = 1e-8
        g = generate_er(200, 0.51, rng_seed=3)
        assert g.edge_count >= 10_000
        assert percolate(g, 1e-12, rng_seed=4).retained_count == 0

    def test_q_validation(self):
        g = Graph(2, [[0, 1]])
        with pytest.raises(ValueError):
            percolate(g, 0.0, rng_seed=1)
        with pytest.raises(ValueError):
            percolate(g, 1.1, rng_seed=1)

    def test_deterministic_given_seed(self):
        g = generate_er(50, 0.2, rng_seed=5)
        a = percolate(g, 0.4, rng_seed=6)
        b = percolate(g, 0.4, rng_seed=6)
        assert np.array_equal(a.retained_edges, b.retained_edges)
        c = percolate(g, 0.4, rng_seed=7)
        assert not np.array_equal(a.retained_edges, c.retained_edges)

    def test_retained_is_subset(self):
        g = generate_er(50, 0.3, rng_seed=8)
        h = percolate(g, 0.5, rng_seed=9)
        assert retained_set(h) <= {tuple(e) for e in g.edges.tolist()}

    def test_retention_rate_binomial(self):
        g = generate_er(100, 0.4, rng_seed=10)
        q, reps = 0.3, 200
        kept = sum(
            percolate(g, q, rng_seed=child_seed(11, i)).retained_count
            for i in range(reps)
        )
        total = reps * g.edge_count
        se = math.sqrt(total * q * (1 - q))
        assert abs(kept - total * q) <= 3 * se

    def test_percolated_er_matches_thinned_er(self):
        """Percolating ER(n,p) at q is distributionally ER(n, pq)."""
        n, p, q, reps = 500, 0.006, 0.5, 200
        thinned = []
        direct = []
        for i in range(reps):
            g = generate_er(n, p, rng_seed=child_seed(12, 2 * i))
            h = percolate(g, q, rng_seed=child_seed(12, 2 * i + 1))
            thinned.append(connected_components(h).giant_size)
            g2 = generate_er(n, p * q, rng_seed=child_seed(13, i))
            h2 = TriggeringSet(g2, g2.edges, 1.0)
            direct.append(connected_components(h2).giant_size)
        ks = stats.ks_2samp(thinned, direct)
        assert ks.pvalue > 0.01


class TestConnectedComponents:
    def test_triangle(self):
        g = Graph(3, [[0, 1], [1, 2], [0, 2]])
        lab = connected_components(percolate(g, 1.0, rng_seed=1))
        assert lab.sizes.tolist() == [3]
        assert lab.giant_size == 3
        assert lab.second_size == 0

    def test_isolated_nodes(self):
        g = Graph(4, [])
        lab = connected_components(percolate(g, 1.0, rng_seed=1))
        assert lab.sizes.tolist() == [1, 1, 1, 1]

    def test_path_with_middle_edge_dropped(self):
        g = Graph(4, [[0, 1], [2, 3]])
        lab = connected_components(TriggeringSet(g, g.edges, 1.0))
        assert lab.sizes.tolist() == [2, 2]
        assert lab.tie_at_top

    def test_tie_rank_goes_to_lowest_min_id(self):
        # components {1,3} and {0,2}: equal size, {0,2} must take label 0
        g = Graph(4, [[1, 3], [0, 2]])
        lab = connected_components(TriggeringSet(g, g.edges, 1.0))
        assert lab.labels[0] == lab.labels[2] == 0
        assert lab.labels[1] == lab.labels[3] == 1

    def test_labels_match_oracle_on_random_graphs(self):
        for i in range(40):
            g = generate_er(12, 0.18, rng_seed=child_seed(14, i))
            h = percolate(g, 0.7, rng_seed=child_seed(15, i))
            lab = connected_components(h)
            comps = component_sets(12, h.retained_edges)
            comps.sort(key=lambda c: (-len(c), min(c)))
            for rank, comp in enumerate(comps):
                assert {int(v) for v in np.where(lab.labels == rank)[0]} == comp
            assert lab.sizes.sum() == 12
            assert np.all(np.diff(lab.sizes) <= 0)


class TestRunCascade:
    def test_empty_seeds_flagged(self, caplog):
        g = Graph(3, [[0, 1]])
        h = TriggeringSet(g, g.edges, 1.0)
        with caplog.at_level(logging.WARNING):
            out = run_cascade(h, np.array([], dtype=np.int64))
        assert out.count == 0
        assert not out.activated.any()
        assert "empty seed" in caplog.text

    def test_full_retention_single_seed_activates_all(self):
        g = generate_er(20, 0.4, rng_seed=16)
        assert connected_components(percolate(g, 1.0, rng_seed=0)).giant_size == 20
        out = run_cascade(percolate(g, 1.0, rng_seed=0), np.array([7]))
        assert out.count == 20

    def test_partial_path(self):
        g = Graph(3, [[0, 1], [1, 2]])
        h = TriggeringSet(g, np.array([[0, 1]]), 0.5)
        out = run_cascade(h, np.array([0]))
        assert out.activated.tolist() == [True, True, False]
        assert out.count == 2

    def test_matches_bfs_oracle_on_random_worlds(self):
        for i in range(60):
            g = generate_er(15, 0.15, rng_seed=child_seed(17, i))
            h = percolate(g, 0.6, rng_seed=child_seed(18, i))
            seeds = sample_seeds(15, 3, rng_seed=child_seed(19, i))
            out = run_cascade(h, seeds)
            expect = bfs_activated(15, h.retained_edges, seeds)
            assert set(np.where(out.activated)[0]) == expect
            assert out.count == len(expect)

    def test_giant_active_agrees_with_membership(self):
        for i in range(40):
            g = generate_er(30, 0.08, rng_seed=child_seed(20, i))
            h = percolate(g, 0.8, rng_seed=child_seed(21, i))
            lab = connected_components(h)
            seeds = sample_seeds(30, 2, rng_seed=child_seed(22, i))
            out = run_cascade(h, seeds, labeling=lab)
            assert out.giant_active == bool((lab.labels[seeds] == 0).any())
            if out.giant_active:
                assert out.count >= lab.giant_size


class TestSampleSeeds:
    def test_all_nodes_when_s_equals_n(self):
        assert sample_seeds(5, 5, rng_seed=1).tolist() == [0, 1, 2, 3, 4]

    def test_rejects_s_out_of_range(self):
        with pytest.raises(ValueError):
            sample_seeds(5, 6, rng_seed=1)
        with pytest.raises(ValueError):
            sample_seeds(5, 0, rng_seed=1)

    def test_uniform_over_nodes(self):
        draws = 10_000
        counts = np.zeros(5, dtype=int)
        for i in range(draws):
            counts[sample_seeds(5, 1, rng_seed=child_seed(23, i))[0]] += 1
        se = math.sqrt(draws * 0.2 * 0.8)
        assert np.all(np.abs(counts - draws * 0.2) <= 3 * se)

    def test_sorted_without_replacement(self):
        s = sample_seeds(40, 10, rng_seed=24)
        assert len(set(s.tolist())) == 10
        assert np.all(np.diff(s) > 0)


class TestEstimateGiantMembership:
    def test_complete_graph_full_retention(self):
        g = Graph(5, list(itertools.combinations(range(5), 2)))
        est = estimate_giant_membership(g, 1.0, trials=10, rng_seed=1)
        assert np.all(est.frequency == 1.0)
        assert est.ties_broken == 0

    def test_edgeless_graph_tie_policy(self):
        # every trial ties at size 1; lowest-id rule hands node 0 the giant
        g = Graph(4, [])
        est = estimate_giant_membership(g, 0.5, trials=20, rng_seed=2)
        assert est.frequency.tolist() == [1.0, 0.0, 0.0, 0.0]
        assert est.ties_broken == 20

    def test_frequencies_times_trials_integral(self):
        g = generate_er(60, 0.05, rng_seed=25)
        est = estimate_giant_membership(g, 0.5, trials=37, rng_seed=26)
        scaled = est.frequency * 37
        assert np.allclose(scaled, np.round(scaled))

    def test_schedule_independent(self):
        g = generate_er(150, 0.03, rng_seed=27)
        a = estimate_giant_membership(g, 0.4, trials=48, rng_seed=28, workers=1)
        b = estimate_giant_membership(g, 0.4, trials=48, rng_seed=28, workers=6)
        assert np.array_equal(a.frequency, b.frequency)
        assert a.ties_broken == b.ties_broken

    def test_membership_matches_per_trial_oracle(self):
        g = generate_er(25, 0.12, rng_seed=29)
        trials = 30
        expect = np.zeros(25)
        for t in range(trials):
            h = percolate(g, 0.6, child_seed(child_seed(30, t), 0))
            giant = giant_component(25, h.retained_edges)
            for v in giant:
                expect[v] += 1
        est = estimate_giant_membership(g, 0.6, trials=trials, rng_seed=30)
        assert np.allclose(est.frequency, expect / trials)


class TestConditionalCountDistributions:
    def test_connected_full_retention_errors_on_inactive_branch(self):
        g = Graph(4, [[0, 1], [1, 2], [2, 3]])
        with pytest.raises(DegenerateConditioningError, match="x_v=0"):
            conditional_count_distributions(g, 1.0, 1, 0, trials=50, rng_seed=1)

    def test_disjoint_edges_full_retention(self):
        g = Graph(4, [[0, 1], [2, 3]])
        mu0, mu1 = conditional_count_distributions(g, 1.0, 1, 0, trials=200, rng_seed=2)
        # every world activates exactly one two-node component
        assert mu0.values.tolist() == [2.0]
        assert mu1.values.tolist() == [2.0]
        assert mu0.sample_count + mu1.sample_count == 200

    def test_path_matches_exhaustive_enumeration(self):
        """P4 at q=1/2, one uniform seed: 8 edge patterns x 4 seeds, all
        equally likely. Exact conditional laws come from enumerating the
        32 worlds with the BFS oracle."""
        n, v, trials = 4, 0, 4000
        g = Graph(n, [[0, 1], [1, 2], [2, 3]])
        worlds0: list[int] = []
        worlds1: list[int] = []
        for keep in itertools.product([0, 1], repeat=3):
            retained = g.edges[np.array(keep, dtype=bool)]
            for seed in range(n):
                act = bfs_activated(n, retained, [seed])
                (worlds1 if v in act else worlds0).append(len(act))
        exact0 = {x: worlds0.count(x) / len(worlds0) for x in set(worlds0)}
        exact1 = {x: worlds1.count(x) / len(worlds1) for x in set(worlds1)}

        mu0, mu1 = conditional_count_distributions(
            g, 0.5, 1, v, trials=trials, rng_seed=6
        )
        for mu, exact in ((mu0, exact0), (mu1, exact1)):
            emp = dict(zip(mu.values.tolist(), mu.probs.tolist()))
            assert set(emp) <= set(exact)
            for atom, p in exact.items():
                se = math.sqrt(p * (1 - p) / mu.sample_count)
                assert abs(emp.get(atom, 0.0) - p) <= 3 * se

    def test_branch_split_is_exact_partition(self):
        g = generate_er(40, 0.06, rng_seed=31)
        mu0, mu1 = conditional_count_distributions(g, 0.5, 2, 5, trials=300, rng_seed=4)
        assert mu0.sample_count + mu1.sample_count == 300

    def test_schedule_independent(self):
        g = generate_er(50, 0.06, rng_seed=32)
        a = conditional_count_distributions(g, 0.5, 1, 3, trials=120, rng_seed=5, workers=1)
        b = conditional_count_distributions(g, 0.5, 1, 3, trials=120, rng_seed=5, workers=5)
        for x, y in zip(a, b):
            assert np.array_equal(x.values, y.values)
            assert np.array_equal(x.probs, y.probs)


class TestConditionalGiantDistributions:
    def test_connected_full_retention_errors(self):
        g = Graph(3, [[0, 1], [1, 2]])
        with pytest.raises(DegenerateConditioningError, match="inactive branch"):
            conditional_giant_distributions(g, 1.0, 1, trials=40, rng_seed=1)

    def test_single_edge_four_worlds(self):
        # edge kept: X=2 and the seed is always in the giant. Edge dropped:
        # sizes tie at [1,1], the trial lands in the inactive branch, X=1.
        g = Graph(2, [[0, 1]])
        split = conditional_giant_distributions(g, 0.5, 1, trials=400, rng_seed=2)
        assert split.active.values.tolist() == [2.0]
        assert split.inactive.values.tolist() == [1.0]
        assert split.midpoint == pytest.approx(1.5)
        assert split.tie_trials == split.inactive.sample_count

    def test_sparse_giant_separation(self):
        """Supercritical thinned graph: the seeded-giant counts sit far above
        the rest, so the observed supports leave a wide gap."""
        n = 2500
        g = generate_er(n, 5 / (n - 1), rng_seed=child_seed(33, 0))
        split = conditional_giant_distributions(
            g, 0.3, 1, trials=1000, rng_seed=34, workers=4
        )
        assert split.active_min - split.inactive_max >= 0.3 * n

    def test_midpoint_between_extremes(self):
        g = generate_er(300, 0.01, rng_seed=35)
        split = conditional_giant_distributions(g, 0.5, 1, trials=200, rng_seed=36)
        assert split.inactive_max < split.midpoint < split.active_min
        assert split.midpoint == pytest.approx(
            (split.inactive_max + split.active_min) / 2
        )
