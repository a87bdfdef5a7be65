"""Tests for the empirical distribution container."""

import numpy as np
import pytest

from cascadelab.distributions import EmpiricalDistribution


def test_from_samples_counts():
    d = EmpiricalDistribution.from_samples([3, 1, 3, 3, 1])
    assert d.values.tolist() == [1, 3]
    assert d.probs.tolist() == [0.4, 0.6]
    assert d.sample_count == 5


def test_point_mass():
    d = EmpiricalDistribution.point_mass(7.0)
    assert d.values.tolist() == [7.0]
    assert d.probs.tolist() == [1.0]
    assert d.support_min == 7.0 == d.support_max


def test_values_must_strictly_increase():
    with pytest.raises(ValueError, match="increasing"):
        EmpiricalDistribution([2.0, 1.0], [0.5, 0.5])
    with pytest.raises(ValueError, match="increasing"):
        EmpiricalDistribution([1.0, 1.0], [0.5, 0.5])


def test_probs_must_be_positive_and_sum_to_one():
    with pytest.raises(ValueError, match="positive"):
        EmpiricalDistribution([1.0, 2.0], [1.0, 0.0])
    with pytest.raises(ValueError, match="sum"):
        EmpiricalDistribution([1.0, 2.0], [0.5, 0.6])


def test_length_mismatch():
    with pytest.raises(ValueError):
        EmpiricalDistribution([1.0, 2.0], [1.0])


def test_mass_between_is_inclusive():
    d = EmpiricalDistribution([1.0, 2.0, 3.0], [0.2, 0.3, 0.5])
    assert d.mass_between(2.0, 3.0) == pytest.approx(0.8)
    assert d.mass_between(1.5, 2.5) == pytest.approx(0.3)
    assert d.mass_between(4.0, 9.0) == 0.0


def test_quantile_steps():
    d = EmpiricalDistribution([1.0, 2.0, 3.0], [0.2, 0.3, 0.5])
    assert d.quantile(0.0) == 1.0
    assert d.quantile(0.2) == 1.0
    assert d.quantile(0.21) == 2.0
    assert d.quantile(0.5) == 2.0
    assert d.quantile(0.51) == 3.0
    assert d.quantile(1.0) == 3.0


def test_quantile_rejects_out_of_range():
    d = EmpiricalDistribution.point_mass(0.0)
    with pytest.raises(ValueError):
        d.quantile(-0.01)
    with pytest.raises(ValueError):
        d.quantile(1.01)


def test_quantile_matches_sorted_sample_reconstruction():
    rng = np.random.default_rng(5)
    samples = rng.integers(0, 20, size=500)
    d = EmpiricalDistribution.from_samples(samples)
    ordered = np.sort(samples)
    for u in (0.05, 0.25, 0.5, 0.75, 0.95):
        # smallest value whose cumulative mass reaches u
        k = int(np.ceil(u * len(ordered))) - 1
        assert d.quantile(u) == ordered[max(k, 0)]


def test_frozen():
    d = EmpiricalDistribution.point_mass(1.0)
    with pytest.raises(AttributeError):
        d.values = np.array([2.0])
