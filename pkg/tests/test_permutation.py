import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import enumerate_statistic, naive_rho
from studperm.errors import DomainError, EnumerationTooLargeError
from studperm.permutation import (
    FULL,
    MONTE_CARLO,
    PermutationDistribution,
    PermutationScheme,
    all_permutations,
    p_values,
    permutation_distribution,
    permutation_test,
    randomized_test,
    reference_values,
    sample_permutations,
)
from studperm.series import autocorrelation
from studperm.studentizer import LagStatistic, StudentizerConfig

FULL_SCHEME = PermutationScheme(FULL)
TOY = PermutationDistribution(np.array([0.0, 0.0, -0.75, -0.75, -0.75, -0.75]), FULL)


def test_full_enumeration_of_three_points():
    dist = permutation_distribution([1, 2, 3], lambda x: autocorrelation(x, 1), FULL_SCHEME)
    assert sorted(dist.values.tolist()) == sorted([0, 0, -0.75, -0.75, -0.75, -0.75])
    assert sorted(enumerate_statistic([1, 2, 3], lambda v: naive_rho(v, 1))) == sorted(dist.values.tolist())
    # compiled path agrees with the generic one
    fast = permutation_distribution([1, 2, 3], LagStatistic("unstudentized"), FULL_SCHEME)
    np.testing.assert_allclose(fast.values / math.sqrt(3), dist.values, atol=1e-15)


def test_identity_first():
    perms = all_permutations(5)
    assert perms.shape == (120, 5) and (perms[0] == np.arange(5)).all()
    assert len({tuple(p) for p in perms}) == 120
    x = np.random.default_rng(0).standard_normal(40)
    stat = LagStatistic("studentized")
    for scheme in (PermutationScheme(B=50, seed=3),):
        dist = permutation_distribution(x, stat, scheme)
        assert dist.values[0] == stat(x)
        assert dist.size == 51


def test_monte_carlo_is_deterministic(rng):
    x = rng.standard_normal(50)
    stat = LagStatistic("studentized")
    a = permutation_distribution(x, stat, PermutationScheme(B=200, seed=99))
    b = permutation_distribution(x, stat, PermutationScheme(B=200, seed=99))
    c = permutation_distribution(x, stat, PermutationScheme(B=200, seed=100))
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_sampled_rows_are_permutations():
    perms = sample_permutations(9, 500, np.random.default_rng(1))
    assert (np.sort(perms, axis=1) == np.arange(9)).all()
    assert (perms[0] == np.arange(9)).all()


def test_forced_full_coverage_matches_enumeration():
    x = np.array([1, 2, 3, 4, 5, 6, 7], dtype=float) ** 1.3
    stat = LagStatistic("studentized", StudentizerConfig(n_min=3))
    full = permutation_distribution(x, stat, FULL_SCHEME)
    rows = all_permutations(7)
    shuffled = np.vstack([rows[:1], np.random.default_rng(5).permutation(rows[1:])])
    sampled = PermutationDistribution(reference_values(x, stat, shuffled), MONTE_CARLO)
    assert np.array_equal(np.sort(full.values), np.sort(sampled.values))
    for t in np.linspace(-3, 3, 25):
        assert full.cdf(t) == sampled.cdf(t)


def test_enumeration_limit():
    with pytest.raises(EnumerationTooLargeError):
        permutation_distribution(np.arange(9.0), LagStatistic("unstudentized"), FULL_SCHEME)


def test_p_value_examples():
    assert p_values(TOY, 0.0)[0] == pytest.approx(2 / 6)
    assert p_values(TOY, -5.0)[0] == 1.0
    sym = PermutationDistribution(np.array([-2.0, -1.0, 0.0, 1.0, 2.0]), MONTE_CARLO)
    assert p_values(sym, 0.0)[2] == 1.0


def test_monte_carlo_p_value_lower_bound(rng):
    x = rng.standard_normal(30)
    dist = permutation_distribution(x, LagStatistic("unstudentized"), PermutationScheme(B=99, seed=1))
    assert p_values(dist, dist.values.max())[0] >= 1 / 100
    assert all(p_values(dist, v)[0] >= 1 / 100 for v in dist.values)


def test_randomized_toy_example():
    res = randomized_test(TOY, 0.0, 0.05)
    assert (res.m_plus, res.m_zero) == (0, 2)
    assert res.a == pytest.approx(0.15)
    assert res.decision == "randomized" and res.phi == pytest.approx(0.15)


def test_randomized_reject_and_accept():
    values = np.array([0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
    dist = PermutationDistribution(values, FULL)
    # alpha = 0.5: m = 3, T^(3) = 2
    assert randomized_test(dist, 5.0, 0.5).decision == "reject"
    assert randomized_test(dist, 1.0, 0.5).decision == "accept"
    with pytest.raises(DomainError):
        randomized_test(dist, 1.0, 1.5)


def test_randomized_sums_to_alpha_over_orbit():
    x = np.random.default_rng(3).standard_normal(5)
    stat = LagStatistic("unstudentized")
    dist = permutation_distribution(x, stat, FULL_SCHEME)
    total = sum(randomized_test(dist, v, 0.1).phi for v in dist.values)
    assert total == pytest.approx(0.1 * 120)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=200), st.floats(-6, 6))
def test_cdf_properties(values, t):
    dist = PermutationDistribution(np.array(values), MONTE_CARLO)
    assert dist.cdf(-np.inf) == 0.0 and dist.cdf(np.inf) == 1.0
    assert dist.cdf(t) <= dist.cdf(t + 0.5)


def test_exactness_small_scale():
    # quick version of the acceptance criterion: n=5, 3000 datasets
    perms = all_permutations(5)
    stat = LagStatistic("unstudentized")
    rng = np.random.default_rng(8)
    phis = []
    for _ in range(3000):
        x = rng.random(5)
        dist = PermutationDistribution(reference_values(x, stat, perms), FULL)
        phis.append(randomized_test(dist, dist.values[0], 0.1).phi)
    se = math.sqrt(0.1 * 0.9 / 3000)
    assert abs(np.mean(phis) - 0.1) < 4 * se


@pytest.mark.slow
def test_monte_carlo_p_value_validity():
    B, reps = 49, 2000
    stat = LagStatistic("studentized")
    ps = []
    for i in range(reps):
        x = np.random.default_rng(i).standard_normal(40)
        dist = permutation_distribution(x, stat, PermutationScheme(B=B, seed=i))
        ps.append(p_values(dist, dist.values[0])[0])
    ps = np.array(ps)
    se = math.sqrt(0.25 / reps)
    for u in np.linspace(0.02, 0.98, 25):
        assert np.mean(ps <= u) <= u + 1 / (B + 1) + 3 * se


def test_permutation_test_wrapper(rng):
    x = rng.standard_normal(100)
    res = permutation_test(x, "cov", lag=2, scheme=PermutationScheme(B=100, seed=2))
    assert res.n_reference == 101 and 0 < res.p_greater <= 1
    assert res.decision in ("accept", "reject")
    assert res.p_greater + res.p_less >= 1
