import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_components, naive_rho
from studperm.errors import DegenerateSeriesError, DomainError, SeriesTooShortError
from studperm.harness import ks_distance
from studperm.processes import gen_ar2, gen_m_dependent_product
from studperm.rng import substream
from studperm.studentizer import (
    LagStatistic,
    StudentizerConfig,
    TruncationRule,
    derived_series,
    studentized_cov_statistic,
    studentized_rho_statistic,
    unstudentized_rho_statistic,
    variance_components,
)

SMALL = StudentizerConfig(n_min=3)


def test_derived_series_examples():
    y, z = derived_series([1, 2, 3], 1)
    np.testing.assert_allclose(y, [0, 0])
    np.testing.assert_allclose(z, [1, 0, 1])
    y, z = derived_series([1, -1, 1, -1], 1)
    np.testing.assert_allclose(y, [-1, -1, -1])
    np.testing.assert_allclose(z, [1, 1, 1, 1])
    y, z = derived_series([2.5] * 6, 2)
    assert not y.any() and not z.any()


@pytest.mark.parametrize("n, b", [(7, 2), (8, 3), (26, 3), (27, 4), (64, 5), (100, 5), (500, 8), (1000, 11), (10_000, 22)])
def test_cube_root_rule(n, b):
    assert TruncationRule()(n) == b


def test_truncation_rule_parse_roundtrip():
    for text in ("cbrt", "fixed:4", "power:0.25"):
        assert str(TruncationRule.parse(text)) == text
    with pytest.raises(DomainError):
        TruncationRule.parse("bartlett")


def test_bandwidth_is_clamped():
    cfg = StudentizerConfig(lag=3, truncation=TruncationRule("fixed", 50), n_min=3)
    assert cfg.bandwidth(10) == (5, True)
    vc = variance_components(np.random.default_rng(0).standard_normal(10), cfg)
    assert vc.clamped and vc.bandwidth == 5


def test_errors():
    with pytest.raises(SeriesTooShortError):
        variance_components(np.arange(10.0))
    with pytest.raises(DegenerateSeriesError):
        variance_components(np.ones(30))
    with pytest.raises(DomainError):
        StudentizerConfig(epsilon=0)


def test_floor_applies():
    # alternating series: Y is constant, so T2 and nu vanish and K2 is zero too
    x = np.tile([1.0, -1.0], 15)
    vc = variance_components(x)
    assert vc.floored and vc.gamma2 == 1e-6


@pytest.mark.parametrize("seed", range(5))
def test_matches_naive_oracle_on_product_process(seed):
    x = gen_m_dependent_product(1, 1, 100, seed)
    cfg = StudentizerConfig()
    vc = variance_components(x, cfg)
    ref = naive_components(x.tolist(), 1, cfg.bandwidth(100)[0])
    assert vc.gamma2 == pytest.approx(max(1e-6, ref["gamma2"]), abs=1e-10)
    for key in ("K2", "T2", "nu"):
        assert getattr(vc, key) == pytest.approx(ref[key], rel=1e-10, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-5, 5, allow_nan=False), min_size=8, max_size=60).filter(lambda v: np.std(v) > 1e-2),
    st.integers(1, 4),
    st.integers(1, 6),
)
def test_naive_oracle_equivalence_any_lag(values, k, b):
    n = len(values)
    if k > n - 4:
        k = 1
    cfg = StudentizerConfig(lag=k, truncation=TruncationRule("fixed", b), n_min=3)
    vc = variance_components(values, cfg)
    ref = naive_components(values, k, vc.bandwidth)
    scale = abs(ref["T2"]) + abs(ref["rho"] * ref["nu"]) + ref["rho"] ** 2 * abs(ref["K2"])
    raw = (vc.T2 - 2 * vc.autocorrelation * vc.nu + vc.autocorrelation**2 * vc.K2) / vc.variance**2
    assert raw == pytest.approx(ref["gamma2"], rel=1e-10, abs=1e-10 * scale / ref["var"] ** 2)
    assert vc.gamma2 >= cfg.epsilon
    assert vc.autocorrelation == pytest.approx(naive_rho(values, k), rel=1e-10, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=5, max_size=50))
def test_gamma_floor_invariant(values):
    try:
        vc = variance_components(values, SMALL)
    except DomainError:
        return
    raw = (vc.T2 - 2 * vc.autocorrelation * vc.nu + vc.autocorrelation**2 * vc.K2) / vc.variance**2
    assert vc.gamma2 >= SMALL.epsilon
    assert vc.floored == (raw < SMALL.epsilon)


def test_zero_numerator_gives_zero_statistic():
    y = np.array([0.0, 1.0, 0.0, -1.0] * 6)  # lag-1 products are all zero
    assert studentized_rho_statistic(y) == 0.0
    assert studentized_cov_statistic(y) == 0.0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100))
def test_scale_and_shift_invariance(seed, a):
    x = np.random.default_rng(seed).standard_normal(60)
    s = studentized_rho_statistic(x)
    assert studentized_rho_statistic(a * x) == pytest.approx(s, abs=1e-8, rel=1e-8)
    c = studentized_cov_statistic(x)
    assert studentized_cov_statistic(x + 37.5) == pytest.approx(c, abs=1e-8, rel=1e-8)


def test_lag_statistic_matches_functions(rng):
    x = rng.standard_normal(80)
    cfg = StudentizerConfig(lag=2)
    assert LagStatistic("studentized", cfg)(x) == pytest.approx(studentized_rho_statistic(x, cfg), rel=1e-12)
    assert LagStatistic("cov", cfg)(x) == pytest.approx(studentized_cov_statistic(x, cfg), rel=1e-12)
    assert LagStatistic("unstudentized", cfg)(x) == pytest.approx(unstudentized_rho_statistic(x, 2), rel=1e-12)


def test_iid_gamma_near_one():
    x = np.random.default_rng(11).standard_normal(10_000)
    assert 0.9 <= variance_components(x).gamma2 <= 1.1


def _gamma_draws(m, permute):
    out = []
    for s in range(100):
        x = gen_m_dependent_product(m, 1, 10_000, s)
        if permute:
            x = np.random.default_rng(10_000 + s).permutation(x)
        out.append(variance_components(x).gamma2)
    return np.array(out)


@pytest.mark.slow
@pytest.mark.parametrize("m", [0, 1])
def test_gamma_consistent_for_products(m):
    g = _gamma_draws(m, permute=False)
    # flat-kernel estimator: relative sd ~ sqrt(2 (2b + 1) / n) ~ 0.1 at n = 1e4
    assert np.mean(g) == pytest.approx(3**m, rel=0.05)
    assert np.median(g) == pytest.approx(3**m, rel=0.05)


@pytest.mark.slow
@pytest.mark.parametrize("m", [0, 1])
def test_permuted_gamma_tends_to_one(m):
    g = _gamma_draws(m, permute=True)
    assert np.mean(g) == pytest.approx(1.0, rel=0.05)


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="estimator spread at n=1e4 puts ~12% (m=0) and ~27% (m=1) of draws outside +-15%")
@pytest.mark.parametrize("m", [0, 1])
def test_gamma_within_15pct_in_90pct_of_runs(m):
    g = _gamma_draws(m, permute=False)
    assert np.mean(np.abs(g / 3**m - 1) < 0.15) >= 0.9


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="same estimator spread: ~86% (m=0), ~76% (m=1) of permuted draws fall in [0.85, 1.15]")
@pytest.mark.parametrize("m", [0, 1])
def test_permuted_gamma_band(m):
    g = _gamma_draws(m, permute=True)
    assert np.mean((g >= 0.85) & (g <= 1.15)) >= 0.9


@pytest.mark.slow
def test_studentized_statistic_is_asymptotically_normal_on_ar2():
    v = [studentized_rho_statistic(gen_ar2(0.0, 0.5, 1000, seed=substream(7, i))) for i in range(2000)]
    assert ks_distance(v) < 0.05
