import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from studperm.classic import box_pierce, chi_square_upper_tail, ljung_box, regularized_gamma_q
from studperm.errors import DomainError
from studperm.series import autocorrelation


def series_with_rho1(n, rho):
    """A length-n series whose lag-1 sample autocorrelation is exactly ``rho`` (up to rounding)."""
    x = np.random.default_rng(0).standard_normal(n)
    # mix with its own lag to move rho, then bisect on the mixing weight
    lo, hi = -0.99, 0.99
    for _ in range(200):
        w = (lo + hi) / 2
        y = x + w * np.r_[0.0, x[:-1]]
        if autocorrelation(y, 1) < rho:
            lo = w
        else:
            hi = w
    return y


def test_ljung_box_single_lag():
    y = series_with_rho1(100, 0.2)
    res = ljung_box(y, 1)
    assert res.Q == pytest.approx(100 * 102 * 0.04 / 99, rel=1e-9)
    # chi-square(1) upper tail at 4.1212 from an independent incomplete-gamma oracle
    assert res.p_value == pytest.approx(special.gammaincc(0.5, res.Q / 2), abs=1e-12)
    assert res.p_value == pytest.approx(0.0424, abs=1e-3)
    assert res.df == 1 and res.variant == "ljung-box"


def test_box_pierce_single_lag_and_ratio():
    y = series_with_rho1(100, 0.2)
    assert box_pierce(y, 1).Q == pytest.approx(4.0, rel=1e-9)
    x = np.random.default_rng(4).standard_normal(57)
    assert ljung_box(x, 1).Q / box_pierce(x, 1).Q == pytest.approx(59 / 56, rel=1e-13)


def test_zero_autocorrelation_gives_unit_p():
    y = np.array([0.0, 1.0, 0.0, -1.0] * 5)  # rho_1 = rho_3 = 0 exactly
    assert ljung_box(y, 1).Q == 0.0 and ljung_box(y, 1).p_value == 1.0
    assert box_pierce(y, 1).p_value == 1.0


def test_lag_range():
    with pytest.raises(DomainError):
        ljung_box(np.arange(5.0), 4)


@pytest.mark.parametrize("df", [1, 2, 5, 10])
def test_chi_square_zero(df):
    assert chi_square_upper_tail(0.0, df) == 1.0


def test_chi_square_spot_values():
    assert chi_square_upper_tail(3.8415, 1) == pytest.approx(0.05, abs=1e-4)
    assert chi_square_upper_tail(18.307, 10) == pytest.approx(0.05, abs=1e-4)
    with pytest.raises(DomainError):
        chi_square_upper_tail(-1.0, 2)
    with pytest.raises(DomainError):
        chi_square_upper_tail(1.0, 0)


@settings(max_examples=300)
@given(st.floats(0.0, 200.0), st.integers(1, 60))
def test_incomplete_gamma_against_scipy(q, df):
    assert chi_square_upper_tail(q, df) == pytest.approx(special.gammaincc(df / 2, q / 2), abs=1e-10)


@given(st.floats(0.05, 60.0), st.floats(0.01, 5.0), st.integers(1, 30))
def test_upper_tail_decreasing(q, dq, df):
    assert chi_square_upper_tail(q + dq, df) <= chi_square_upper_tail(q, df)


def test_upper_tail_strictly_decreasing_on_grid():
    for df in (1, 3, 10):
        vals = [chi_square_upper_tail(q, df) for q in np.linspace(0, 40, 200)]
        assert all(a > b for a, b in zip(vals, vals[1:]))


def test_regularized_gamma_q_domain():
    with pytest.raises(DomainError):
        regularized_gamma_q(0.0, 1.0)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_ljung_box_dominates_box_pierce(seed, r):
    x = np.random.default_rng(seed).standard_normal(40)
    assert ljung_box(x, r).Q >= box_pierce(x, r).Q


@pytest.mark.slow
def test_ljung_box_invalid_under_ar2():
    from studperm.processes import gen_ar2
    from studperm.rng import substream

    rej = np.mean([ljung_box(gen_ar2(0.0, 0.5, 500, seed=substream(3, i)), 1).p_value <= 0.05 for i in range(2000)])
    assert rej > 0.20
