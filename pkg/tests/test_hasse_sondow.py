from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings, strategies as st

from zafe.errors import DegenerateError, DomainError
from zafe.hasse_sondow import (
    classical_main_terms,
    coeff_discrete,
    coeff_series,
    partial_sum,
)
from zafe.special import SParam, zeta_reference


def exact_coeff(n, s):
    """Rational oracle for integer s >= 2."""
    acc = sum(Fraction((-1) ** k * mp.binomial(n, k).__int__(), (k + 1) ** s) for k in range(n + 1))
    return acc / (2 ** (n + 1) * (1 - Fraction(2) ** (1 - s)))


def test_first_coefficient_closed_form():
    with mp.workprec(160):
        s = mp.mpc("0.3", "11")
        expected = 1 / (2 * (1 - mp.power(2, 1 - s)))
        assert abs(coeff_discrete(0, SParam("0.3", "11")).to_mpc() - expected) < mp.mpf(2) ** -125


def test_hand_evaluated_coefficient():
    assert coeff_discrete(1, 2).to_mpc() == mp.mpf(3) / 8


@pytest.mark.parametrize("n", [0, 1, 5, 17, 40])
@pytest.mark.parametrize("s", [2, 3, 7])
def test_coefficients_match_rational_oracle(n, s):
    exact = exact_coeff(n, s)
    with mp.workprec(200):
        got = coeff_discrete(n, s).to_mpc()
        assert abs(got - mp.mpf(exact.numerator) / exact.denominator) < mp.mpf(2) ** -120


def test_series_converges_to_zeta_two():
    series = coeff_series(80, 2)
    with mp.workprec(160):
        assert abs(series.partial_sums[-1].to_mpc() - mp.pi ** 2 / 6) < mp.mpf("1e-20")


def test_prefix_sums_are_exact_running_totals():
    series = coeff_series(30, "0.5+10i")
    with mp.workprec(160):
        for n in range(1, len(series)):
            diff = series.partial_sums[n].to_mpc() - series.partial_sums[n - 1].to_mpc()
            assert abs(diff - series.coefficients[n].to_mpc()) <= mp.mpf(2) ** -120


def test_partial_sum_floor_semantics():
    s = SParam("0.5", "3")
    assert partial_sum(0, s).to_mpc() == coeff_discrete(0, s).to_mpc()
    assert partial_sum(0.99, s).to_mpc() == partial_sum(0, s).to_mpc()
    assert partial_sum(4.7, s).to_mpc() == partial_sum(4, s).to_mpc()
    with pytest.raises(DomainError):
        partial_sum(-1, s)


def test_partial_sum_precision_doubling():
    low = partial_sum(50, 3, precision=128).to_mpc()
    high = partial_sum(50, 3, precision=256).to_mpc()
    assert abs(low - high) < mp.mpf("1e-30")


@settings(max_examples=25, deadline=None)
@given(
    st.integers(min_value=0, max_value=200),
    st.floats(min_value=0.0, max_value=3.0),
    st.floats(min_value=-200.0, max_value=200.0),
)
def test_cancellation_audit(n, sigma, t):
    s = SParam(sigma, t)
    if abs(1 - mp.power(2, 1 - s.s)) < 1e-6:
        return
    p = 128
    low = coeff_discrete(n, SParam(sigma, t, p)).to_mpc()
    high = coeff_discrete(n, SParam(sigma, t, 2 * p)).to_mpc()
    with mp.workprec(2 * p):
        assert abs(low - high) <= mp.mpf(2) ** (-p + 8)


@pytest.mark.parametrize("s", [2, "1.5", "3.25"])
def test_real_s_gives_real_sums(s):
    series = coeff_series(25, s)
    for v in series.partial_sums:
        assert v.im == 0


@pytest.mark.parametrize("sigma", ["0.05", "0.5", "1.5"])
@pytest.mark.parametrize("t", ["0", "10", "50"])
def test_error_eventually_decreases(sigma, t):
    s = SParam(sigma, t)
    series = coeff_series(160, s)
    with mp.workprec(200):
        ref = zeta_reference(s, target_error=1e-33).to_mpc()
        errs = [abs(v.to_mpc() - ref) for v in series.partial_sums]
    # burn-in grows with |t|; the error must shrink monotonically after it
    burn = 20 + 2 * int(float(t))
    # past the working-precision floor the error is pure rounding noise
    tail = [e for e in errs[burn:] if e > mp.mpf("1e-30")]
    assert len(tail) >= 10
    assert all(b < a for a, b in zip(tail, tail[1:]))


def test_degenerate_denominator_is_rejected():
    with pytest.raises(DegenerateError):
        coeff_discrete(3, 1)
    with mp.workprec(200):
        s = mp.mpc(1, 2 * mp.pi / mp.ln2)
    with pytest.raises(DegenerateError):
        coeff_discrete(3, s)


def test_negative_index_rejected():
    with pytest.raises(DomainError):
        coeff_discrete(-1, 2)


def test_classical_sums():
    with mp.workprec(160):
        assert abs(classical_main_terms(2, 1000, 0.5).to_mpc() - mp.pi ** 2 / 6) < 1e-3
        pure = classical_main_terms("0.5+3i", 7, 0.5).to_mpc()
        s = mp.mpc("0.5", 3)
        assert abs(pure - mp.fsum(mp.power(n, -s) for n in range(1, 8))) < mp.mpf(2) ** -120


def test_classical_two_sum_bound():
    sp = SParam("0.5", "30")
    x = y = mp.sqrt(30 / (2 * mp.pi))
    err = abs(classical_main_terms(sp, x, y).to_mpc() - zeta_reference(sp).to_mpc())
    bound = x ** -0.5 + y ** -0.5
    assert err <= 5 * bound
