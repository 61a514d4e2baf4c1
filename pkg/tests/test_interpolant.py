import random

import mpmath as mp
import pytest
from hypothesis import given, settings, strategies as st

from zafe.afe import chi_sum_mpc
from zafe.errors import DegenerateError, DomainError, WindowError
from zafe.hasse_sondow import coeff_discrete
from zafe.interpolant import (
    I1_numeric,
    I2_numeric,
    _Integrand,
    _prefactor,
    a_tilde,
    a_tilde_du,
    em_identity_residual,
    psi,
    residue_chi_form,
    residue_term,
)
from zafe.quadrature import QuadratureSpec
from zafe.saddle import omega
from zafe.special import SParam

TOL = 1e-14
Q = QuadratureSpec(tolerance=TOL)


def c(v):
    """High-precision mpc view of a ComplexHP."""
    return v.to_mpc()


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-1e6, max_value=1e6).filter(lambda v: v == 0 or abs(v) > 1e-9))
def test_sawtooth_range_and_period(u):
    with mp.workprec(128):
        v = psi(mp.mpf(u))
        assert -0.5 <= v < 0.5
        assert abs(psi(mp.mpf(u) + 1) - v) < 1e-9


def test_u_zero_reduces_to_gamma_integral():
    with mp.workprec(160):
        assert abs(c(a_tilde(0, 3, QuadratureSpec(tolerance=1e-30))) - mp.mpf(2) / 3) < 1e-29


@pytest.mark.parametrize("s", ["2", "0.5+5i", "0.05+20i"])
def test_interpolates_coefficients(s):
    sp = SParam.from_complex(s)
    with mp.workprec(160):
        for n in (0, 1, 4, 9, 16):
            assert abs(c(a_tilde(n, sp, Q)) - c(coeff_discrete(n, sp))) <= 10 * TOL


def test_large_t_interpolation():
    sp = SParam("0.05", "400")
    with mp.workprec(160):
        assert abs(c(a_tilde(127, sp)) - c(coeff_discrete(127, sp))) <= 10 * TOL


def test_halving_tolerance_is_consistent():
    sp = SParam("0.5", "30")
    a = c(a_tilde(6.4, sp, Q))
    b = c(a_tilde(6.4, sp, Q.with_tolerance(TOL / 2)))
    with mp.workprec(160):
        assert abs(a - b) <= TOL


def test_contours_agree():
    # the ray rotation is a Cauchy deformation; the real axis is an independent path
    sp = SParam("0.5", "10")
    with mp.workprec(160):
        assert abs(c(a_tilde(3.7, sp)) - c(a_tilde(3.7, sp, contour="real-axis"))) <= 2 * TOL
        assert abs(c(I1_numeric(5, sp)) - c(I1_numeric(5, sp, contour="real-axis"))) <= 2 * TOL
        assert abs(c(a_tilde(3.7, sp, phi=0.3)) - c(a_tilde(3.7, sp, phi=-0.2))) <= 2 * TOL


def test_derivative_matches_finite_difference():
    rng = random.Random(20240611)
    fine = QuadratureSpec(tolerance=1e-30)
    h = mp.mpf(2) ** (-128 // 3)
    for _ in range(20):
        u = rng.uniform(0.5, 15)
        sp = SParam(rng.uniform(0.05, 2.5), rng.uniform(-20, 20))
        d = c(a_tilde_du(u, sp, Q))
        with mp.workprec(160):
            fd = (c(a_tilde(u + h, sp, fine)) - c(a_tilde(u - h, sp, fine))) / (2 * h)
            assert abs(d - fd) <= TOL + h ** 2 * 10


def test_derivative_for_real_s_is_negative_and_vanishes():
    values = [c(a_tilde_du(u, 2)) for u in (5, 20, 40, 80)]
    assert all(v.imag == 0 and v.real < 0 for v in values)
    mags = [abs(v) for v in values]
    assert mags == sorted(mags, reverse=True)
    assert mags[-1] < 1e-30


def test_derivative_precision_doubling():
    lo = c(a_tilde_du(10, SParam(2, 0, 128), QuadratureSpec(tolerance=1e-27)))
    hi = c(a_tilde_du(10, SParam(2, 0, 256), QuadratureSpec(tolerance=1e-40)))
    with mp.workprec(256):
        assert abs(lo - hi) < 1e-25


def test_I1_equals_integral_of_interpolant():
    # independent route: Gauss-Legendre in u over direct evaluations of A(u, s)
    x, sp = 2.5, SParam(3, 0)
    inner = QuadratureSpec(tolerance=1e-18)
    with mp.workprec(160):
        f = lambda u: c(a_tilde(u, sp, inner))  # noqa: E731
        outer = mp.quad(f, [x, x + 4, x + 12, x + 30, x + 80], method="gauss-legendre", maxdegree=5)
        assert abs(c(I1_numeric(x, sp, Q)) - outer) <= 10 * TOL


def test_I1_decreases_in_x_for_real_s():
    vals = [c(I1_numeric(x, 3)).real for x in (1.5, 3, 6, 12, 24)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 0
    assert vals[-1] < 1e-6


def test_I2_routes_agree():
    q = QuadratureSpec(tolerance=1e-12)
    sp = SParam("0.5", "20")
    with mp.workprec(160):
        nested = c(I2_numeric(7.3, sp, q))
        kernel = c(I2_numeric(7.3, sp, q, method="kernel"))
        assert abs(nested - kernel) <= 2e-12


@pytest.mark.slow
def test_I2_literal_outer_quadrature():
    q = QuadratureSpec(tolerance=1e-10)
    with mp.workprec(160):
        outer = c(I2_numeric(2.5, 2, q, method="outer"))
        kernel = c(I2_numeric(2.5, 2, q, method="kernel"))
        assert abs(outer - kernel) <= 1e-9


def test_I2_real_for_real_s_at_half_integer():
    v = c(I2_numeric(4.5, 2, Q))
    assert v.imag == 0
    assert v.real != 0


def test_I2_window_doubling():
    sp = SParam("0.5", "5")
    with mp.workprec(160):
        a = c(I2_numeric(3.5, sp, Q, u_window=60))
        b = c(I2_numeric(3.5, sp, Q, u_window=120))
        assert abs(a - b) <= 10 * TOL


def test_I2_window_too_small():
    with pytest.raises(WindowError):
        I2_numeric(3.5, SParam("0.5", "5"), Q, u_window=2)


@pytest.mark.parametrize("x, s, limit", [(10.5, "2", 20 * TOL), (7.3, "0.5+20i", 50 * TOL), (4, "0.8+3i", 50 * TOL)])
def test_euler_maclaurin_identity(x, s, limit):
    assert em_identity_residual(x, SParam.from_complex(s), Q) <= limit


def test_euler_maclaurin_identity_high_precision():
    sp = SParam("1.5", "5", precision=256)
    assert em_identity_residual(3.5, sp, QuadratureSpec(tolerance=1e-20)) <= 1e-18


@settings(max_examples=4, deadline=None)
@given(
    st.floats(min_value=0.6, max_value=9.0),
    st.floats(min_value=0.1, max_value=2.5),
    st.floats(min_value=-25.0, max_value=25.0),
)
def test_euler_maclaurin_identity_random(x, sigma, t):
    if abs(complex(sigma, t) - 1) < 0.1:
        return  # too close to the pole of zeta
    assert em_identity_residual(x, SParam(sigma, t), Q, i2_method="kernel") <= 50 * TOL


@pytest.mark.parametrize("k", [1, 2])
def test_residue_matches_contour_integral(k):
    # numerical residue: integrate the I1 integrand around a small circle
    sp = SParam("0.5", "10")
    with mp.workprec(160):
        s = sp.s
        w0 = mp.mpc(0, (2 * k - 1) * mp.pi)
        integrand = _Integrand("I1", mp.mpf("2.5"), s)

        def f(theta):
            w = w0 + mp.expj(theta) / 2
            return integrand.value(w, mp.log(w)) * 1j * mp.expj(theta) / 2

        loop = mp.quad(f, [0, mp.pi / 2, mp.pi, 3 * mp.pi / 2, 2 * mp.pi])
        expected = c(residue_term(k, sp))
        assert abs(loop * _prefactor(s) - expected) <= 1e-25 * abs(expected)


@pytest.mark.parametrize("k", [1, 2])
def test_residue_chi_form(k):
    sp = SParam("0.05", "50")
    with mp.workprec(160):
        r, f = c(residue_term(k, sp)), c(residue_chi_form(k, sp))
        assert abs(r - f) <= 1e-6 * abs(f)
        # the correction is of relative size e^{-pi t}
        sp5 = SParam("0.05", "5")
        r5, f5 = c(residue_term(k, sp5)), c(residue_chi_form(k, sp5))
        rel = abs(r5 - f5) / abs(f5)
        assert mp.exp(-mp.pi * 5) / 10 < rel < 10 * mp.exp(-mp.pi * 5)


def test_chi_terms_approximate_I1_in_first_band():
    alpha = mp.mpf("0.26")  # one chi term: 1/(pi alpha) rounds to 1
    w = omega(alpha)
    for t in (30, 60, 90, 120):
        sp = SParam("0.05", t)
        with mp.workprec(160):
            i1 = c(I1_numeric(alpha * t, sp))
            plus = chi_sum_mpc(sp.s, 1)
            log_excess = mp.log(abs(i1 - plus)) + w * t
            assert log_excess <= 0
            # the opposite sign is off by a quantity of order one or more
            assert abs(i1 + plus) > 10 * abs(i1 - plus)


def test_domain_and_degeneracy_errors():
    with pytest.raises(DomainError):
        a_tilde(0.2, SParam("-0.5", "3"))
    with pytest.raises(DomainError):
        I1_numeric(0, 2)
    with pytest.raises(DegenerateError):
        a_tilde(2, 1)
    a_tilde(0.6, SParam("-0.5", "3"))  # sigma + u > 0 is enough
