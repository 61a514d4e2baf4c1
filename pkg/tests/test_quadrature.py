import math

import mpmath as mp
import numpy as np
import pytest

from zafe.errors import QuadratureError
from zafe.quadrature import (
    QuadratureSpec,
    RayIntegrand,
    _tanh_sinh_level,
    gauss_legendre_unit,
    integrate_ray,
)


class GammaIntegrand(RayIntegrand):
    """``e^{-w} w^{s-1}``; its integral over any admissible ray is ``Gamma(s)``."""

    def __init__(self, s):
        self.s = complex(s)
        self.t = self.s.imag
        self._s = mp.mpc(s)

    def log_np(self, w):
        return -w + (self.s - 1) * np.log(w)

    def value(self, w, log_w):
        return mp.exp(-w + (self._s - 1) * log_w)

    def log_bound(self, r, phi):
        return -r * math.cos(phi) + (self.s.real - 1) * np.log(r) - self.t * phi


def test_gauss_legendre_integrates_polynomials_exactly():
    with mp.workprec(128):
        rule = gauss_legendre_unit(10, 128)
        assert abs(sum(w for _, w in rule) - 1) < mp.mpf(2) ** -120
        for deg in range(20):
            got = mp.fsum(w * x ** deg for x, w in rule)
            assert abs(got - mp.mpf(1) / (deg + 1)) < mp.mpf(2) ** -118


def test_tanh_sinh_weights_sum_to_one():
    with mp.workprec(128):
        # each level halves the step, so the running sum halves before new nodes are added
        total = mp.fsum(w for _, _, w in _tanh_sinh_level(0, 128))
        for lvl in range(1, 5):
            total = total / 2 + mp.fsum(w for _, _, w in _tanh_sinh_level(lvl, 128))
        assert abs(total - 1) < mp.mpf(10) ** -30


@pytest.mark.parametrize("s", ["2.5", "0.3", "1.5+20j", "2+60j"])
@pytest.mark.parametrize("scheme", ["tanh-sinh", "adaptive-composite"])
def test_ray_integral_of_gamma_kernel(s, scheme):
    with mp.workprec(128):
        sv = mp.mpc(complex(s))
        expected = mp.gamma(sv)
        scale = abs(expected)
        res = integrate_ray(GammaIntegrand(sv), math.log(1e-25 * scale), QuadratureSpec(scheme=scheme), 128)
        assert abs(res.value - expected) <= 1e-24 * scale
        assert res.error_estimate <= 1e-24 * scale


def test_explicit_angle_and_truncation_are_honoured():
    with mp.workprec(128):
        res = integrate_ray(GammaIntegrand(3), math.log(1e-20), QuadratureSpec(truncation_T=120.0), 128, phi=0.4)
        assert res.phi == 0.4 and res.truncation_T == 120.0
        assert abs(res.value - 2) < 1e-19


def test_real_axis_refuses_wild_oscillation():
    with pytest.raises(QuadratureError):
        integrate_ray(GammaIntegrand(mp.mpc("0.5", "400")), math.log(1e-20) - 400 * math.pi / 2,
                      QuadratureSpec(), 128, contour="real-axis")


def test_node_budget_is_enforced():
    with pytest.raises(QuadratureError):
        integrate_ray(GammaIntegrand(mp.mpc("0.5", "60")), -60.0, QuadratureSpec(nodes=50), 128)


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(scheme="simpson")
    with pytest.raises(ValueError):
        QuadratureSpec(tolerance=0)
    assert QuadratureSpec().with_tolerance(1e-9).tolerance == 1e-9
