import math

import mpmath as mp
import pytest

from zafe.afe import (
    SIGN_CONVENTION,
    AfeParams,
    InsufficientRowsError,
    ScanResult,
    afe_eval,
    calibrate_sign,
    error_scan,
    fit_decay_rate,
    simple_afe_classical,
)
from zafe.errors import DegenerateError, DomainError
from zafe.saddle import omega
from zafe.special import SParam, zeta_reference

with mp.workprec(200):
    INV_PI = 1 / mp.pi


def test_params_invariants():
    p = AfeParams.build(SParam("0.05", "100"), alpha=INV_PI * mp.mpf("0.9"))
    with mp.workprec(160):
        t = p.s.t
        assert abs(mp.pi * p.x * p.y - t) <= 10 * mp.eps * t
        assert abs(p.x / p.alpha - t) <= 10 * mp.eps * t
        assert p.N_chi_terms == int(mp.floor(p.y + 0.5))
    q = AfeParams.build(SParam("0.5", "30"), x=2)
    assert q.N_chi_terms == 5  # y = 30 / (2 pi) = 4.77
    assert "floor_y_differs" in q.flags


def test_params_need_exactly_one_of_alpha_or_x():
    with pytest.raises(ValueError):
        AfeParams.build(SParam("0.5", "30"))
    with pytest.raises(ValueError):
        AfeParams.build(SParam("0.5", "30"), alpha=1, x=30)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_degenerate_parameters_are_rejected(N):
    with mp.workprec(200):
        a = 2 / ((2 * N - 1) * mp.pi)
    with pytest.raises(DegenerateError):
        AfeParams.build(SParam("0.05", "100"), alpha=a)
    p = AfeParams.build(SParam("0.05", "100"), alpha=a, allow_degenerate=True)
    assert "degenerate" in p.flags


def test_report_fields_are_consistent():
    rep = afe_eval(AfeParams.build(SParam("0.05", "100"), alpha=INV_PI))
    with mp.workprec(160):
        total = rep.main_sum.to_mpc() + rep.chi_sum_term.to_mpc()
        assert abs(rep.afe_value.to_mpc() - total) <= mp.mpf(2) ** -120
        assert abs(abs(rep.afe_value.to_mpc() - rep.reference.to_mpc()) - rep.abs_error) <= mp.mpf(2) ** -120
    assert abs(rep.omega_used - mp.mpf("0.017728")) < 1e-5
    assert rep.sign_convention == SIGN_CONVENTION == "plus"
    d = rep.to_dict()
    assert set(d) >= {"main_sum", "chi_sum_term", "afe_value", "reference", "abs_error", "omega_used",
                      "predicted_bound", "sign_convention"}


def test_quadless_skips_reference():
    rep = afe_eval(AfeParams.build(SParam("0.05", "100"), alpha=INV_PI), quadless=True)
    assert rep.reference is None and rep.abs_error is None


def test_near_real_smoke_case():
    sp = SParam("2", "0.0001")
    rep = afe_eval(AfeParams.build(sp, x=40))
    with mp.workprec(160):
        assert abs(rep.afe_value.to_mpc() - zeta_reference(sp).to_mpc()) < 1e-6


def test_sign_calibration_is_decisive():
    winner, plus, minus = calibrate_sign(100)
    assert winner == "plus"
    assert minus >= 10 * plus


def test_single_constant_covers_three_heights():
    w = omega(INV_PI)
    excess = []
    for t in (40, 80, 160):
        rep = afe_eval(AfeParams.build(SParam("0.05", t), alpha=INV_PI))
        excess.append(mp.log(rep.abs_error) + w * t)
    # one constant of modest size bounds all three
    assert max(excess) < 0


def test_conjugate_symmetry():
    a = afe_eval(AfeParams.build(SParam("0.3", "60"), alpha="0.25"))
    b = afe_eval(AfeParams.build(SParam("0.3", "-60"), alpha="0.25"))
    with mp.workprec(160):
        for f in ("main_sum", "chi_sum_term", "afe_value", "reference"):
            assert getattr(b, f).to_mpc() == mp.conj(getattr(a, f).to_mpc())
    assert a.abs_error == b.abs_error


def test_fit_exact_line():
    rows = [(t, -0.01 * t + 2) for t in range(10, 110, 10)]
    slope, intercept, r2 = fit_decay_rate(rows)
    assert slope == pytest.approx(-0.01, abs=1e-15)
    assert intercept == pytest.approx(2, abs=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_constant_rows():
    slope, _, r2 = fit_decay_rate([(t, -3.0) for t in range(6)])
    assert slope == 0 and r2 == 1.0


def test_fit_needs_five_rows():
    with pytest.raises(InsufficientRowsError):
        fit_decay_rate([(1, 1), (2, 2), (3, 3), (4, math.inf), (5, 5)])


def test_classical_baseline():
    with mp.workprec(160):
        assert abs(simple_afe_classical(2, 100).to_mpc() - mp.pi ** 2 / 6) < 1e-4
        sp = SParam("0.5", "10")
        err = abs(simple_afe_classical(sp, 10).to_mpc() - zeta_reference(sp).to_mpc())
        assert err <= 5 * 10 ** -0.5
        sp = SParam("1.5", "3")
        errs = [abs(simple_afe_classical(sp, x).to_mpc() - zeta_reference(sp).to_mpc()) for x in (10, 100, 1000)]
        assert errs == sorted(errs, reverse=True) and errs[-1] < 1e-3
    with pytest.raises(DomainError):
        simple_afe_classical(SParam("0.5", "100"), 10)


def test_scan_single_row_and_header():
    res = error_scan(INV_PI, "0.05", 60, 60, 1, with_a_tilde=False)
    assert len(res.rows) == 1
    lines = res.to_csv().split("\n")
    assert lines[0] == ",".join(ScanResult.CSV_HEADER)
    assert "\r" not in res.to_csv()


def test_scan_rejects_small_t():
    with pytest.raises(DomainError):
        error_scan(INV_PI, "0.05", 10, 60, 5)


def test_scan_refinement_keeps_shared_rows():
    coarse = error_scan(INV_PI, "0.05", 50, 90, 3, with_a_tilde=False)
    fine = error_scan(INV_PI, "0.05", 50, 90, 5, with_a_tilde=False)
    for r in coarse.rows:
        match = [f for f in fine.rows if f.t == r.t]
        assert match and match[0].abs_error == r.abs_error and match[0].x == r.x


def test_scan_is_deterministic_and_parallel_safe():
    a = error_scan(INV_PI, "0.05", 50, 80, 3).to_csv()
    b = error_scan(INV_PI, "0.05", 50, 80, 3).to_csv()
    c = error_scan(INV_PI, "0.05", 50, 80, 3, jobs=2).to_csv()
    assert a == b == c


def test_beats_classical_baseline_beyond_one_hundred():
    for t in (100, 175, 250, 400):
        sp = SParam("0.05", t)
        p = AfeParams.build(sp, alpha=INV_PI)
        rep = afe_eval(p)
        with mp.workprec(160):
            classical = abs(simple_afe_classical(sp, p.x).to_mpc() - rep.reference.to_mpc())
        assert rep.abs_error < classical
