"""Hasse-Sondow coefficients of zeta and classical comparison sums.

    A(n, s) = 1 / (2^(n+1) (1 - 2^(1-s))) * sum_{k=0}^{n} (-1)^k C(n, k) (k+1)^(-s)

and ``zeta(s) = sum_{n >= 0} A(n, s)`` for every ``s != 1``.

The inner sum is an ``n``-th finite difference and cancels heavily (terms of
size up to ``2^n`` produce a result of size ``2^(n+1) |A(n, s)|``). Because the
result is divided by ``2^(n+1)`` the *absolute* error stays at the level of the
working precision, so no extra bits are needed for absolute accuracy.
Binomials are exact Python integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import mpmath as mp

from .errors import DegenerateError, DomainError
from .special import ComplexHP, SParam, as_sparam, chi_mpc, working_precision


def _denominator(s: mp.mpc, precision: int) -> mp.mpc:
    den = 1 - mp.power(2, 1 - s)
    if abs(den) < mp.mpf(2) ** (-(precision // 2)):
        raise DegenerateError(f"1 - 2^(1-s) vanishes at s = {mp.nstr(s, 15)}")
    return den


def _powers(s: mp.mpc, n: int) -> list:
    """``(k+1)^(-s)`` for ``k = 0..n``."""
    return [mp.exp(-s * mp.log(k + 1)) for k in range(n + 1)]


def _coeff(n: int, s: mp.mpc, den: mp.mpc, powers) -> mp.mpc:
    acc = mp.fsum((-1) ** k * comb(n, k) * powers[k] for k in range(n + 1))
    return acc / (den * mp.mpf(2) ** (n + 1))


def coeff_discrete(n: int, s, precision: int | None = None) -> ComplexHP:
    """The ``n``-th Hasse-Sondow coefficient ``A(n, s)``."""
    if int(n) != n or n < 0:
        raise DomainError("n must be a non-negative integer")
    n = int(n)
    sp = as_sparam(s, precision)
    with mp.workprec(working_precision(sp.precision)):
        sv = sp.s
        den = _denominator(sv, sp.precision)
        return ComplexHP.from_value(_coeff(n, sv, den, _powers(sv, n)), sp.precision)


@dataclass(frozen=True)
class CoeffSeries:
    s: SParam
    coefficients: tuple
    partial_sums: tuple

    def __len__(self):
        return len(self.coefficients)


def _coeffs_mpc(n_max: int, sp: SParam) -> list:
    sv = sp.s
    den = _denominator(sv, sp.precision)
    powers = _powers(sv, n_max)
    return [_coeff(n, sv, den, powers) for n in range(n_max + 1)]


def coeff_series(n_max: int, s, precision: int | None = None) -> CoeffSeries:
    """Coefficients ``A(0..n_max, s)`` with their running sums; powers are shared across ``n``."""
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    sp = as_sparam(s, precision)
    with mp.workprec(working_precision(sp.precision)):
        cs = _coeffs_mpc(int(n_max), sp)
        sums, acc = [], mp.mpc(0)
        for c in cs:
            acc += c
            sums.append(acc)
        p = sp.precision
        return CoeffSeries(
            sp,
            tuple(ComplexHP.from_value(c, p) for c in cs),
            tuple(ComplexHP.from_value(v, p) for v in sums),
        )


def partial_sum_mpc(x, sp: SParam) -> mp.mpc:
    """``sum_{0 <= n <= floor(x)} A(n, s)`` at the current working precision."""
    if x < 0:
        raise DomainError("x must be >= 0")
    return mp.fsum(_coeffs_mpc(int(mp.floor(x)), sp))


def partial_sum(x, s, precision: int | None = None) -> ComplexHP:
    sp = as_sparam(s, precision)
    with mp.workprec(working_precision(sp.precision)):
        return ComplexHP.from_value(partial_sum_mpc(x, sp), sp.precision)


def classical_main_terms(s, x, y, precision: int | None = None) -> ComplexHP:
    """``sum_{n <= x} n^(-s) + chi(s) sum_{k <= y} k^(s-1)`` (empty sums allowed)."""
    sp = as_sparam(s, precision)
    with mp.workprec(working_precision(sp.precision)):
        sv = sp.s
        if sv == 1:
            raise DomainError("s = 1 is the pole of zeta")
        first = mp.fsum(mp.power(n, -sv) for n in range(1, int(mp.floor(x)) + 1))
        ny = int(mp.floor(y)) if y >= 1 else 0
        second = chi_mpc(sv) * mp.fsum(mp.power(k, sv - 1) for k in range(1, ny + 1)) if ny else 0
        return ComplexHP.from_value(first + second, sp.precision)
