"""Saddle points of ``f(w; alpha) = alpha log(1 - e^-w) + i log w``.

The nontrivial saddles solve ``e^w - alpha i w - 1 = 0``. Writing
``w = x + i y`` gives the real system

    H1(x, y) = e^x cos y + alpha y - 1 = 0,
    H2(x, y) = e^x sin y - alpha x = 0.

Roots with ``y > 0`` are indexed ``k = 1, 2, ...`` in increasing ``y``. The
band index ``N = floor(1/(pi alpha) + 1/2)`` (so that
``2/((2N+1) pi) < alpha < 2/((2N-1) pi)``) fixes where each root sits:
``y_k`` is near ``2 k pi`` for ``k < N/2`` and near ``(2k-1) pi`` for large
``k``, with two transitional roots in between.

The dominant saddle is the one of ``w_N, w_{N+1}`` with the smaller ``|x|``;
its polar data give the decay rate ``omega(alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp

from .errors import BandError, ConvergenceError, DegenerateError
from .special import ComplexHP, DEFAULT_PRECISION, working_precision

DEFAULT_TOL = 1e-30
_STEP_CLAMP = math.pi / 2
_MAX_NEWTON = 200


@dataclass(frozen=True)
class SaddlePoint:
    index_k: int
    w: ComplexHP
    r: mp.mpf
    theta: mp.mpf
    residual: mp.mpf

    @property
    def x(self):
        return self.w.re

    @property
    def y(self):
        return self.w.im


@dataclass(frozen=True)
class SaddleFamily:
    alpha: mp.mpf
    points: tuple
    selected_k: int
    omega: mp.mpf
    tie: bool = False
    degenerate: bool = False

    def point(self, k: int) -> SaddlePoint:
        return self.points[k - 1]


def band_index(alpha) -> int:
    """``N`` with ``2/((2N+1) pi) < alpha < 2/((2N-1) pi)``; 0 when ``alpha > 2/pi``."""
    return int(mp.floor(1 / (mp.pi * alpha) + mp.mpf(1) / 2))


def degenerate_distance(alpha) -> tuple[int, mp.mpf]:
    """Nearest degenerate value ``2/((2N-1) pi)`` and relative distance to it."""
    N = max(1, band_index(alpha))
    best = None
    for m in (N, N + 1, max(1, N - 1)):
        a0 = 2 / ((2 * m - 1) * mp.pi)
        d = abs(alpha - a0) / a0
        if best is None or d < best[1]:
            best = (m, d)
    return best


def y_seed(alpha, k: int) -> mp.mpf:
    """Band-structure approximation to ``y_k(alpha)``."""
    N = band_index(alpha)
    M = N // 2
    pi = mp.pi
    if 2 * k < N:
        return 2 * k * pi
    if N % 2 == 0:
        if k == M and M >= 1:
            return (2 * M - mp.mpf(1) / 4) * pi
        if k == M + 1:
            return (2 * M + mp.mpf(5) / 4) * pi
    elif k == M + 1:
        return (2 * M + mp.mpf(3) / 2) * pi
    return (2 * k - 1) * pi


def _x_seed(alpha, y) -> mp.mpf:
    """Solve ``H1(x, y) = 0`` for ``x`` at fixed ``y`` when possible."""
    c = mp.cos(y)
    num = 1 - alpha * y
    if c != 0 and num / c > 0:
        return mp.log(num / c)
    return mp.mpf(0)


def _F(w, ai):
    return mp.exp(w) - ai * w - 1


def _newton(seed, ai, tol, damped: bool):
    w = seed
    for _ in range(_MAX_NEWTON):
        ew = mp.exp(w)
        fw = ew - ai * w - 1
        dfw = ew - ai
        if dfw == 0:
            return None
        step = fw / dfw
        limit = _STEP_CLAMP / 4 if damped else _STEP_CLAMP
        if abs(step) > limit:
            step *= limit / abs(step)
        w -= step
        if abs(step) <= tol * max(1, abs(w)) * 1e-3 or abs(_F(w, ai)) <= tol * 1e-3:
            # a couple of polishing steps
            for _ in range(2):
                w -= _F(w, ai) / (mp.exp(w) - ai)
            return w
    return None


def _winding(ai, x0, x1, y0, y1, n=64) -> int:
    """Number of zeros of ``F`` inside the rectangle by the argument principle."""
    pts = []
    for j in range(n):
        pts.append(mp.mpc(x0 + (x1 - x0) * j / n, y0))
    for j in range(n):
        pts.append(mp.mpc(x1, y0 + (y1 - y0) * j / n))
    for j in range(n):
        pts.append(mp.mpc(x1 - (x1 - x0) * j / n, y1))
    for j in range(n):
        pts.append(mp.mpc(x0, y1 - (y1 - y0) * j / n))
    total = 0
    prev = mp.arg(_F(pts[0], ai))
    for p in pts[1:] + pts[:1]:
        cur = mp.arg(_F(p, ai))
        d = cur - prev
        while d > mp.pi:
            d -= 2 * mp.pi
        while d < -mp.pi:
            d += 2 * mp.pi
        total += d
        prev = cur
    return int(mp.nint(total / (2 * mp.pi)))


def _bisect_in_band(ai, y_lo, y_hi, tol, alpha):
    """Shrink a rectangle containing exactly one root, then polish with Newton."""
    x_hi = mp.log(1 + abs(alpha) * (y_hi + 10)) + 2
    box = (mp.mpf(-40), x_hi, y_lo, y_hi)
    if _winding(ai, *box) < 1:
        return None
    for _ in range(40):
        x0, x1, y0, y1 = box
        if max(x1 - x0, y1 - y0) < 0.05:
            break
        if x1 - x0 > y1 - y0:
            xm = (x0 + x1) / 2
            halves = [(x0, xm, y0, y1), (xm, x1, y0, y1)]
        else:
            ym = (y0 + y1) / 2
            halves = [(x0, x1, y0, ym), (x0, x1, ym, y1)]
        for h in halves:
            if _winding(ai, *h) >= 1:
                box = h
                break
        else:
            return None
    x0, x1, y0, y1 = box
    return _newton(mp.mpc((x0 + x1) / 2, (y0 + y1) / 2), ai, tol, damped=True)


def _make_point(k, w, ai, precision) -> SaddlePoint:
    return SaddlePoint(
        index_k=k,
        w=ComplexHP.from_value(w, precision),
        r=+abs(w),
        theta=mp.arg(w),
        residual=abs(_F(w, ai)),
    )


def solve_saddle(alpha, k: int, tol: float = DEFAULT_TOL, precision: int = DEFAULT_PRECISION,
                 conjugate: bool = False) -> SaddlePoint:
    """The ``k``-th saddle ``w_k(alpha)`` (``y_k > 0``).

    ``conjugate=True`` solves ``e^w + alpha i w - 1 = 0`` instead and returns
    the root with ``y < 0`` (the complex conjugate of ``w_k``).
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if k < 1:
        raise ValueError("k must be >= 1")
    with mp.workprec(working_precision(precision)):
        a = mp.mpf(alpha)
        sign = -1 if conjugate else 1
        ai = mp.mpc(0, sign * a)
        ys = y_seed(a, k)
        seed = mp.mpc(_x_seed(a, ys), sign * ys)

        def in_band(w):
            return w is not None and abs(sign * w.imag - ys) <= mp.pi and sign * w.imag > 0

        w = _newton(seed, ai, tol, damped=False)
        if not in_band(w):
            w = _newton(seed, ai, tol, damped=True)
        if not in_band(w):
            lo, hi = ys - mp.pi, ys + mp.pi
            if sign < 0:
                lo, hi = -hi, -lo
            w = _bisect_in_band(ai, max(lo, mp.mpf("1e-3")) if sign > 0 else lo, hi, tol, a)
        if w is None:
            raise ConvergenceError(f"saddle k={k} at alpha={mp.nstr(a, 12)} did not converge")
        if not in_band(w):
            raise BandError(f"saddle k={k} left its band: y={mp.nstr(w.imag, 8)}, seed {mp.nstr(ys, 8)}")
        if abs(_F(w, ai)) > tol:
            raise ConvergenceError(f"saddle residual {mp.nstr(abs(_F(w, ai)), 3)} exceeds {tol}")
        return _make_point(k, w, ai, precision)


def _omega_value(alpha, w) -> mp.mpf:
    return -alpha * mp.log(abs((1 - mp.exp(-w)) / 2)) + mp.arg(w) - mp.pi / 2


def _select(alpha, points, tol):
    N = band_index(alpha)
    if N == 0:
        return 1, False
    xN, xN1 = abs(points[N - 1].w.re), abs(points[N].w.re)
    if abs(xN - xN1) <= tol:
        return N + 1, True
    return (N, False) if xN < xN1 else (N + 1, False)


def saddle_family(alpha, k_max: int, tol: float = DEFAULT_TOL, precision: int = DEFAULT_PRECISION) -> SaddleFamily:
    """Saddles ``k = 1..max(k_max, N+1)``, the dominant index and ``omega``.

    Near a degenerate ``alpha`` the family is still returned, with
    ``degenerate=True`` and the formula value of ``omega`` (which tends to 0).
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    with mp.workprec(working_precision(precision)):
        a = mp.mpf(alpha)
        N = band_index(a)
        kk = max(int(k_max), N + 1)
        pts = tuple(solve_saddle(a, k, tol, precision) for k in range(1, kk + 1))
        ys = [p.w.im for p in pts]
        if any(y1 >= y2 for y1, y2 in zip(ys, ys[1:])):
            raise BandError("saddle ordinates are not strictly increasing")
        for p in pts:
            # e^x = |1 + i alpha w| exactly, so x_k grows like log k
            if p.w.re > mp.log(1 + a * (abs(p.w.to_mpc()) + 1)) + 1e-6:
                raise ConvergenceError(f"saddle k={p.index_k} violates the logarithmic growth envelope")
        _, dist = degenerate_distance(a)
        degenerate = dist <= 1e-9
        sel, tie = _select(a, pts, 1e-12)
        om = _omega_value(a, pts[sel - 1].w.to_mpc())
        return SaddleFamily(a, pts[: max(int(k_max), sel)], sel, om, tie, degenerate)


def select_k(alpha, family: SaddleFamily | None = None, tol: float = 1e-9) -> int:
    """Index of the dominant saddle; ``1`` when ``alpha > 2/pi``."""
    a = mp.mpf(alpha)
    _, dist = degenerate_distance(a)
    if dist <= tol:
        raise BandError(f"alpha = {mp.nstr(a, 12)} is on a band boundary 2/((2N-1) pi)")
    if band_index(a) == 0:
        return 1
    if family is None:
        family = saddle_family(a, band_index(a) + 1)
    return _select(a, family.points, 1e-12)[0]


def omega(alpha, tol: float = 1e-9, precision: int = DEFAULT_PRECISION) -> mp.mpf:
    """Decay rate ``-alpha log|(1 - e^-w)/2| + theta - pi/2`` at the dominant saddle."""
    a = mp.mpf(alpha)
    m, dist = degenerate_distance(a)
    if dist <= tol:
        raise DegenerateError(f"alpha = {mp.nstr(a, 12)} is the degenerate value 2/({2 * m - 1} pi); omega = 0")
    fam = saddle_family(a, band_index(a) + 1, precision=precision)
    return fam.omega


def f_prime(w, alpha):
    e = mp.exp(-w)
    return alpha * e / (1 - e) + mp.mpc(0, 1) / w


def f_second(w, alpha):
    e = mp.exp(-w)
    return -alpha * e / (1 - e) ** 2 - mp.mpc(0, 1) / w ** 2


def log_asymptotic_I_magnitude(sigma, t, alpha, precision: int = DEFAULT_PRECISION) -> mp.mpf:
    """Log of the leading saddle estimate of ``|int_0^inf e^-w (1-e^-w)^(alpha t) w^(s-1) dw|``."""
    if not t > 0:
        raise ValueError("t must be positive")
    with mp.workprec(working_precision(precision)):
        a, t, sigma = mp.mpf(alpha), mp.mpf(t), mp.mpf(sigma)
        fam = saddle_family(a, band_index(a) + 1, precision=precision)
        w = fam.point(fam.selected_k).w.to_mpc()
        fpp = abs(f_second(w, a))
        return (
            mp.log(2 * mp.pi / (t * fpp)) / 2
            - w.real
            + a * t * mp.log(abs(1 - mp.exp(-w)))
            + (sigma - 1) * mp.log(abs(w))
            - t * mp.arg(w)
        )


def asymptotic_I_magnitude(sigma, t, alpha, precision: int = DEFAULT_PRECISION) -> mp.mpf:
    with mp.workprec(working_precision(precision)):
        return mp.exp(log_asymptotic_I_magnitude(sigma, t, alpha, precision))
