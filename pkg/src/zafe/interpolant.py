"""The interpolating function ``A(u, s)`` and the Euler-Maclaurin integrals.

All quantities share one integral shape::

    P(s) * int_0^inf exp(-w) q(w)^u w^(s-1) m(L(w)) dw,
    P(s) = 1 / (2 (1 - 2^(1-s)) Gamma(s)),   q = (1 - e^-w)/2,   L = log q,

with a multiplier ``m`` that distinguishes them:

=============  ==========================================================
``a_tilde``     ``m = 1``
``a_tilde_du``  ``m = L`` (derivative in ``u``)
``I1``          ``m = -1/L``  (``int_x^inf q^u du = -q^x / L``)
``I2``          ``m = int_x^{x+W} psi(u) L q^(u-x) du`` (sawtooth-weighted)
=============  ==========================================================

``q`` has positive real part throughout ``Re w > 0``, so the principal ``log``
is continuous there; the poles of ``1/L`` (``w = (2k-1) pi i``) and the branch
points (``w = 2 pi k i``) sit on the imaginary axis. Integration therefore runs
along a ray ``arg w = phi`` with ``|phi| < pi/2`` chosen to avoid the
exponential cancellation that ``w^(it)`` causes on the real axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .errors import DegenerateError, DomainError, QuadratureError, WindowError
from .quadrature import CONTOURS, QuadratureSpec, RayIntegrand, gauss_legendre_unit, integrate_ray
from .special import ComplexHP, GUARD_BITS, as_sparam, chi_mpc, working_precision

DEFAULT_QUAD = QuadratureSpec()

# Radius of the segment near w = 0 that is integrated by power series.
_HEAD_RADIUS = 0.5
_MAX_WINDOW = 5120


@dataclass(frozen=True)
class SawtoothPsi:
    """``psi(u) = u - floor(u) - 1/2``, periodic with period 1."""

    def __call__(self, u):
        return u - mp.floor(u) - mp.mpf(1) / 2


psi = SawtoothPsi()


# --------------------------------------------------------------------------
# Prefactor and domain checks


def _prefactor(s: mp.mpc) -> mp.mpc:
    den = 1 - mp.power(2, 1 - s)
    if abs(den) < mp.mpf(2) ** (-mp.mp.prec // 2):
        raise DegenerateError(f"1 - 2^(1-s) vanishes at s = {mp.nstr(s, 12)}")
    return mp.exp(-mp.loggamma(s)) / (2 * den) if not _gamma_pole(s) else mp.mpc(0)


def _gamma_pole(s: mp.mpc) -> bool:
    return s.imag == 0 and s.real <= 0 and mp.isint(s.real)


def _check_domain(u, s: mp.mpc):
    if not s.real + u > 0:
        raise DomainError(f"integral diverges at w = 0: need sigma + u > 0 (sigma = {mp.nstr(s.real, 8)}, u = {u})")


# --------------------------------------------------------------------------
# Power series near w = 0:  q^u = (w/2)^u * h(w)^u,  h(w) = (1 - e^-w)/w


def _series_log1(a):
    """log of a power series with a[0] == 1."""
    n = len(a)
    b = [mp.mpf(0)] * n
    for k in range(1, n):
        acc = a[k] * k
        for j in range(1, k):
            acc -= j * b[j] * a[k - j]
        b[k] = acc / k
    return b


def _series_exp0(d):
    """exp of a power series with d[0] == 0."""
    n = len(d)
    c = [mp.mpf(0)] * n
    c[0] = mp.mpf(1)
    for k in range(1, n):
        acc = 0
        for j in range(1, k + 1):
            acc += j * d[j] * c[k - j]
        c[k] = acc / k
    return c


def _series_mul(a, b):
    n = len(a)
    return [mp.fsum(a[j] * b[k - j] for j in range(k + 1)) for k in range(n)]


def _head_integral(kind: str, u, s: mp.mpc, z0: mp.mpc, log_z0: mp.mpc) -> mp.mpc:
    """``int_0^z0 exp(-w) q^u w^(s-1) m dw`` by term-wise integration, ``m in {1, L}``."""
    terms = int(mp.mp.prec * math.log(2) / math.log(2 * math.pi / abs(complex(z0)))) + 8
    h = [mp.mpf((-1) ** j) / mp.factorial(j + 1) for j in range(terms)]
    ell = _series_log1(h)
    d = [u * e for e in ell]
    d[1] -= 1
    g = _series_exp0(d)  # exp(-w) h(w)^u
    a = s + u
    scale = mp.power(2, -u)
    if kind == "a":
        total = mp.fsum(g[j] * mp.exp((a + j) * log_z0) / (a + j) for j in range(terms))
        return scale * total
    # m = L = log w - log 2 + ell(w)
    gl = _series_mul(g, ell)
    total = 0
    for j in range(terms):
        e = a + j
        zp = mp.exp(e * log_z0)
        total += g[j] * zp * ((log_z0 - mp.ln2) / e - 1 / e ** 2) + gl[j] * zp / e
    return scale * total


# --------------------------------------------------------------------------
# Integrand


class _Integrand(RayIntegrand):
    """``exp(-w) q^u w^(s-1) m(L)`` for one of the four multipliers."""

    def __init__(self, kind: str, u, s: mp.mpc, window: int | None = None, gl_degree: int = 0):
        self.kind = kind
        self.u = u
        self.s = s
        self.sigma = float(s.real)
        self.t = float(s.imag)
        self.s_np = complex(s)
        self.u_f = float(u)
        self.frac = u - mp.floor(u)
        self.frac_f = float(self.frac)
        self.window = window
        self.gl_degree = gl_degree
        self._gl_cache = {}

    # -- double-precision planning ------------------------------------------------
    def _logs_np(self, w):
        with np.errstate(all="ignore"):
            q = -np.expm1(-w) / 2
            L = np.log(q)
            base = -w + self.u_f * L + (self.s_np - 1) * np.log(w)
            return q, L, base

    def log_np(self, w):
        q, L, base = self._logs_np(w)
        with np.errstate(all="ignore"):
            if self.kind == "a":
                return base
            if self.kind == "du":
                return base + np.log(L)
            if self.kind == "I1":
                return base + np.log(-1 / L)
            # I2 kernel (window to infinity) is a good proxy for the windowed multiplier
            f = self.frac_f
            m = np.exp((1 - f) * L) / ((1 + np.exp(-w)) / 2) - (f - 0.5) + 1 / L
            return base + np.log(m)

    def log_bound(self, r, phi):
        c = math.cos(phi)
        with np.errstate(all="ignore"):
            qb = np.log((1 + np.exp(-r * c)) / 2)
            return -r * c + self.u_f * qb + (self.sigma - 1) * np.log(r) - self.t * phi + math.log(8)

    def singular_points(self, r_max, phi):
        sign = 1 if phi >= 0 else -1
        return [complex(0, sign * m * math.pi) for m in range(1, int(r_max / math.pi) + 2)]

    # -- high-precision values ----------------------------------------------------
    def _gl(self, n):
        key = (n, mp.mp.prec)
        if key not in self._gl_cache:
            self._gl_cache[key] = gauss_legendre_unit(n, mp.mp.prec)
        return self._gl_cache[key]

    def value(self, w, log_w):
        em = mp.exp(-w)
        # expm1 only where 1 - e^-w would cancel
        q = -mp.expm1(-w) / 2 if abs(w) < 0.5 else (1 - em) / 2
        L = mp.log(q)
        base = mp.exp(-w + self.u * L + (self.s - 1) * log_w)
        if self.kind == "a":
            return base
        if self.kind == "du":
            return base * L
        if self.kind == "I1":
            return -base / L
        one_minus_q = (1 + em) / 2
        f = self.frac
        if self.kind == "I2k":
            return base * (mp.exp((1 - f) * L) / one_minus_q - (f - mp.mpf(1) / 2) + 1 / L)
        return base * self._windowed(L, q, one_minus_q, f)

    def _windowed(self, L, q, one_minus_q, f):
        """``int_x^{x+W} psi(u) L q^(u-x) du`` by Gauss-Legendre on unit cells.

        psi is the same function of the in-cell offset in every cell, so the
        W-1 full cells share one inner quadrature scaled by a geometric sum.
        """
        half = mp.mpf(1) / 2
        nodes = self._gl(self.gl_degree)
        # full cell:  int_0^1 (v - 1/2) L e^{vL} dv
        G = mp.fsum(wt * (v - half) * L * mp.exp(v * L) for v, wt in nodes)
        # first partial cell [x, floor(x)+1):  v in [f, 1)
        first = 0
        if f < 1:
            span = 1 - f
            first = span * mp.fsum(wt * (f + span * v - half) * L * mp.exp(span * v * L) for v, wt in nodes)
        # last partial cell [floor(x)+W, x+W): v in [0, f)
        last = 0
        if f > 0:
            shift = mp.exp((self.window - f) * L)
            last = f * shift * mp.fsum(wt * (f * v - half) * L * mp.exp(f * v * L) for v, wt in nodes)
        cells = self.window - 1
        geo = mp.exp((1 - f) * L) * (1 - mp.exp(cells * L)) / one_minus_q if cells > 0 else 0
        return first + G * geo + last


def _max_abs_L(integrand: _Integrand) -> float:
    r = np.geomspace(1e-12, 200.0, 2000)
    w = r * np.exp(1j * 0.7)
    _, L, _ = integrand._logs_np(w)
    return float(np.nanmax(np.abs(L)))


def _integrate(kind, u, s, quad, contour="deformed", phi=None, window=None, tol_scale=1.0):
    """Return ``(value at working precision, RayResult)`` for the given multiplier."""
    if contour not in CONTOURS:
        raise ValueError(f"contour must be one of {CONTOURS}")
    quad = DEFAULT_QUAD if quad is None else quad
    sp = as_sparam(s)
    with mp.workprec(working_precision(sp.precision)):
        sv = sp.s
        u_mp = mp.mpf(u)
        _check_domain(u_mp, sv)
        P = _prefactor(sv)
        if P == 0:
            return mp.mpc(0), None
        log_tol = math.log(quad.tolerance * tol_scale) - float(mp.log(abs(P)))
        gl_deg = 0
        integrand = _Integrand(kind, u_mp, sv, window=window)
        if kind == "I2":
            gl_deg = 24 + int(math.ceil(1.2 * _max_abs_L(integrand)))
            integrand.gl_degree = gl_deg
        min_bits = working_precision(sp.precision)
        use_head = kind in ("a", "du")
        res = integrate_ray(
            integrand, log_tol, quad, min_bits, contour=contour, phi=phi,
            head_radius=_HEAD_RADIUS if use_head else None,
        )
        total = res.value
        if use_head:
            with mp.workprec(res.working_precision):
                z0 = _HEAD_RADIUS * mp.expjpi(mp.mpf(res.phi) / mp.pi)
                log_z0 = mp.log(_HEAD_RADIUS) + mp.mpc(0, res.phi)
                total = total + _head_integral(kind, u_mp, mp.mpc(sv), z0, log_z0)
        with mp.workprec(max(res.working_precision, mp.mp.prec)):
            return P * total, res


def _out(v, s, precision=None):
    sp = as_sparam(s)
    return ComplexHP.from_value(v, sp.precision if precision is None else precision)


def a_tilde(u, s, quad: QuadratureSpec | None = None, *, contour: str = "deformed", phi=None) -> ComplexHP:
    """The interpolant ``A(u, s)``; agrees with the Hasse-Sondow coefficient at integers."""
    return _out(_integrate("a", u, s, quad, contour, phi)[0], s)


def a_tilde_du(u, s, quad: QuadratureSpec | None = None, *, contour: str = "deformed", phi=None) -> ComplexHP:
    """``d/du A(u, s)``, obtained by inserting ``log q`` under the integral."""
    return _out(_integrate("du", u, s, quad, contour, phi)[0], s)


def I1_numeric(x, s, quad: QuadratureSpec | None = None, contour: str = "deformed", *, phi=None) -> ComplexHP:
    """``int_x^inf A(u, s) du`` with the ``u`` integral done in closed form."""
    if not x > 0:
        raise DomainError("x must be positive")
    return _out(_integrate("I1", x, s, quad, contour, phi)[0], s)


def _window_ok(x, W, s, quad) -> bool:
    tail = a_tilde_du(x + W, s, quad.with_tolerance(quad.tolerance))
    return abs(tail) <= quad.tolerance


def I2_numeric(x, s, quad: QuadratureSpec | None = None, u_window=None, *, method: str = "nested",
               contour: str = "deformed", phi=None) -> ComplexHP:
    """``int_x^{x+W} psi(u) dA/du du``.

    ``method="nested"`` integrates over ``u`` by Gauss-Legendre inside the
    ``w`` integral on ``[x, x + u_window]``; the window must satisfy
    ``|dA/du(x + u_window)| <= tolerance`` (``None`` doubles from 20 until it
    does). ``method="kernel"`` uses the ``u`` integral to infinity in closed
    form and ignores ``u_window``. ``method="outer"`` is the literal nested
    quadrature, Gauss-Legendre in ``u`` over calls to :func:`a_tilde_du`; it is
    slow and meant for cross-checks.
    """
    if not x > 0:
        raise DomainError("x must be positive")
    quad = DEFAULT_QUAD if quad is None else quad
    if method == "kernel":
        return _out(_integrate("I2k", x, s, quad, contour, phi)[0], s)
    if method not in ("nested", "outer"):
        raise ValueError("method must be 'nested', 'kernel' or 'outer'")
    if u_window is None:
        W = 20
        while not _window_ok(x, W, s, quad):
            W *= 2
            if W > _MAX_WINDOW:
                raise WindowError(f"|dA/du| did not fall below {quad.tolerance} within u <= x + {_MAX_WINDOW}")
    else:
        W = int(math.ceil(u_window))
        if W <= 0:
            raise ValueError("u_window must be positive")
        if not _window_ok(x, W, s, quad):
            raise WindowError(f"u_window = {u_window} too small: |dA/du(x + W)| exceeds the tolerance")
    if method == "outer":
        return _out(_outer_I2(x, s, quad, W), s)
    return _out(_integrate("I2", x, s, quad, contour, phi, window=W, tol_scale=0.5)[0], s)


def _outer_I2(x, s, quad, W, degree: int = 16):
    sp = as_sparam(s)
    inner = quad.with_tolerance(quad.tolerance / (4 * W))
    with mp.workprec(working_precision(sp.precision)):
        x = mp.mpf(x)
        f = x - mp.floor(x)
        edges = [x] + [mp.floor(x) + k for k in range(1, W + 1)] + ([x + W] if f > 0 else [])
        nodes = gauss_legendre_unit(degree, mp.mp.prec)
        total = mp.mpc(0)
        for a, b in zip(edges[:-1], edges[1:]):
            if b <= a:
                continue
            for v, wt in nodes:
                uu = a + (b - a) * v
                total += (b - a) * wt * psi(uu) * a_tilde_du(uu, sp, inner).to_mpc()
        return total


def em_identity_residual(x, s, quad: QuadratureSpec | None = None, *, i2_method: str = "nested") -> mp.mpf:
    """``|zeta(s) - sum_{n <= x} A(n, s) - (I1 + I2 + psi(x) A(x, s))|``.

    The boundary term is ``psi(x) A(x, s)``; it reduces to ``-A(x, s)/2`` at
    integer ``x`` (where the partial sum includes ``n = x``) and vanishes at
    half-integers.
    """
    from .hasse_sondow import partial_sum
    from .special import zeta_reference

    quad = DEFAULT_QUAD if quad is None else quad
    sp = as_sparam(s)
    tol = quad.tolerance
    z = zeta_reference(sp, target_error=tol / 10).to_mpc()
    with mp.workprec(working_precision(sp.precision)):
        lhs = z - partial_sum(x, sp).to_mpc()
        i1 = I1_numeric(x, sp, quad).to_mpc()
        i2 = I2_numeric(x, sp, quad, method=i2_method).to_mpc()
        xm = mp.mpf(x)
        boundary = psi(xm) * a_tilde(x, sp, quad).to_mpc() if psi(xm) != 0 else 0
        return abs(lhs - (i1 + i2 + boundary))


# --------------------------------------------------------------------------
# Residues of the I1 integrand at w = (2k-1) pi i


def residue_term(k: int, s, precision: int | None = None) -> ComplexHP:
    """``2 pi i`` times the residue of the I1 integrand at ``w = (2k-1) pi i``, with ``P(s)``.

    Uses principal-branch ``w^(s-1)``, i.e. ``((2k-1) pi i)^(s-1) =
    ((2k-1) pi)^(s-1) e^{i pi (s-1)/2}``, which makes the term the size of
    ``chi(s)`` for ``t > 0``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    sp = as_sparam(s, precision)
    with mp.workprec(working_precision(sp.precision)):
        sv = sp.s
        m = 2 * k - 1
        num = -4 * mp.power(m, sv - 1) * mp.power(mp.pi, sv) * mp.expjpi(sv / 2)
        val = num * _prefactor(sv)
        return ComplexHP.from_value(val, sp.precision)


def residue_chi_form(k: int, s, precision: int | None = None) -> ComplexHP:
    """``chi(s) / (1 - 2^(s-1)) * (2k-1)^(s-1)``, the leading form of :func:`residue_term`."""
    sp = as_sparam(s, precision)
    with mp.workprec(working_precision(sp.precision)):
        sv = sp.s
        val = chi_mpc(sv) / (1 - mp.power(2, sv - 1)) * mp.power(2 * k - 1, sv - 1)
        return ComplexHP.from_value(val, sp.precision)


__all__ = [
    "DEFAULT_QUAD", "SawtoothPsi", "psi", "a_tilde", "a_tilde_du", "I1_numeric", "I2_numeric",
    "em_identity_residual", "residue_term", "residue_chi_form", "QuadratureError",
]
