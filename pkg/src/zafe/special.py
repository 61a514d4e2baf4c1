"""Extended-precision complex values, log-gamma, the chi factor and a reference zeta.

Everything here is built on mpmath. The precision model is uniform across the
package: public functions take a ``precision`` in bits (default 128) and do
their internal work at ``precision + GUARD_BITS``. Results come back as
:class:`ComplexHP`, rounded to the caller's precision.

mpmath keeps its working precision in a process-global context, so these
functions are pure but not thread-safe; parallel work should use processes.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number

import mpmath as mp

from .errors import ConvergenceError, PoleError, PrecisionError

DEFAULT_PRECISION = 128
GUARD_BITS = 32
MIN_PRECISION = 53


def working_precision(precision: int) -> int:
    return int(precision) + GUARD_BITS


def _check_precision(precision) -> int:
    p = int(precision)
    if p < MIN_PRECISION:
        raise ValueError(f"precision must be >= {MIN_PRECISION} bits, got {p}")
    return p


def _to_mpc(z) -> mp.mpc:
    """Convert at the *current* mpmath precision."""
    if isinstance(z, ComplexHP):
        return mp.mpc(z.re, z.im)
    if isinstance(z, SParam):
        return mp.mpc(z.sigma, z.t)
    if isinstance(z, str):
        return _parse_complex(z)
    return mp.mpc(z)


def _parse_complex(text: str) -> mp.mpc:
    """Parse ``"a"``, ``"bi"``, ``"a+bi"`` (``i`` or ``j``) with decimal-exact parts."""
    z = text.replace(" ", "").replace("I", "i").replace("J", "j").replace("j", "i")
    if not z:
        raise ValueError("empty complex literal")
    if not z.endswith("i"):
        return mp.mpc(mp.mpf(z))
    body = z[:-1]
    split = 0
    for k in range(len(body) - 1, 0, -1):
        if body[k] in "+-" and body[k - 1] not in "eE":
            split = k
            break
    re_txt, im_txt = body[:split], body[split:]
    if im_txt in ("", "+", "-"):
        im_txt += "1"
    return mp.mpc(mp.mpf(re_txt) if re_txt else 0, mp.mpf(im_txt))


@dataclass(frozen=True)
class ComplexHP:
    """An immutable complex number carrying its precision in bits.

    Binary operations run at the smaller of the two operand precisions;
    plain Python or mpmath numbers adopt the precision of the other operand.
    """

    re: mp.mpf
    im: mp.mpf
    precision: int = DEFAULT_PRECISION

    def __post_init__(self):
        p = _check_precision(self.precision)
        with mp.workprec(p):
            re, im = mp.mpf(self.re), mp.mpf(self.im)
        if not (mp.isfinite(re) and mp.isfinite(im)):
            raise PrecisionError(f"non-finite value ({re}, {im})")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)
        object.__setattr__(self, "precision", p)

    @classmethod
    def from_value(cls, z, precision: int | None = None) -> "ComplexHP":
        if precision is None:
            precision = z.precision if isinstance(z, (ComplexHP, SParam)) else DEFAULT_PRECISION
        with mp.workprec(max(int(precision), MIN_PRECISION) + GUARD_BITS):
            v = _to_mpc(z)
        return cls(v.real, v.imag, precision)

    def to_mpc(self) -> mp.mpc:
        """The stored value, exactly; later arithmetic rounds to the ambient precision."""
        with mp.workprec(self.precision + GUARD_BITS):
            return mp.mpc(self.re, self.im)

    def _coerce(self, other):
        if isinstance(other, ComplexHP):
            return other.to_mpc(), min(self.precision, other.precision)
        if isinstance(other, (Number, mp.mpf, mp.mpc)):
            return other, self.precision
        return None, None

    def _binary(self, other, op):
        v, p = self._coerce(other)
        if p is None:
            return NotImplemented
        with mp.workprec(p):
            r = op(self.to_mpc(), v)
        return ComplexHP(r.real, r.imag, p)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    def __radd__(self, other):
        return self._binary(other, lambda a, b: b + a)

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    def __rmul__(self, other):
        return self._binary(other, lambda a, b: b * a)

    def __truediv__(self, other):
        v, _ = self._coerce(other)
        if v is not None and v == 0:
            raise ZeroDivisionError("ComplexHP division by zero")
        return self._binary(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        if self.re == 0 and self.im == 0:
            raise ZeroDivisionError("ComplexHP division by zero")
        return self._binary(other, lambda a, b: b / a)

    def __neg__(self):
        return ComplexHP(-self.re, -self.im, self.precision)

    def __abs__(self) -> mp.mpf:
        with mp.workprec(self.precision):
            return mp.hypot(self.re, self.im)

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def conjugate(self) -> "ComplexHP":
        return ComplexHP(self.re, -self.im, self.precision)

    def arg(self) -> mp.mpf:
        with mp.workprec(self.precision):
            return mp.atan2(self.im, self.re)

    def __str__(self):
        digits = max(int(self.precision * 0.30103) - 1, 15)
        return mp.nstr(self.to_mpc(), digits)


@dataclass(frozen=True)
class SParam:
    """The complex argument ``s = sigma + i t``.

    Strings are parsed exactly (to the working precision), which matters for
    inputs such as ``"0.05"`` that have no finite binary expansion.
    """

    sigma: mp.mpf
    t: mp.mpf
    precision: int = DEFAULT_PRECISION

    def __post_init__(self):
        p = _check_precision(self.precision)
        with mp.workprec(working_precision(p)):
            sigma, t = mp.mpf(self.sigma), mp.mpf(self.t)
        if not (mp.isfinite(sigma) and mp.isfinite(t)):
            raise ValueError("s must be finite")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "precision", p)

    @classmethod
    def from_complex(cls, z, precision: int = DEFAULT_PRECISION) -> "SParam":
        with mp.workprec(working_precision(precision)):
            v = _to_mpc(z)
        return cls(v.real, v.imag, precision)

    @property
    def s(self) -> mp.mpc:
        return mp.mpc(self.sigma, self.t)

    def conjugate(self) -> "SParam":
        return SParam(self.sigma, -self.t, self.precision)

    def reflect(self) -> "SParam":
        """Return ``1 - s``."""
        with mp.workprec(working_precision(self.precision)):
            return SParam(1 - self.sigma, -self.t, self.precision)

    def with_precision(self, precision: int) -> "SParam":
        return SParam(self.sigma, self.t, precision)


def as_sparam(s, precision: int | None = None) -> SParam:
    if isinstance(s, SParam):
        return s if precision is None or precision == s.precision else s.with_precision(precision)
    return SParam.from_complex(s, DEFAULT_PRECISION if precision is None else precision)


def _is_nonpositive_integer(z: mp.mpc) -> bool:
    return z.imag == 0 and z.real <= 0 and mp.isint(z.real)


def log_gamma(z, precision: int | None = None) -> ComplexHP:
    """Log-gamma on the standard branch (cut along the negative real axis).

    This branch is the analytic continuation of ``log Gamma`` from the positive
    real axis, so ``log_gamma(z + 1) == log_gamma(z) + log(z)`` holds exactly
    rather than modulo ``2 pi i``. mpmath applies reflection for ``Re z < 1/2``.
    """
    if precision is None:
        precision = z.precision if isinstance(z, (ComplexHP, SParam)) else DEFAULT_PRECISION
    with mp.workprec(working_precision(precision)):
        v = _to_mpc(z)
        if _is_nonpositive_integer(v):
            raise PoleError(f"log_gamma has a pole at {mp.nstr(v.real, 10)}")
        r = mp.loggamma(v)
    return ComplexHP(r.real, r.imag, precision)


def _log_sin(z: mp.mpc) -> mp.mpc:
    # Factor out the dominant exponential so nothing overflows for large |Im z|.
    if z.imag >= 0:
        return -1j * z + mp.log((mp.exp(2j * z) - 1) / 2j)
    return 1j * z + mp.log((1 - mp.exp(-2j * z)) / 2j)


def _log_cos(z: mp.mpc) -> mp.mpc:
    if z.imag >= 0:
        return -1j * z + mp.log((mp.exp(2j * z) + 1) / 2)
    return 1j * z + mp.log((1 + mp.exp(-2j * z)) / 2)


def chi_mpc(s: mp.mpc) -> mp.mpc:
    """chi(s) at the current mpmath precision (internal helper)."""
    if s.real <= 0.5:
        # 2^s pi^(s-1) sin(pi s/2) Gamma(1-s); Gamma(1-s) has no poles here.
        if s.imag == 0 and mp.isint(s.real) and int(s.real) % 2 == 0:
            return mp.mpc(0)
        log_chi = s * mp.ln2 + (s - 1) * mp.log(mp.pi) + _log_sin(mp.pi * s / 2) + mp.loggamma(1 - s)
    else:
        # 2^(s-1) pi^s / (cos(pi s/2) Gamma(s)); keeps Gamma in the right half-plane.
        if s.imag == 0 and mp.isint(s.real) and int(s.real) % 2 == 1:
            raise PoleError(f"chi has a pole at s = {int(s.real)}")
        log_chi = (s - 1) * mp.ln2 + s * mp.log(mp.pi) - _log_cos(mp.pi * s / 2) - mp.loggamma(s)
    return mp.exp(log_chi)


def chi(s, precision: int | None = None) -> ComplexHP:
    """The functional-equation factor ``chi(s)`` with ``zeta(s) = chi(s) zeta(1-s)``."""
    sp = as_sparam(s, precision)
    with mp.workprec(working_precision(sp.precision)):
        v = chi_mpc(sp.s)
    return ComplexHP(v.real, v.imag, sp.precision)


# Euler-Maclaurin correction order: Bernoulli numbers B_2 .. B_20.
_EM_ORDER = 10


def _em_tail(s: mp.mpc, N: int) -> tuple[mp.mpc, mp.mpf]:
    """Integral, endpoint and Bernoulli terms at cutoff N, plus a remainder estimate."""
    logN = mp.log(N)
    Ns = mp.exp(-s * logN)
    val = N * Ns / (s - 1) + Ns / 2
    poch = s
    npow = Ns / N
    term = 0
    for j in range(1, _EM_ORDER + 1):
        term = mp.bernoulli(2 * j) / mp.factorial(2 * j) * poch * npow
        val += term
        poch *= (s + 2 * j - 1) * (s + 2 * j)
        npow /= N * N
    # Next term's magnitude, scaled per the standard Backlund remainder bound.
    nxt = abs(mp.bernoulli(2 * _EM_ORDER + 2) / mp.factorial(2 * _EM_ORDER + 2) * poch * npow)
    sig = s.real + 2 * _EM_ORDER + 1
    rem = nxt * abs(s + 2 * _EM_ORDER + 1) / sig if sig > 0 else mp.inf
    return val, rem


def zeta_mpc(s: mp.mpc, target_error, max_doublings: int = 16) -> mp.mpc:
    """Euler-Maclaurin zeta at the current precision (internal helper)."""
    if s == 1:
        raise PoleError("zeta has a pole at s = 1")
    target = mp.mpf(target_error)
    N = max(10, int(mp.ceil(abs(s.imag))))
    head = mp.fsum(mp.exp(-s * mp.log(n)) for n in range(2, N)) + 1
    tail, rem = _em_tail(s, N)
    prev = head + tail
    for _ in range(max_doublings):
        head += mp.fsum(mp.exp(-s * mp.log(n)) for n in range(N, 2 * N))
        N *= 2
        tail, rem = _em_tail(s, N)
        cur = head + tail
        if abs(cur - prev) <= target and rem <= target:
            floor = 8 * N * max(1, mp.mpf(N) ** (-s.real)) * mp.mp.eps
            if target < floor:
                raise PrecisionError(
                    f"target_error {mp.nstr(target, 3)} is below the rounding floor "
                    f"{mp.nstr(floor, 3)} at {mp.mp.prec} bits"
                )
            return cur
        prev = cur
    raise ConvergenceError(f"zeta_reference did not reach {mp.nstr(target, 3)} with N = {N}")


def default_target_error(precision: int) -> mp.mpf:
    return mp.mpf(2) ** (-(int(precision) - 24))


def zeta_reference(s, target_error=None, precision: int | None = None) -> ComplexHP:
    """Reference value of zeta(s) by Euler-Maclaurin summation.

    Starts from ``N = max(10, |t|)`` terms with Bernoulli corrections through
    ``B_20`` and doubles ``N`` until successive values agree within
    ``target_error``. Deliberately independent of the Hasse-Sondow machinery so
    it can serve as ground truth for it.
    """
    sp = as_sparam(s, precision)
    if target_error is None:
        target_error = default_target_error(sp.precision)
    with mp.workprec(working_precision(sp.precision)):
        scale = max(1, abs(sp.s) ** max(0, 1 - sp.sigma))
        if mp.mpf(target_error) < scale * mp.mpf(2) ** (-sp.precision):
            raise PrecisionError(
                f"target_error {mp.nstr(mp.mpf(target_error), 3)} is unreachable at {sp.precision} bits"
            )
    with mp.workprec(working_precision(sp.precision)):
        v = zeta_mpc(sp.s, target_error)
    return ComplexHP(v.real, v.imag, sp.precision)
