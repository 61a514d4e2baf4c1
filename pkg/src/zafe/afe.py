"""Approximate functional equation built on Hasse-Sondow coefficients.

For ``s = sigma + i t`` with ``t > 0`` and a cut ``x = alpha t``::

    zeta(s) ~ sum_{n <= x} A(n, s) + chi(s) / (1 - 2^(s-1)) * sum_{k=1}^{N} (2k-1)^(s-1),

with ``y = t / (pi x) = 1 / (pi alpha)`` and ``N = floor(y + 1/2)``, the
number of poles of the remainder integrand that the steepest-descent path
through the dominant saddle crosses. The error decays like ``exp(-omega(alpha) t)``.

The sign of the second term was fixed by :func:`calibrate_sign` (the plus
form above wins by two orders of magnitude at ``alpha = 1/pi``, ``t = 100``)
and is hard-coded as :data:`SIGN_CONVENTION`.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import mpmath as mp

from .errors import DegenerateError, DomainError, ZafeError
from .hasse_sondow import partial_sum_mpc
from .interpolant import a_tilde
from .quadrature import QuadratureSpec
from .saddle import omega as saddle_omega
from .special import ComplexHP, DEFAULT_PRECISION, SParam, as_sparam, chi_mpc, working_precision, zeta_mpc

SIGN_CONVENTION = "plus"
# exp(max_t (log|error| + omega t)) on the alpha = 1/pi, sigma = 0.05, t in [50, 400] scan, rounded up.
DEFAULT_BOUND_CONSTANT = 0.5
_DEGENERATE_GAP = 1e-6


class InsufficientRowsError(ZafeError, ValueError):
    code = "E_USAGE"


@dataclass(frozen=True)
class AfeParams:
    """Parameters of one evaluation: ``t = pi x y`` and ``alpha = x / t = 1 / (pi y)``."""

    s: SParam
    x: mp.mpf
    y: mp.mpf
    alpha: mp.mpf
    N_chi_terms: int
    flags: tuple = ()

    @classmethod
    def build(cls, s, *, alpha=None, x=None, precision: int | None = None, allow_degenerate: bool = False,
              n_chi_terms: int | None = None) -> "AfeParams":
        if (alpha is None) == (x is None):
            raise ValueError("give exactly one of alpha or x")
        sp = as_sparam(s, precision)
        with mp.workprec(working_precision(sp.precision)):
            t = abs(sp.t)
            if t == 0:
                raise DomainError("t must be nonzero")
            if alpha is not None:
                alpha = mp.mpf(alpha)
                if not alpha > 0:
                    raise DomainError("alpha must be positive")
                x = alpha * t
            else:
                x = mp.mpf(x)
                if not x > 0:
                    raise DomainError("x must be positive")
                alpha = x / t
            y = t / (mp.pi * x)
            band = int(mp.floor(y + mp.mpf(1) / 2))
            flags = []
            if int(mp.floor(y)) != band:
                flags.append("floor_y_differs")
            m = band if band >= 1 else 1
            gap = min(abs(2 * y - (2 * m - 1)), abs(2 * y - (2 * m + 1)))
            if gap <= _DEGENERATE_GAP:
                if not allow_degenerate:
                    raise DegenerateError(f"2y = {mp.nstr(2 * y, 12)} is an odd integer (degenerate alpha)")
                flags.append("degenerate")
            if n_chi_terms is not None:
                band = int(n_chi_terms)
                flags.append("chi_terms_overridden")
            return cls(sp, x, y, alpha, band, tuple(flags))

    @property
    def t(self):
        return self.s.t


@dataclass
class EvalReport:
    main_sum: ComplexHP
    chi_sum_term: ComplexHP
    afe_value: ComplexHP
    reference: ComplexHP | None
    abs_error: mp.mpf | None
    omega_used: mp.mpf | None
    predicted_bound: mp.mpf | None
    sign_convention: str
    params: AfeParams = field(repr=False, default=None)

    def to_dict(self) -> dict:
        def c(v):
            return None if v is None else {"re": _fmt(v.re, v.precision), "im": _fmt(v.im, v.precision)}

        p = self.params
        prec = p.s.precision
        return {
            "sigma": _fmt(p.s.sigma, prec),
            "t": _fmt(p.s.t, prec),
            "x": _fmt(p.x, prec),
            "y": _fmt(p.y, prec),
            "alpha": _fmt(p.alpha, prec),
            "n_chi_terms": p.N_chi_terms,
            "flags": list(p.flags),
            "main_sum": c(self.main_sum),
            "chi_sum_term": c(self.chi_sum_term),
            "afe_value": c(self.afe_value),
            "reference": c(self.reference),
            "abs_error": None if self.abs_error is None else _fmt(self.abs_error, prec),
            "omega_used": None if self.omega_used is None else _fmt(self.omega_used, prec),
            "predicted_bound": None if self.predicted_bound is None else _fmt(self.predicted_bound, prec),
            "sign_convention": self.sign_convention,
        }


def _fmt(v, precision: int = DEFAULT_PRECISION) -> str:
    """Deterministic decimal rendering with as many digits as the precision carries."""
    if v is None:
        return ""
    with mp.workprec(working_precision(precision)):
        v = mp.mpf(v)
        if mp.isnan(v):
            return "nan"
        if mp.isinf(v):
            return "inf" if v > 0 else "-inf"
        return mp.nstr(v, mp.libmp.prec_to_dps(precision), min_fixed=-6, max_fixed=12)


def chi_sum_mpc(s: mp.mpc, n_terms: int, sign: str = SIGN_CONVENTION) -> mp.mpc:
    if n_terms <= 0:
        return mp.mpc(0)
    lead = chi_mpc(s) / (1 - mp.power(2, s - 1))
    if sign == "minus":
        lead = -lead
    return lead * mp.fsum(mp.power(2 * k - 1, s - 1) for k in range(1, n_terms + 1))


def _omega_or_none(alpha, precision):
    try:
        return saddle_omega(alpha, precision=precision)
    except ZafeError:
        return None


def afe_eval(params: AfeParams, quadless: bool = False, *, sign: str = SIGN_CONVENTION,
             bound_constant: float = DEFAULT_BOUND_CONSTANT, target_error=None) -> EvalReport:
    """Evaluate the approximation; unless ``quadless``, compare with the reference zeta."""
    sp = params.s
    conj = sp.t < 0
    base = sp.conjugate() if conj else sp
    prec = sp.precision
    with mp.workprec(working_precision(prec)):
        s = base.s
        main = partial_sum_mpc(params.x, base)
        chi_term = chi_sum_mpc(s, params.N_chi_terms, sign)
        value = main + chi_term
        ref = err = None
        if not quadless:
            tgt = mp.mpf(2) ** (-(prec - 8)) if target_error is None else mp.mpf(target_error)
            ref = zeta_mpc(s, tgt * max(1, abs(chi_mpc(s))))
            err = abs(value - ref)
        om = _omega_or_none(params.alpha, prec)
        bound = None if om is None else bound_constant * mp.exp(-om * abs(base.t))
        if conj:
            main, chi_term, value = mp.conj(main), mp.conj(chi_term), mp.conj(value)
            ref = None if ref is None else mp.conj(ref)
        hp = lambda v: None if v is None else ComplexHP.from_value(v, prec)  # noqa: E731
        return EvalReport(
            main_sum=hp(main),
            chi_sum_term=hp(chi_term),
            afe_value=hp(value),
            reference=hp(ref),
            abs_error=None if err is None else +err,
            omega_used=om,
            predicted_bound=bound,
            sign_convention=sign,
            params=params,
        )


def calibrate_sign(t: float = 100.0, alpha=None, sigma: str = "0.05", precision: int = DEFAULT_PRECISION):
    """Evaluate both signs of the chi term; returns ``(winner, error_plus, error_minus)``."""
    alpha = 1 / mp.pi if alpha is None else alpha
    p = AfeParams.build(SParam(sigma, t, precision), alpha=alpha)
    ep = afe_eval(p, sign="plus").abs_error
    em = afe_eval(p, sign="minus").abs_error
    return ("plus" if ep < em else "minus"), ep, em


# --------------------------------------------------------------------------
# Scans


@dataclass(frozen=True)
class ScanRow:
    t: mp.mpf
    x: mp.mpf
    y: mp.mpf
    abs_error: mp.mpf
    log_abs_error: mp.mpf
    log_a_tilde: mp.mpf
    neg_omega_t: mp.mpf
    bound: mp.mpf
    flags: tuple = ()


@dataclass
class ScanResult:
    alpha: mp.mpf
    sigma: mp.mpf
    omega: mp.mpf | None
    fitted_C: mp.mpf | None
    rows: list
    precision: int = DEFAULT_PRECISION

    CSV_HEADER = ("t", "x", "y", "abs_error", "log_abs_error", "log_a_tilde", "neg_omega_t", "bound", "flags")

    def to_csv(self) -> str:
        lines = [",".join(self.CSV_HEADER)]
        p = self.precision
        for r in self.rows:
            vals = [r.t, r.x, r.y, r.abs_error, r.log_abs_error, r.log_a_tilde, r.neg_omega_t, r.bound]
            lines.append(",".join([_fmt(v, p) for v in vals] + [";".join(r.flags)]))
        return "\n".join(lines) + "\n"


def scan_grid(t_min, t_max, steps: int, precision: int = DEFAULT_PRECISION) -> list:
    with mp.workprec(working_precision(precision)):
        a, b = mp.mpf(t_min), mp.mpf(t_max)
        if steps == 1 or a == b:
            return [a]
        return [a + (b - a) * j / (steps - 1) for j in range(steps)]


def _scan_row(args):
    alpha, sigma, t, precision, quad, with_a_tilde = args
    mp.mp.prec = working_precision(precision)
    s = SParam(sigma, t, precision)
    flags = []
    try:
        p = AfeParams.build(s, alpha=alpha)
    except DegenerateError:
        p = AfeParams.build(s, alpha=alpha, allow_degenerate=True)
    flags.extend(p.flags)
    rep = afe_eval(p)
    with mp.workprec(working_precision(precision)):
        err = rep.abs_error
        log_err = mp.log(err) if err > 0 else mp.ninf
        la = mp.nan
        if with_a_tilde:
            try:
                la = mp.log(abs(a_tilde(p.x, s, quad)))
            except ZafeError as exc:
                flags.append(f"a_tilde_failed:{exc.code}")
        return (t, p.x, p.y, err, log_err, la, tuple(flags))


def error_scan(alpha, sigma, t_min, t_max, steps: int, *, precision: int = DEFAULT_PRECISION,
               quad: QuadratureSpec | None = None, jobs: int = 1, with_a_tilde: bool = True) -> ScanResult:
    """Evaluate the approximation on an even ``t`` grid at fixed ``alpha`` (so ``x = alpha t``).

    Each row carries the true error, ``log|A(x, s)|`` and ``-omega t``. The bound
    column is ``C exp(-omega t)`` with ``C = exp(max(log error + omega t))`` over
    the rows. Degenerate rows are kept and flagged.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    with mp.workprec(working_precision(precision)):
        alpha, t_lo, t_hi = mp.mpf(alpha), mp.mpf(t_min), mp.mpf(t_max)
    if t_lo < 20:
        raise DomainError("t_min must be >= 20")
    if t_hi < t_lo:
        raise ValueError("t_max must be >= t_min")
    ts = scan_grid(t_lo, t_hi, steps, precision)
    tasks = [(alpha, sigma, t, precision, quad, with_a_tilde) for t in ts]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            raw = list(ex.map(_scan_row, tasks))
    else:
        saved = mp.mp.prec
        try:
            raw = [_scan_row(task) for task in tasks]
        finally:
            mp.mp.prec = saved
    om = _omega_or_none(alpha, precision)
    with mp.workprec(working_precision(precision)):
        C = None
        if om is not None:
            finite = [le + om * t for t, _, _, _, le, _, _ in raw if mp.isfinite(le)]
            C = mp.exp(max(finite)) if finite else None
        rows = []
        for t, x, y, err, le, la, flags in raw:
            neg = -om * t if om is not None else mp.nan
            bound = C * mp.exp(-om * t) if C is not None else mp.nan
            rows.append(ScanRow(t, x, y, err, le, la, neg, bound, flags))
        return ScanResult(alpha, mp.mpf(sigma), om, C, rows, precision)


def fit_decay_rate(rows) -> tuple[float, float, float]:
    """Least-squares line through ``(t, log error)``; returns ``(slope, intercept, r_squared)``.

    ``rows`` may be :class:`ScanRow` objects or ``(t, log_error)`` pairs.
    Degenerate or non-finite rows are ignored.
    """
    pts = []
    for r in rows:
        if isinstance(r, ScanRow):
            if "degenerate" in r.flags:
                continue
            t, le = r.t, r.log_abs_error
        else:
            t, le = r
        t, le = float(t), float(le)
        if math.isfinite(t) and math.isfinite(le):
            pts.append((t, le))
    if len(pts) < 5:
        raise InsufficientRowsError(f"need at least 5 usable rows, got {len(pts)}")
    n = len(pts)
    mt = math.fsum(t for t, _ in pts) / n
    ml = math.fsum(v for _, v in pts) / n
    sxx = math.fsum((t - mt) ** 2 for t, _ in pts)
    sxy = math.fsum((t - mt) * (v - ml) for t, v in pts)
    syy = math.fsum((v - ml) ** 2 for _, v in pts)
    if sxx == 0:
        raise InsufficientRowsError("all rows share one t value")
    slope = sxy / sxx
    intercept = ml - slope * mt
    r2 = 1.0 if syy == 0 else (sxy * sxy) / (sxx * syy)
    return slope, intercept, r2


def simple_afe_classical(s, x, precision: int | None = None) -> ComplexHP:
    """``sum_{n <= x} n^(-s) + x^(1-s)/(s-1)``, valid for ``|t| <= pi x``."""
    sp = as_sparam(s, precision)
    with mp.workprec(working_precision(sp.precision)):
        sv, x = sp.s, mp.mpf(x)
        if sv == 1:
            raise DomainError("s = 1 is the pole of zeta")
        if abs(sp.t) > mp.pi * x * (1 + mp.mpf(2) ** (-sp.precision + 4)):
            raise DomainError(f"|t| = {mp.nstr(abs(sp.t), 10)} exceeds pi x = {mp.nstr(mp.pi * x, 10)}")
        v = mp.fsum(mp.power(n, -sv) for n in range(1, int(mp.floor(x)) + 1))
        v += mp.power(x, 1 - sv) / (sv - 1)
        return ComplexHP.from_value(v, sp.precision)
