"""Adaptive high-precision quadrature along rays ``w = r e^{i phi}``, ``r in [0, T]``.

The integrals handled here have the form ``int_0^inf F(w) dw`` with ``F``
analytic in the open right half-plane, an algebraic endpoint behaviour at
``w = 0`` and exponential decay at infinity. For large ``Im s`` the factor
``w^{s-1}`` makes the real-axis integrand exponentially larger than the
integral, so the path is rotated to the ray that minimises an estimated cost
(peak magnitude, which sets the working precision, times oscillation count,
which sets the node count). Rotations stay inside ``|phi| < pi/2`` where the
integrands have no singularities, so the value is path independent.

Planning runs in double precision on ``log F``; the actual sums run in mpmath
at a working precision large enough to absorb the cancellation between the
peak of ``|F|`` along the path and the requested absolute tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import mpmath as mp
import numpy as np

from .errors import QuadratureError
from .special import GUARD_BITS

SCHEMES = ("tanh-sinh", "adaptive-composite")
CONTOURS = ("deformed", "real-axis")

# Largest angular offset from the imaginary axis allowed for a rotated ray.
_MIN_AXIS_GAP = 2e-3
# Phase/magnitude variation (in units of log F) allotted to one panel.
_PANEL_VARIATION = 6.0
_MAX_PANEL_LENGTH = 12.0
_MAX_PANEL_RATIO = 16.0
_MAX_BISECTIONS = 10


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls for every ``[0, inf)`` integral in the package.

    ``scheme="tanh-sinh"`` uses the double-exponential rule on every panel;
    ``"adaptive-composite"`` uses it only on the panel touching ``w = 0`` and
    Gauss-Legendre (degree doubling) on the smooth interior panels.

    ``tolerance`` is an absolute error target on the *returned* quantity
    (after any prefactor), ``nodes`` is the budget of integrand evaluations,
    and ``truncation_T`` replaces infinity (``None`` chooses it from the
    integrand envelope).
    """

    truncation_T: float | None = None
    nodes: int = 2_000_000
    tolerance: float = 1e-14
    scheme: str = "adaptive-composite"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.nodes <= 0:
            raise ValueError("nodes must be positive")
        if self.truncation_T is not None and not self.truncation_T > 0:
            raise ValueError("truncation_T must be positive")

    def with_tolerance(self, tolerance: float) -> "QuadratureSpec":
        return replace(self, tolerance=tolerance)


@dataclass
class RayResult:
    value: mp.mpc
    phi: float
    truncation_T: float
    working_precision: int
    evaluations: int
    error_estimate: float
    panels: int
    peak_log: float
    envelope_log_at_T: float


# --------------------------------------------------------------------------
# Node tables on [0, 1]: (distance from left end, distance from right end, weight).
# Keeping both distances avoids cancellation for nodes clustered at an endpoint.


@lru_cache(maxsize=None)
def _tanh_sinh_level(level: int, prec: int):
    """New nodes introduced at ``level`` (all nodes at level 0)."""
    with mp.workprec(prec + 20):
        h = mp.mpf(2) ** (-level)
        tmax = mp.asinh((prec * mp.ln2 + 10) / mp.pi) + 0.5
        kmax = int(mp.ceil(tmax / h))
        out = []
        for k in range(-kmax, kmax + 1):
            if level > 0 and k % 2 == 0:
                continue
            tau = k * h
            v = mp.pi / 2 * mp.sinh(tau)
            left = 1 / (1 + mp.exp(-2 * v))
            right = 1 / (1 + mp.exp(2 * v))
            wt = h * mp.pi / 2 * mp.cosh(tau) / mp.cosh(v) ** 2 / 2
            out.append((left, right, wt))
    return tuple(out)


@lru_cache(maxsize=None)
def _gauss_legendre(n: int, prec: int):
    with mp.workprec(prec + 20):
        xs, _ = np.polynomial.legendre.leggauss(n)
        out = []
        for x0 in xs:
            x = mp.mpf(float(x0))
            for _ in range(100):
                p0, p1 = mp.mpf(1), x
                for k in range(2, n + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = n * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < mp.mp.eps * 4:
                    break
            p0, p1 = mp.mpf(1), x
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = n * (x * p1 - p0) / (x * x - 1)
            wt = 1 / ((1 - x * x) * dp * dp)
            out.append(((1 + x) / 2, (1 - x) / 2, wt))
    return tuple(out)


def gauss_legendre_unit(n: int, prec: int):
    """Gauss-Legendre nodes and weights on [0, 1] (weights sum to 1)."""
    return [(a, w) for a, _, w in _gauss_legendre(n, prec)]


def _panel_sum(f, a, b, table):
    span = b - a
    return span * mp.fsum(wt * f(a + span * left if left < 0.5 else b - span * right) for left, right, wt in table)


def _integrate_panel(f, a, b, tol, scheme, prec, counter, first):
    """Integrate one panel; returns (value, error estimate). Bisects on failure."""
    # The first panel touches w = 0, where the integrand has an algebraic
    # singularity, so it always uses the endpoint-clustering rule.
    if scheme == "tanh-sinh" or first:
        level = 2
        # Levels 0..2 together form the starting estimate.
        s = _panel_sum(f, a, b, _tanh_sinh_level(0, prec))
        counter[0] += len(_tanh_sinh_level(0, prec))
        for m in (1, 2):
            s = s / 2 + _panel_sum(f, a, b, _tanh_sinh_level(m, prec))
            counter[0] += len(_tanh_sinh_level(m, prec))
        s_prev = s
        while level < 7:
            level += 1
            s = s_prev / 2 + _panel_sum(f, a, b, _tanh_sinh_level(level, prec))
            counter[0] += len(_tanh_sinh_level(level, prec))
            err = abs(s - s_prev)
            if err <= tol:
                return s, err
            s_prev = s
    else:
        n = 10
        s_prev = _panel_sum(f, a, b, _gauss_legendre(n, prec))
        counter[0] += n
        while n < 80:
            n *= 2
            s = _panel_sum(f, a, b, _gauss_legendre(n, prec))
            counter[0] += n
            err = abs(s - s_prev)
            if err <= tol:
                return s, err
            s_prev = s
    return None, err


class RayIntegrand:
    """Interface consumed by :func:`integrate_ray`.

    Subclasses provide ``log_np`` (vectorised double-precision ``log F``, any
    branch), ``value`` (``F`` at the current mpmath precision), ``log_bound``
    (an upper bound on ``log|F|`` far along a ray, used to pick the truncation)
    and ``singular_points`` (points to keep the path's step size away from).
    """

    t: float = 0.0

    def log_np(self, w: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def value(self, w: mp.mpc, log_w: mp.mpc) -> mp.mpc:
        raise NotImplementedError

    def log_bound(self, r: np.ndarray, phi: float) -> np.ndarray:
        raise NotImplementedError

    def singular_points(self, r_max: float, phi: float) -> list[complex]:
        return []

    def dlog_np(self, w: np.ndarray) -> np.ndarray:
        eps = 1e-6
        hi, lo = self.log_np(w * (1 + eps)), self.log_np(w * (1 - eps))
        diff = hi - lo
        diff = diff.real + 1j * ((diff.imag + np.pi) % (2 * np.pi) - np.pi)
        return diff / (2 * eps * w)


def _truncation(integrand, phi, r_lo, threshold):
    """Smallest T beyond which the analytic envelope stays below ``threshold``."""
    grid = np.concatenate([np.geomspace(max(r_lo, 1e-6), 10.0, 400), np.geomspace(10.0, 1e7, 2000)[1:]])
    bound = integrand.log_bound(grid, phi)
    above = np.nonzero(bound >= threshold)[0]
    if len(above) == 0:
        return float(grid[0] * 2), float(bound[0])
    last = above[-1]
    if last >= len(grid) - 1:
        raise QuadratureError("integrand envelope does not decay below the tolerance within r <= 1e7")
    return float(grid[last + 1]), float(bound[last + 1])


def _sample(integrand, phi, r_lo, T, n_geo=300, n_lin=2000):
    r = np.unique(np.concatenate([np.geomspace(r_lo, min(T, 2.0), n_geo), np.linspace(min(T, 2.0), T, n_lin)]))
    g = integrand.log_np(r * np.exp(1j * phi))
    return r, g


def _angle_cost(integrand, phi, log_tol, min_bits, r_lo):
    try:
        T, _ = _truncation(integrand, phi, r_lo, log_tol - 8)
    except QuadratureError:
        return math.inf
    T = max(T, 4 * r_lo)
    r, g = _sample(integrand, phi, r_lo, T)
    re = np.where(np.isfinite(g.real), g.real, -np.inf)
    peak = float(np.max(re))
    bits = max(min_bits, (peak - log_tol) / math.log(2) + 24)
    live = re >= log_tol - 10
    dg = np.abs(np.diff(g.real)) + np.abs((np.diff(g.imag) + np.pi) % (2 * np.pi) - np.pi)
    variation = float(np.sum(dg[live[1:] | live[:-1]]))
    return (variation / _PANEL_VARIATION + 1) * (bits / 64) ** 1.6


def choose_angle(integrand, log_tol, min_bits, r_lo=1e-6):
    """Pick the ray angle with the lowest estimated cost."""
    sign = 1.0 if integrand.t >= 0 else -1.0
    top = math.pi / 2 - _MIN_AXIS_GAP
    cands = np.concatenate([np.linspace(0, top, 24), top - np.geomspace(1e-3, 0.2, 8)])
    costs = [_angle_cost(integrand, sign * c, log_tol, min_bits, r_lo) for c in cands]
    best = int(np.argmin(costs))
    c0 = cands[best]
    fine = np.clip(c0 + np.linspace(-0.04, 0.04, 9), 0, top)
    fcosts = [_angle_cost(integrand, sign * c, log_tol, min_bits, r_lo) for c in fine]
    j = int(np.argmin(fcosts))
    if fcosts[j] < costs[best]:
        c0 = fine[j]
    if not math.isfinite(min(costs[best], fcosts[j])):
        raise QuadratureError("no admissible integration ray")
    return float(sign * c0)


def _start_radius(integrand, phi, threshold):
    """Radius below which the integral over [0, r] is negligible."""
    r = np.geomspace(1e-14, 1.0, 300)
    g = integrand.log_np(r * np.exp(1j * phi)).real + np.log(r)
    bad = np.nonzero(~(g < threshold))[0]
    if len(bad) == 0:
        return 1.0
    return float(r[max(bad[0] - 1, 0)])


def _panels(integrand, phi, r0, T, log_tol):
    """Place breakpoints on ``[r0, T]`` by accumulated variation of ``log F``.

    ``|d log F / dw|`` is sampled on a dense grid (geometric near ``r0``,
    uniform further out, refined around close approaches to singular points)
    and integrated; a panel closes when the variation over the live part of
    the path reaches ``_PANEL_VARIATION`` or its length ``_MAX_PANEL_LENGTH``.
    """
    eph = complex(math.cos(phi), math.sin(phi))
    mid = min(T, 2.0)
    parts = [np.geomspace(r0, mid, 400), np.linspace(mid, T, max(200, int((T - mid) / 0.05) + 1))]
    fixed = []
    for p in integrand.singular_points(T, phi):
        rc = p.real * eph.real + p.imag * eph.imag
        dist = abs(p - rc * eph)
        if r0 < rc < T and dist < 1.0:
            fixed.append(rc)
            parts.append(np.linspace(max(r0, rc - 2), min(T, rc + 2), 801))
    r = np.unique(np.concatenate(parts + [np.array(fixed)]))
    w = r * eph
    g = integrand.log_np(w)
    d = np.abs(integrand.dlog_np(w))
    d = np.where(np.isfinite(d), d, 0.0)
    live = np.where(np.isfinite(g.real), g.real, -np.inf) >= log_tol - 10
    seg = 0.5 * (d[1:] + d[:-1]) * np.diff(r) * (live[1:] | live[:-1])
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    peak = float(np.max(np.where(np.isfinite(g.real), g.real, -np.inf)))
    out = [0.0, float(r0)] if r0 > 0 else [0.0]
    fixed = sorted(fixed) + [T]
    fi = 0
    i = 0
    while out[-1] < T:
        start = out[-1]
        v_target = cum[i] + _PANEL_VARIATION
        j = int(np.searchsorted(cum, v_target, side="left"))
        j = min(max(j, i + 1), len(r) - 1)
        end = min(float(r[j]), start + _MAX_PANEL_LENGTH, T)
        if start > 0:
            # w = 0 is singular; keep it well outside each Gauss-Legendre panel's convergence ellipse
            end = min(end, start * _MAX_PANEL_RATIO)
        while fi < len(fixed) and fixed[fi] <= start:
            fi += 1
        if fi < len(fixed) and fixed[fi] < end:
            end = fixed[fi]
        out.append(end)
        i = int(np.searchsorted(r, end, side="left"))
        i = min(i, len(r) - 1)
    return out, peak


def integrate_ray(integrand, log_tol: float, quad: QuadratureSpec, min_bits: int,
                  contour: str = "deformed", phi: float | None = None,
                  head_radius: float | None = None) -> RayResult:
    """Integrate ``F(w) dw`` over ``[0, inf)`` to absolute error ``exp(log_tol)``.

    ``contour="real-axis"`` forces ``phi = 0``; ``"deformed"`` chooses the ray
    automatically unless ``phi`` is given. With ``head_radius`` the segment
    ``[0, head_radius]`` is left to the caller (for instance a series
    expansion) and only ``[head_radius, T]`` is integrated here.
    """
    if contour not in CONTOURS:
        raise ValueError(f"contour must be one of {CONTOURS}")
    if contour == "real-axis":
        phi = 0.0
    elif phi is None:
        # A real integrand (t = 0) needs no rotation.
        phi = 0.0 if integrand.t == 0 else choose_angle(integrand, log_tol, min_bits, head_radius or 1e-6)
    threshold = log_tol - 8
    r0 = _start_radius(integrand, phi, threshold) if head_radius is None else float(head_radius)
    if quad.truncation_T is None:
        T, env = _truncation(integrand, phi, r0, threshold - math.log(1 + 1 / max(math.cos(phi), 1e-3)))
    else:
        T = float(quad.truncation_T)
        env = float(integrand.log_bound(np.array([T]), phi)[0])
    if r0 >= T:
        r0 = T / 2
    breaks, peak = _panels(integrand, phi, r0, T, log_tol)
    if head_radius is not None:
        breaks = breaks[1:]
    bits = int(max(min_bits, math.ceil((peak - log_tol) / math.log(2)) + GUARD_BITS))
    if contour == "real-axis" and bits > max(4 * min_bits, 1024):
        raise QuadratureError(
            f"real-axis quadrature needs {bits} bits to resolve the oscillation; "
            "outside the oscillation budget, use contour='deformed'"
        )
    n_panels = len(breaks) - 1
    counter = [0]
    with mp.workprec(bits):
        tol_p = mp.exp(log_tol) / (2 * n_panels)
        eph = mp.expjpi(mp.mpf(phi) / mp.pi) if phi else mp.mpc(1)
        iphi = mp.mpc(0, phi)

        def f(r):
            if r == 0:
                return mp.mpc(0)
            return integrand.value(r * eph, mp.log(r) + iphi) * eph

        total = mp.mpc(0)
        err_total = mp.mpf(0)
        stack = [(mp.mpf(breaks[i]), mp.mpf(breaks[i + 1]), 0, i == 0 and breaks[0] == 0)
                 for i in range(n_panels)][::-1]
        while stack:
            a, b, depth, first = stack.pop()
            val, err = _integrate_panel(f, a, b, tol_p / 2 ** depth, quad.scheme, bits, counter, first)
            if counter[0] > quad.nodes:
                raise QuadratureError(f"node budget {quad.nodes} exhausted")
            if val is None:
                if depth >= _MAX_BISECTIONS:
                    raise QuadratureError(
                        f"panel [{mp.nstr(a, 6)}, {mp.nstr(b, 6)}] did not converge (error {mp.nstr(err, 3)})"
                    )
                mid = (a + b) / 2
                stack.append((mid, b, depth + 1, False))
                stack.append((a, mid, depth + 1, first))
                continue
            total += val
            err_total += err
    return RayResult(
        value=total,
        phi=phi,
        truncation_T=T,
        working_precision=bits,
        evaluations=counter[0],
        error_estimate=float(err_total),
        panels=n_panels,
        peak_log=float(peak),
        envelope_log_at_T=env,
    )
