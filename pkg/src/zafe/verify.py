"""Self-check suites behind ``zafe verify``.

Each suite returns ``(name, measured, limit)`` triples; a check passes when
``measured <= limit``.
"""

from __future__ import annotations

import mpmath as mp

from .special import SParam, chi_mpc, working_precision, zeta_reference

EM_SAMPLES = [("10.5", "2"), ("7.3", "0.5+20i"), ("3.5", "1.5+5i"), ("5.25", "0.8+3i"), ("12.7", "3-4i")]


def _quad(cfg):
    from .quadrature import QuadratureSpec

    return QuadratureSpec(tolerance=cfg.tolerance)


def em_identity(cfg):
    from .interpolant import em_identity_residual

    out = []
    for x, s in EM_SAMPLES:
        sp = SParam.from_complex(s, cfg.precision_bits)
        r = em_identity_residual(mp.mpf(x), sp, _quad(cfg))
        out.append((f"em_identity x={x} s={s}", r, 50 * cfg.tolerance))
    return out


def interpolation(cfg):
    from .hasse_sondow import coeff_series
    from .interpolant import a_tilde

    out = []
    for s in ("0.05", "0.5+5i", "2+20i"):
        sp = SParam.from_complex(s, cfg.precision_bits)
        series = coeff_series(12, sp)
        worst = max(abs(a_tilde(n, sp, _quad(cfg)).to_mpc() - series.coefficients[n].to_mpc()) for n in range(0, 13, 3))
        out.append((f"interpolation s={s} n=0..12", worst, 10 * cfg.tolerance))
    return out


def residues(cfg):
    from .interpolant import residue_chi_form, residue_term

    out = []
    for k in (1, 2):
        sp = SParam("0.05", "50", cfg.precision_bits)
        a, b = residue_term(k, sp).to_mpc(), residue_chi_form(k, sp).to_mpc()
        out.append((f"residue k={k} t=50 (relative)", abs(a - b) / abs(b), mp.mpf("1e-6")))
    return out


def chi(cfg):
    p = cfg.precision_bits
    out = []
    with mp.workprec(working_precision(p)):
        for s in ("0.5+25i", "0.2+3i", "0.9-40i", "0.05+100i"):
            sv = SParam.from_complex(s, p).s
            out.append((f"chi(s)chi(1-s)=1 s={s}", abs(chi_mpc(sv) * chi_mpc(1 - sv) - 1), mp.mpf(2) ** (-p + 8)))
        for s in ("0.3+7i", "0.7+30i"):
            sp = SParam.from_complex(s, p)
            tgt = mp.mpf(2) ** (-p + 24)
            z = zeta_reference(sp, tgt).to_mpc()
            zr = zeta_reference(sp.reflect(), tgt).to_mpc()
            out.append((f"functional equation s={s}", abs(z - chi_mpc(sp.s) * zr), 10 * tgt * max(1, abs(chi_mpc(sp.s)))))
    return out


def saddle_constants(cfg):
    from .errors import DegenerateError
    from .saddle import omega, solve_saddle

    p = cfg.precision_bits
    out = []
    with mp.workprec(working_precision(p)):
        w2 = solve_saddle(1 / mp.pi, 2, precision=p).w.to_mpc()
        out.append(("w_2(1/pi) = 0.68154 + 9.31481i", abs(w2 - mp.mpc("0.68154", "9.31481")), mp.mpf("1e-4")))
        out.append(("omega(1/pi) = 0.017728", abs(omega(1 / mp.pi, precision=p) - mp.mpf("0.017728")), mp.mpf("1e-5")))
        for N in (1, 2, 3):
            a = 2 / ((2 * N - 1) * mp.pi)
            w = solve_saddle(a, N, precision=p).w.to_mpc()
            out.append((f"w_{N} at alpha=2/({2 * N - 1}pi) is {2 * N - 1}pi i", abs(w - mp.mpc(0, (2 * N - 1) * mp.pi)),
                        mp.mpf("1e-10")))
            try:
                omega(a, precision=p)
                raised = 1
            except DegenerateError:
                raised = 0
            out.append((f"omega raises at alpha=2/({2 * N - 1}pi)", raised, 0))
    return out


SUITES = {
    "em-identity": em_identity,
    "interpolation": interpolation,
    "residues": residues,
    "chi": chi,
    "saddle-constants": saddle_constants,
}
