"""Command-line interface: ``zafe {eval,saddle,scan,verify}``.

Configuration precedence is flag > environment (``ZAFE_PRECISION_BITS``,
``ZAFE_TOLERANCE``, ``ZAFE_JOBS``) > ``key=value`` config file > defaults.

Exit codes: 0 success, 1 computational failure, 2 usage error, 3 degenerate
parameters.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import mpmath as mp

from .errors import BandError, DegenerateError, ZafeError
from .special import DEFAULT_PRECISION, MIN_PRECISION, SParam, working_precision

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE, EXIT_DEGENERATE = 0, 1, 2, 3
DEFAULT_TOLERANCE = 1e-14
ENV_PREFIX = "ZAFE_"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    precision_bits: int = DEFAULT_PRECISION
    tolerance: float = DEFAULT_TOLERANCE
    output_format: str | None = None
    output_path: str | None = None
    jobs: int = 1
    seed_overrides: dict = field(default_factory=dict)

    def validate(self):
        if self.precision_bits < MIN_PRECISION:
            raise UsageError(f"precision must be >= {MIN_PRECISION} bits")
        if not self.tolerance >= 2.0 ** (-self.precision_bits + 16):
            raise UsageError(f"tolerance {self.tolerance} is below 2^(-precision+16) at {self.precision_bits} bits")
        if self.output_format not in (None, "csv", "json"):
            raise UsageError("format must be csv or json")
        if self.jobs < 1:
            raise UsageError("jobs must be >= 1")
        return self


_KEYS = {
    "precision_bits": int,
    "tolerance": float,
    "output_format": str,
    "output_path": str,
    "jobs": int,
}
_ALIASES = {"precision": "precision_bits", "format": "output_format", "output": "output_path"}


def _read_config_file(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (p.strip() for p in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key.startswith("seed."):
            out.setdefault("seed_overrides", {})[key[5:]] = value
            continue
        if key not in _KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def resolve_config(args, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    merged: dict = {}
    if getattr(args, "config", None):
        merged.update(_read_config_file(args.config))
    env_map = {"PRECISION_BITS": "precision_bits", "TOLERANCE": "tolerance", "JOBS": "jobs"}
    for suffix, key in env_map.items():
        if ENV_PREFIX + suffix in environ:
            merged[key] = environ[ENV_PREFIX + suffix]
    flag_map = {"precision": "precision_bits", "tolerance": "tolerance", "format": "output_format",
                "output": "output_path", "jobs": "jobs"}
    for attr, key in flag_map.items():
        v = getattr(args, attr, None)
        if v is not None:
            merged[key] = v
    cfg = RunConfig()
    for key, value in merged.items():
        if key == "seed_overrides":
            cfg.seed_overrides = dict(value)
            continue
        try:
            setattr(cfg, key, _KEYS[key](value))
        except ValueError as exc:
            raise UsageError(f"bad value for {key}: {value!r}") from exc
    return cfg.validate()


# --------------------------------------------------------------------------
# Output helpers


def _emit(text: str, cfg: RunConfig, stdout):
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _csv(rows) -> str:
    return "".join(",".join(str(c) for c in r) + "\n" for r in rows)


def _quad(cfg: RunConfig):
    from .quadrature import QuadratureSpec

    return QuadratureSpec(tolerance=cfg.tolerance)


# --------------------------------------------------------------------------
# Commands


def cmd_eval(args, cfg: RunConfig, stdout) -> int:
    from .afe import AfeParams, afe_eval

    if (args.alpha is None) == (args.x is None):
        raise UsageError("give exactly one of --alpha or --x")
    s = SParam(args.sigma, args.t, cfg.precision_bits)
    alpha = getattr(args, "alpha_text", None) if args.alpha is not None else None
    params = AfeParams.build(s, alpha=alpha, x=args.x, n_chi_terms=args.chi_terms)
    rep = afe_eval(params, quadless=args.quadless)
    d = rep.to_dict()
    if (cfg.output_format or "json") == "json":
        _emit(json.dumps(d, indent=2) + "\n", cfg, stdout)
    else:
        flat = {}
        for k, v in d.items():
            if isinstance(v, dict):
                flat[k + "_re"], flat[k + "_im"] = v["re"], v["im"]
            elif v is None:
                flat[k] = ""
            elif isinstance(v, list):
                flat[k] = ";".join(v)
            else:
                flat[k] = v
        _emit(_csv([list(flat), list(flat.values())]), cfg, stdout)
    return EXIT_OK


def cmd_saddle(args, cfg: RunConfig, stdout) -> int:
    from .afe import _fmt
    from .saddle import saddle_family

    if not args.alpha > 0:
        raise UsageError("--alpha must be positive")
    if args.k_max < 1:
        raise UsageError("--k-max must be >= 1")
    p = cfg.precision_bits
    with mp.workprec(working_precision(p)):
        fam = saddle_family(mp.mpf(args.alpha_text), args.k_max, tol=cfg.tolerance, precision=p)
        pts = [pt for pt in fam.points if pt.index_k <= args.k_max]
        if (cfg.output_format or "csv") == "json":
            d = {
                "alpha": _fmt(fam.alpha, p),
                "points": [
                    {"k": pt.index_k, "x": _fmt(pt.w.re, p), "y": _fmt(pt.w.im, p), "r": _fmt(pt.r, p),
                     "theta": _fmt(pt.theta, p), "residual": _fmt(pt.residual, p)}
                    for pt in pts
                ],
                "selected_k": fam.selected_k,
                "omega": _fmt(fam.omega, p),
                "tie": fam.tie,
                "degenerate": fam.degenerate,
            }
            _emit(json.dumps(d, indent=2) + "\n", cfg, stdout)
        else:
            rows = [("k", "x", "y", "r", "theta", "residual")]
            rows += [(pt.index_k, _fmt(pt.w.re, p), _fmt(pt.w.im, p), _fmt(pt.r, p), _fmt(pt.theta, p),
                      _fmt(pt.residual, p)) for pt in pts]
            rows.append(("selected_k", fam.selected_k, "", "", "", ""))
            rows.append(("omega", _fmt(fam.omega, p), "", "", "", ""))
            _emit(_csv(rows), cfg, stdout)
    if fam.degenerate:
        raise DegenerateError(f"alpha = {args.alpha_text} is a degenerate value; omega vanishes there")
    return EXIT_OK


def cmd_scan(args, cfg: RunConfig, stdout) -> int:
    from .afe import _fmt, error_scan

    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    if args.t_min < 20:
        raise UsageError("--t-min must be >= 20")
    if args.t_max < args.t_min:
        raise UsageError("--t-max must be >= --t-min")
    p = cfg.precision_bits
    with mp.workprec(working_precision(p)):
        alpha = mp.mpf(args.alpha_text)
    res = error_scan(alpha, args.sigma, args.t_min_text, args.t_max_text, args.steps, precision=p,
                     quad=_quad(cfg), jobs=cfg.jobs, with_a_tilde=not args.no_a_tilde)
    if (cfg.output_format or "csv") == "csv":
        _emit(res.to_csv(), cfg, stdout)
    else:
        with mp.workprec(working_precision(p)):
            meta = {
                "alpha": _fmt(res.alpha, p),
                "sigma": _fmt(res.sigma, p),
                "omega": _fmt(res.omega, p) if res.omega is not None else None,
                "fitted_C": _fmt(res.fitted_C, p) if res.fitted_C is not None else None,
                "y_pi_xy": _fmt(1 / (mp.pi * res.alpha), p),
                "y_2pi_xy": _fmt(1 / (2 * mp.pi * res.alpha), p),
            }
        rows = [dict(zip(res.CSV_HEADER, line.split(","))) for line in res.to_csv().splitlines()[1:]]
        _emit(json.dumps({"meta": meta, "rows": rows}, indent=2) + "\n", cfg, stdout)
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig, stdout) -> int:
    from .verify import SUITES

    checks = SUITES[args.suite](cfg)
    failed = None
    for name, measured, limit in checks:
        ok = bool(measured <= limit)
        stdout.write(f"{'PASS' if ok else 'FAIL'} {name} measured={mp.nstr(measured, 6)} limit={mp.nstr(limit, 6)}\n")
        if not ok and failed is None:
            failed = name
    if failed is not None:
        sys.stderr.write(f"verify {args.suite}: first failing check: {failed}\n")
        return EXIT_COMPUTE
    return EXIT_OK


# --------------------------------------------------------------------------


def _text_float(value: str):
    """Keep the literal text (for exact decimal parsing) and validate it is a number."""
    try:
        float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from exc
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, help="precision in bits (default 128)")
    common.add_argument("--tolerance", type=float, help="absolute quadrature/verification tolerance")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--output", help="write output to this file instead of stdout")
    common.add_argument("--config", help="key=value configuration file")
    common.add_argument("--jobs", type=int, help="worker processes for scans")

    parser = argparse.ArgumentParser(prog="zafe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate zeta by the approximate functional equation")
    p.add_argument("--sigma", type=_text_float, required=True)
    p.add_argument("--t", type=_text_float, required=True)
    p.add_argument("--alpha", type=_text_float, help="cut ratio x/t")
    p.add_argument("--x", type=_text_float, help="main-sum cut x")
    p.add_argument("--chi-terms", type=int, help="override the number of chi-sum terms")
    p.add_argument("--quadless", action="store_true", help="skip the reference zeta")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("saddle", parents=[common], help="solve e^w - alpha i w - 1 = 0")
    p.add_argument("--alpha", type=_text_float, required=True)
    p.add_argument("--k-max", type=int, default=4)
    p.set_defaults(func=cmd_saddle)

    p = sub.add_parser("scan", parents=[common], help="error scan at fixed alpha (CSV)")
    p.add_argument("--alpha", type=_text_float, required=True)
    p.add_argument("--sigma", type=_text_float, required=True)
    p.add_argument("--t-min", type=_text_float, required=True)
    p.add_argument("--t-max", type=_text_float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--no-a-tilde", action="store_true", help="omit the log|A(x, s)| column (faster)")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify", parents=[common], help="run a self-check suite")
    p.add_argument("suite", choices=("em-identity", "interpolation", "residues", "chi", "saddle-constants"))
    p.set_defaults(func=cmd_verify)
    return parser


def _normalise(args):
    """Keep numeric flags as text for exact parsing and as floats for validation."""
    for name in ("alpha", "t_min", "t_max"):
        v = getattr(args, name, None)
        if isinstance(v, str):
            setattr(args, name + "_text", v)
            setattr(args, name, float(v))
    return args


def main(argv=None, stdout=None, environ=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    args = _normalise(args)
    try:
        cfg = resolve_config(args, environ)
        return args.func(args, cfg, stdout)
    except UsageError as exc:
        _report("E_USAGE", exc)
        return EXIT_USAGE
    except (DegenerateError, BandError) as exc:
        _report("E_DEGENERATE", exc)
        return EXIT_DEGENERATE
    except ZafeError as exc:
        _report(exc.code, exc)
        return EXIT_COMPUTE
    except ValueError as exc:
        _report("E_USAGE", exc)
        return EXIT_USAGE


def _report(code: str, exc: Exception):
    sys.stderr.write(json.dumps({"error": code, "message": str(exc)}) + "\n")


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
