"""Command line: renormalize, fit, verify, bernoulli-eval, list-families.

Exit codes: 0 completed (verdicts such as Drift are results, not failures),
1 bad configuration or unknown family, 2 family evaluation error,
3 verification breach.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any

import jsonschema

from . import __version__, bernoulli, hfun, renorm, verify, zetaref
from .errors import PoleAtSigma, RenormError, UnknownFamily

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_EVAL = 2
EXIT_BREACH = 3

log = logging.getLogger("probrenorm")

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_COMPLEX = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

CONFIG_SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["family"],
    "properties": {
        "family": {
            "oneOf": [
                {"type": "string"},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["name"],
                    "properties": {"name": {"type": "string"}, "params": {"type": "object"}},
                },
            ]
        },
        "s": _COMPLEX,
        "t0": _POS,
        "rho": {"enum": [0, 1]},
        "m_list": {
            "type": "array",
            "items": {"type": "integer", "minimum": 2, "maximum": renorm.M_MAX},
            "minItems": 1,
            "uniqueItems": True,
        },
        "n_eval": {"type": "integer", "minimum": 44},
        "window": {"type": "integer", "minimum": 32},
        "max_terms": {"type": "integer", "minimum": 5},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: _POS for k in ("newton", "term", "const", "fit", "drift", "strong_fit")},
        },
        "fallback_analytic_binomial": {"type": "boolean"},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"path": {"type": "string"}, "format": {"enum": ["csv", "json"]}},
        },
    },
}


class ConfigError(Exception):
    pass


def _fmt(x: float | None) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def _cplx(pair) -> complex:
    return complex(float(pair[0]), float(pair[1]))


def _family_params(params: dict) -> dict:
    # character tables arrive as numbers or [re, im] pairs
    out = dict(params)
    if "chi" in out:
        out["chi"] = [(_cplx(v) if isinstance(v, list) else complex(v)) for v in out["chi"]]
    return out


def load_config(path: Path) -> dict:
    try:
        with path.open("r", encoding="utf-8") as handle:
            cfg = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from exc


def build_source(cfg: dict):
    fam = cfg["family"]
    name, params = (fam, {}) if isinstance(fam, str) else (fam["name"], fam.get("params", {}))
    try:
        return hfun.build_family(name, **_family_params(params))
    except UnknownFamily:
        raise ConfigError(f"unknown family {name!r}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad parameters for family {name!r}: {exc}") from exc


def renorm_config(cfg: dict, fallback: bool) -> renorm.RenormConfig:
    tol = cfg.get("tolerances", {})
    kwargs = {}
    for key, field in (("n_eval", "n_eval"), ("window", "window"), ("max_terms", "max_terms")):
        if key in cfg:
            kwargs[field] = cfg[key]
    for key, field in (("newton", "newton_tol"), ("term", "term_tol"), ("const", "const_tol"),
                       ("fit", "fit_tol"), ("drift", "drift_tol")):
        if key in tol:
            kwargs[field] = tol[key]
    kwargs["fallback_analytic_binomial"] = fallback or cfg.get("fallback_analytic_binomial", False)
    try:
        return renorm.RenormConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# --------------------------------------------------------------------------
# output

REPORT_COLUMNS = ("m", "re_E", "im_E", "verdict", "constancy_deviation", "cross_residual")


def report_metadata(report: renorm.RenormReport) -> dict:
    return {
        "tool": "probrenorm",
        "version": __version__,
        "family": report.family,
        "s": None if report.s is None else [report.s.real, report.s.imag],
        "t0": report.t0,
        "rho": report.rho,
    }


def report_csv(report: renorm.RenormReport) -> str:
    buf = io.StringIO()
    meta = report_metadata(report)
    buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in report.results:
        e = r.expectation
        w.writerow([
            r.m,
            _fmt(None if e is None else e.real),
            _fmt(None if e is None else e.imag),
            r.verdict or "",
            _fmt(r.constancy_deviation) if math.isfinite(r.constancy_deviation) else "",
            _fmt(r.cross_residual),
        ])
    buf.write(fit_footer(report.fit))
    return buf.getvalue()


def fit_footer(fit: renorm.StrongFit | None) -> str:
    if fit is None:
        return "# fit: none (not weakly renormalizable)\n"
    parts = [f"verdict={fit.verdict}"]
    if fit.S is not None:
        parts += [f"S_re={_fmt(fit.S.real)}", f"S_im={_fmt(fit.S.imag)}"]
    if fit.c is not None:
        parts += [f"c_re={_fmt(fit.c.real)}", f"c_im={_fmt(fit.c.imag)}"]
    if fit.residuals:
        parts.append(f"max_residual={_fmt(max(fit.residuals.values()))}")
    if fit.tie_broken:
        parts.append("tie_broken=1")
    return "# fit: " + " ".join(parts) + "\n"


def report_json(report: renorm.RenormReport) -> str:
    payload = {"metadata": report_metadata(report), "report": report.to_dict()}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def checks_csv(rows: list[verify.Check]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("check", "value", "bound", "ok"))
    for r in rows:
        w.writerow((r.name, _fmt(r.value), _fmt(r.bound), int(r.ok)))
    return buf.getvalue()


def checks_json(rows: list[verify.Check]) -> str:
    data = [{**r.as_row(), "value": r.value if math.isfinite(r.value) else None} for r in rows]
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# commands


def cmd_renormalize(args) -> int:
    try:
        cfg = load_config(Path(args.config))
        source = build_source(cfg)
        rcfg = renorm_config(cfg, args.fallback_analytic_binomial)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    rho = args.rho if args.rho is not None else cfg.get("rho", 1)
    s = _cplx(cfg["s"]) if "s" in cfg else None
    if isinstance(source, hfun.HFamily) and s is None:
        log.error("config needs 's' for H-family %s", source.name)
        return EXIT_CONFIG
    m_list = cfg.get("m_list", [2, 3, 4, 5, 6])
    fit_tol = cfg.get("tolerances", {}).get("strong_fit", 1e-8)
    try:
        report = renorm.weak_report(source, s, cfg.get("t0", 1.0), rho, m_list, rcfg, fit_tol)
    except RenormError as exc:
        log.error("evaluation failed: %s: %s", type(exc).__name__, exc)
        return EXIT_EVAL
    out = cfg.get("output", {})
    fmt = args.format or out.get("format", "csv")
    text = report_json(report) if fmt == "json" else report_csv(report)
    _emit(text, args.output or out.get("path"))
    return EXIT_OK


def _read_expectations(path: Path) -> dict[int, complex]:
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        data = json.loads(text)
        report = renorm.RenormReport.from_dict(data.get("report", data))
        return report.expectations()
    rows = csv.DictReader(line for line in text.splitlines() if not line.startswith("#"))
    out = {}
    for row in rows:
        if row.get("re_E"):
            out[int(row["m"])] = complex(float(row["re_E"]), float(row["im_E"]))
    return out


def cmd_fit(args) -> int:
    try:
        E = _read_expectations(Path(args.input))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        log.error("cannot read report %s: %s", args.input, exc)
        return EXIT_CONFIG
    fit = renorm.strong_fit(E, args.tol)
    if args.format == "json":
        text = json.dumps(fit.to_dict(), indent=2, sort_keys=True) + "\n"
    else:
        text = fit_footer(fit)
    _emit(text, args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    rows = verify.SUITES[args.suite]()
    text = checks_json(rows) if args.format == "json" else checks_csv(rows)
    _emit(text, args.output)
    bad = [r for r in rows if not r.ok]
    for r in bad:
        log.error("breach: %s = %s (bound %s)", r.name, _fmt(r.value), _fmt(r.bound))
    return EXIT_BREACH if bad else EXIT_OK


def _parse_param(text: str) -> tuple[str, Any]:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def cmd_bernoulli_eval(args) -> int:
    params = dict(args.param or [])
    try:
        fam = hfun.build_family(args.family, **_family_params(params))
    except UnknownFamily:
        log.error("unknown family %r", args.family)
        return EXIT_CONFIG
    except (TypeError, ValueError) as exc:
        log.error("bad parameters for family %r: %s", args.family, exc)
        return EXIT_CONFIG
    if not isinstance(fam, hfun.HFamily):
        log.error("%s is a raw term sequence, not an H-family", args.family)
        return EXIT_CONFIG
    s = complex(args.s)
    rows: list[tuple[str, str]] = []
    try:
        b = bernoulli.bernoulli_apply(fam, s, args.t)
        rows.append(("B", _cplx_text(b.value)))
        rows.append(("status", b.status.value))
        try:
            d = bernoulli.dirichlet_value(fam, 1 - s, args.t)
            rows.append(("D(1-s,t)", _cplx_text(d.value)))
        except PoleAtSigma:
            rows.append(("D(1-s,t)", "pole"))
        n = bernoulli.DEFAULT_B.base_for(args.t)
        alt = bernoulli.bernoulli_apply(fam, s, args.t, bernoulli.DEFAULT_B.with_base(n + 7))
        rows.append(("pullback_diff_N_vs_N+7", _fmt(abs(alt.value - b.value))))
        if fam.name == "power" and s != 0:
            ref = -s * zetaref.hurwitz_zeta(1 - s, args.t).value
            rows.append(("oracle -s*zeta(1-s,t)", _cplx_text(ref)))
            rows.append(("oracle_diff", _fmt(abs(ref - b.value))))
    except RenormError as exc:
        log.error("evaluation failed: %s: %s", type(exc).__name__, exc)
        return EXIT_EVAL
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{width}}  {v}")
    return EXIT_OK


def _cplx_text(z: complex) -> str:
    z = complex(z)
    return _fmt(z.real) if z.imag == 0 else f"{_fmt(z.real)} {_fmt(z.imag)}j"


def cmd_list_families(args) -> int:
    rows = hfun.describe_families()
    if args.format == "json":
        print(json.dumps(rows, indent=2, sort_keys=True, default=str))
        return EXIT_OK
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("name", "nu", "sigma_star", "growth_exponent", "closed_form", "h_class"))
    for r in rows:
        w.writerow((r["name"], r["nu"], r["sigma_star"], r["growth_exponent"], int(r["closed_form"]), int(r["h_class"])))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="probrenorm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("renormalize", help="run the weak/strong renormalization pipeline")
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--output", default=None)
    p.add_argument("--format", choices=["csv", "json"], default=None)
    p.add_argument("--rho", type=int, choices=[0, 1], default=None)
    p.add_argument("--fallback-analytic-binomial", action="store_true",
                   help="sum exactly alternating class sums via (1-2)^h (exploration only)")
    p.set_defaults(func=cmd_renormalize)

    p = sub.add_parser("fit", help="re-fit S(1 - m^c) from an existing report")
    p.add_argument("input", help="report written by renormalize (csv or json)")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--output", default=None)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("verify", help="run a built-in invariant suite")
    p.add_argument("suite", choices=sorted(verify.SUITES))
    p.add_argument("--output", default=None)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bernoulli-eval", help="evaluate B f(s, t) for one family")
    p.add_argument("--family", required=True)
    p.add_argument("--s", required=True, help="complex, e.g. 2 or 2+1j")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--param", type=_parse_param, action="append", help="family parameter key=value")
    p.set_defaults(func=cmd_bernoulli_eval)

    p = sub.add_parser("list-families", help="dump the family registry")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_list_families)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if getattr(args, "s", None) is not None and args.command == "bernoulli-eval":
        try:
            complex(args.s)
        except ValueError:
            parser.error(f"cannot parse s={args.s!r} as a complex number")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
