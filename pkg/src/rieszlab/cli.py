"""Command line entry point: ``rieszlab verify | list | report``.

Settings are merged as defaults < ``--config`` JSON file < ``RIESZLAB_*``
environment variables < command line flags.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

from . import reports, suites

log = logging.getLogger("rieszlab")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _floats(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _abc(text) -> tuple:
    vals = _floats(text)
    if len(vals) != 3:
        raise ValueError(f"--abc needs three numbers, got {text!r}")
    return vals


def _group(text):
    return None if text in (None, "", "all") else suites.lm.get_model(text).name


# key -> parser for values coming from env strings or JSON
KEYS = {
    "group": _group,
    "suite": str,
    "tol": float,
    "jmax": float,
    "spectrum_jmax": float,
    "dmax": int,
    "lambdas": _floats,
    "N": int,
    "pad": int,
    "norm_J": float,
    "grid_n_r": int,
    "restarts": int,
    "p": _floats,
    "abc": _abc,
    "paths": int,
    "seed": int,
    "out": str,
    "format": str,
}
ENV_PREFIX = "RIESZLAB_"
ENV_ALIASES = {"LAMBDA": "lambdas"}


def _flatten(d: dict) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out.update(_flatten(v))
        else:
            out[k] = v
    return out


def load_config_file(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    data = _flatten(data)
    if "lambda" in data:
        data["lambdas"] = data.pop("lambda")
    unknown = set(data) - set(KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return {k: KEYS[k](v) for k, v in data.items()}


def env_config(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    out = {}
    lower = {k.lower(): k for k in KEYS}
    for name, value in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX):]
        key = ENV_ALIASES.get(key, lower.get(key.lower()))
        if key is not None:
            out[key] = KEYS[key](value)
    return out


def _arg(fn):
    """Wrap a converter so argparse reports its message verbatim."""
    def conv(text):
        try:
            return fn(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return conv


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rieszlab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run check suites and write a report")
    verify.add_argument("--config", help="JSON settings file")
    verify.add_argument("--group", type=_arg(_group), help="h, su2 or sl2 (default: all groups)")
    verify.add_argument("--suite", choices=suites.SUITES + ("all",))
    verify.add_argument("--tol", type=float, help="override every identity tolerance")
    verify.add_argument("--jmax", type=float, help="largest SU(2) spin in the identity checks")
    verify.add_argument("--dmax", type=int, help="largest SL(2) block dimension")
    verify.add_argument("--lambda", dest="lambdas", type=_arg(_floats),
                        help="comma-separated fiber parameters, e.g. --lambda=-1,0.5")
    verify.add_argument("--paths", type=int, help="Monte Carlo paths per configuration")
    verify.add_argument("--seed", type=int)
    verify.add_argument("--p", type=_arg(_floats), help="comma-separated exponents for the norm suite")
    verify.add_argument("--abc", type=_arg(_abc), help="coefficients a,b,c for the norm suite")
    verify.add_argument("--out", help="report path")
    verify.add_argument("--format", choices=("json", "csv"))

    sub.add_parser("list", help="list suites and the results they exercise")

    rep = sub.add_parser("report", help="summarize or convert a saved JSON report")
    rep.add_argument("path")
    rep.add_argument("--format", choices=("text", "json", "csv"), default="text")
    rep.add_argument("--out")
    rep.add_argument("--failed", action="store_true", help="show only failing records")
    return parser


def resolve_config(args: argparse.Namespace, environ=None) -> suites.SuiteConfig:
    merged = {}
    if getattr(args, "config", None):
        merged.update(load_config_file(args.config))
    merged.update(env_config(environ))
    merged.update({k: v for k, v in vars(args).items() if k in KEYS and v is not None})
    return suites.SuiteConfig(**merged)


def list_suites() -> str:
    lines = []
    for name in suites.SUITES:
        lines.append(name)
        lines.extend(f"  - {a}" for a in suites.ANCHORS[name])
    return "\n".join(lines) + "\n"


def _record_line(r: dict) -> str:
    mark = "PASS" if r["passed"] else "FAIL"
    return f"{mark}  {r['suite']:<10} {r['group']:<10} {r['name']}  value={r['value']} bound={r['bound']}"


def run_suite(cfg: suites.SuiteConfig) -> reports.RunReport:
    t0 = time.perf_counter()
    names = suites.SUITES if cfg.suite == "all" else (cfg.suite,)
    checks, timing = [], {}
    for name in names:
        t = time.perf_counter()
        checks.extend(suites.RUNNERS[name](cfg))
        timing[name] = round(time.perf_counter() - t, 3)
        log.info("suite %s done in %.1f s", name, timing[name])
    timing["total"] = round(time.perf_counter() - t0, 3)
    return reports.RunReport.from_checks(cfg.to_dict(), checks, timing)


def _verify(args) -> int:
    try:
        cfg = resolve_config(args)
    except (ValueError, OSError) as exc:
        print(f"rieszlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = run_suite(cfg)
    for r in report.records:
        print(_record_line(r))
    s = report.summary
    print(f"{s['passed']}/{s['total']} checks passed in {report.timing['total']:.1f} s")
    if cfg.out:
        reports.emit_report(report, cfg.format, cfg.out)
        print(f"report written to {cfg.out}")
    return EXIT_OK if report.passed else EXIT_FAIL


def _report(args) -> int:
    try:
        with open(args.path, encoding="utf-8") as fh:
            report = reports.from_json(fh.read())
    except (OSError, ValueError, KeyError) as exc:
        print(f"rieszlab: error: cannot read report: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.format == "json":
        text = reports.to_json(report)
    elif args.format == "csv":
        text = reports.to_csv(report)
    else:
        recs = [r for r in report.records if not (args.failed and r["passed"])]
        s = report.summary
        text = "".join(_record_line(r) + "\n" for r in recs)
        text += f"schema {report.schema_version}, rieszlab {report.version}: {s['passed']}/{s['total']} passed\n"
    if args.out:
        reports.atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "list":
        sys.stdout.write(list_suites())
        return EXIT_OK
    if args.command == "report":
        return _report(args)
    return _verify(args)


if __name__ == "__main__":
    sys.exit(main())
