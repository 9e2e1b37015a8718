"""Command line entry point: ``normpow {poly,eval,constants,holder,verify}``.

Reports go to stdout, diagnostics to stderr.  Exit codes: 0 success,
1 a verification found violations, 2 usage or domain error.  Defaults can
be overridden through ``NORMPOW_PMAX``, ``NORMPOW_NU_STEP``,
``NORMPOW_GRID``, ``NORMPOW_SAMPLES`` and ``NORMPOW_SEED``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import constants as K
from . import propcheck
from .errors import NormpowError
from .normcalc import Metric, deriv_diag, fd_oracle, make_metric, tau
from .polyfamily import generate_family
from .report import _jsonable

POLY_PMAX = 20
FIELDS = ("p", "nu", "C", "H_bound", "H_est", "H_sym", "A", "A_tilde", "lipschitz")


class UsageError(Exception):
    pass


def _env(name, default, cast):
    raw = os.environ.get(f"NORMPOW_{name}")
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError:
        raise UsageError(f"NORMPOW_{name}={raw!r} is not a valid {cast.__name__}") from None


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _write_csv(rows, header, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])


def _dump_json(obj, out):
    out.write(json.dumps(_jsonable(obj), sort_keys=False) + "\n")


def parse_vector(text):
    """A vector given as a JSON array or as comma/space separated numbers."""
    text = text.strip()
    try:
        value = json.loads(text) if text.startswith("[") else \
            [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"cannot parse vector {text!r}") from None
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise UsageError(f"expected a non-empty 1-D vector, got {text!r}")
    return arr


def load_metric(path):
    """Read ``{"dim": n, "b": [[...]]}`` JSON, or a CSV file with one matrix row per line."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        b = data["b"]
        if "dim" in data and len(b) != int(data["dim"]):
            raise UsageError(f"metric dim {data['dim']} does not match {len(b)} rows")
    else:
        b = [[float(v) for v in row] for row in csv.reader(io.StringIO(text)) if row]
    return make_metric(b)


# --------------------------------------------------------------------------
# subcommands


def emit_constants_table(p_max: int, nu_step: float, fmt: str = "csv", grid: int = 2001,
                         out=None):
    """One row per ``(p, nu)`` with ``p = 0..p_max`` and ``nu = 0, nu_step, ..., 1``."""
    if not 0 < nu_step <= 1:
        raise UsageError("nu step must lie in (0, 1]")
    out = out or sys.stdout
    n = int(round(1.0 / nu_step))
    nus = [round(i * nu_step, 12) for i in range(n + 1) if i * nu_step <= 1 + 1e-12]
    rows = [K.holder_constants(p, nu, grid=grid).as_dict()
            for nu in nus for p in range(p_max + 1)]
    _emit_rows(rows, fmt, out)
    return rows


def _emit_rows(rows, fmt, out):
    if fmt == "json":
        _dump_json(rows, out)
    elif fmt == "csv":
        _write_csv([[r[f] for f in FIELDS] for r in rows], FIELDS, out)
    else:
        for r in rows:
            out.write("  ".join(f"{f}={_fmt(r[f])}" for f in FIELDS if r[f] is not None) + "\n")


def cmd_poly(args, out):
    p_max = args.pmax if args.pmax is not None else POLY_PMAX
    if p_max < 0:
        raise UsageError("--pmax must be >= 0")
    fam = generate_family(p_max)
    if args.format == "json":
        out.write(json.dumps([g.to_dict() for g in fam], separators=(",", ":")) + "\n")
    elif args.format == "csv":
        rows = [(g.p_index, k, j, v)
                for g in fam for k, c in enumerate(g.tau_coeffs) for j, v in enumerate(c.coeffs)]
        _write_csv(rows, ("p", "tau_power", "q_power", "coeff"), out)
    else:
        for g in fam:
            out.write(g.pretty() + "\n")
    return 0


def cmd_eval(args, out):
    x, h = parse_vector(args.x), parse_vector(args.h)
    metric = load_metric(args.metric) if args.metric else Metric.identity(x.size)
    if x.size != metric.dim or h.size != metric.dim:
        raise UsageError(f"x and h must have dimension {metric.dim}")
    hn = metric.norm(h)
    if hn == 0:
        raise UsageError("h must be nonzero")
    unit = h / hn
    result = {
        "p": args.p, "q": args.q,
        "value": deriv_diag(metric, args.p, args.q, x, h),
        "norm_x": metric.norm(x),
        "tau": tau(metric, x, unit) if metric.norm(x) > 0 else 0.0,
    }
    if args.fd_check:
        fd = fd_oracle(metric, args.p, args.q, x, unit, step=args.step) * hn ** args.p
        result["fd_value"] = fd
        result["rel_error"] = abs(result["value"] - fd) / max(1.0, abs(fd))
    if args.format == "json":
        _dump_json(result, out)
    elif args.format == "csv":
        _write_csv([list(result.values())], list(result), out)
    else:
        for k, v in result.items():
            out.write(f"{k} = {_fmt(v)}\n")
    return 0


def cmd_constants(args, out):
    if args.table:
        p_max = args.pmax if args.pmax is not None else _env("PMAX", 8, int)
        emit_constants_table(p_max, args.nu_grid, args.format, grid=args.grid, out=out)
        return 0
    if args.p is None or args.nu is None:
        raise UsageError("constants needs --p and --nu (or --table)")
    row = K.holder_constants(args.p, args.nu, grid=args.grid).as_dict()
    _emit_rows([row], args.format, out)
    return 0


def _emit_report(report, fmt, out):
    if fmt == "json":
        _dump_json(report.to_dict(), out)
    else:
        lines = report.stats.get("suites", [])
        for line in lines if len(lines) > 1 else ():
            out.write(line + "\n")
        out.write(report.summary() + "\n")
    return 0 if report.passed else 1


def cmd_holder(args, out):
    metric = load_metric(args.metric) if args.metric else Metric.identity(args.dim)
    report = propcheck.sample_tensor_holder(
        metric, args.p, args.nu, args.mode, n_samples=args.samples, seed=args.seed)
    if args.format != "json":
        key = f"[p={args.p},nu={args.nu},{args.mode}]"
        out.write(f"max_ratio = {_fmt(report.stats['max_ratio' + key])}  "
                  f"bound = {_fmt(report.stats['bound' + key])}\n")
    return _emit_report(report, args.format, out)


def cmd_verify(args, out):
    p_max = args.pmax if args.pmax is not None else _env("PMAX", 8, int)
    metric = load_metric(args.metric) if args.metric else None
    report = propcheck.run_verification(
        args.suite, p_max=p_max, seed=args.seed, samples=args.samples, metric=metric,
        negative_control=args.negative_control)
    return _emit_report(report, args.format, out)


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    seed = _env("SEED", 42, int)
    grid = _env("GRID", 2001, int)
    samples = _env("SAMPLES", 10_000, int)
    nu_step = _env("NU_STEP", 0.05, float)

    ap = argparse.ArgumentParser(prog="normpow",
                                 description="Derivatives of powers of a Euclidean norm.")
    sub = ap.add_subparsers(dest="command", required=True)

    def fmt(p, default="pretty"):
        p.add_argument("--format", choices=("pretty", "json", "csv"), default=default)

    sp = sub.add_parser("poly", help="print the polynomial family g_{p,q}")
    sp.add_argument("--pmax", type=int, default=None)
    fmt(sp)
    sp.set_defaults(func=cmd_poly)

    sp = sub.add_parser("eval", help="evaluate D^p f_q(x)[h]^p")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--q", type=float, required=True)
    sp.add_argument("--x", required=True, help="JSON array or comma separated")
    sp.add_argument("--h", required=True)
    sp.add_argument("--metric", help="JSON {\"dim\", \"b\"} or CSV matrix file")
    sp.add_argument("--fd-check", action="store_true")
    sp.add_argument("--step", type=float, default=None)
    fmt(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("constants", help="Hölder constants for one (p, nu) or a table")
    sp.add_argument("--p", type=int)
    sp.add_argument("--nu", type=float)
    sp.add_argument("--table", action="store_true")
    sp.add_argument("--nu-grid", type=float, default=nu_step)
    sp.add_argument("--pmax", type=int, default=None)
    sp.add_argument("--grid", type=int, default=grid)
    fmt(sp)
    sp.set_defaults(func=cmd_constants)

    sp = sub.add_parser("holder", help="sample Hölder ratios of D^p f_{p+nu}")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--nu", type=float, required=True)
    sp.add_argument("--mode", choices=("general", "collinear", "construction"),
                    default="general")
    sp.add_argument("--samples", type=int, default=samples)
    sp.add_argument("--seed", type=int, default=seed)
    sp.add_argument("--dim", type=int, default=3)
    sp.add_argument("--metric")
    fmt(sp)
    sp.set_defaults(func=cmd_holder)

    sp = sub.add_parser("verify", help="run the verification suites")
    sp.add_argument("--suite", choices=propcheck.SUITES + ("all",), default="all")
    sp.add_argument("--pmax", type=int, default=None)
    sp.add_argument("--seed", type=int, default=seed)
    sp.add_argument("--samples", type=int, default=samples)
    sp.add_argument("--metric")
    sp.add_argument("--negative-control", action="store_true",
                    help="drop one hypothesis per suite; violations are expected")
    fmt(sp)
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    out = sys.stdout
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except SystemExit as exc:  # argparse
        return int(exc.code or 0)
    except (UsageError, NormpowError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"normpow: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
