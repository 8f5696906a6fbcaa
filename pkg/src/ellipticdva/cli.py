"""Command-line driver: ``verify``, ``atlas``, ``tabulate`` and ``limits``.

Exit status: 0 when every check passes, 1 when a check fails, 2 for
configuration errors.  Outputs go to ``--output``, else to
``$ELLIPTICDVA_OUTPUT_DIR/<command>.<ext>`` when that variable is set, else
to stdout.  A ``--config`` file of ``key=value`` lines supplies defaults that
explicit flags override.
"""

from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, replace

import numpy as np

from . import __version__
from . import rmatrix as rm
from . import structfn as sf
from . import suite
from .errors import EllipticError, NotOnSurface, PoleProximity
from .limits import POISSON_TAGS
from .params import ModelParams
from .report import VerificationReport
from .sampling import DEFAULT_SEED
from .surfaces import solve_surface
from .theta import DEFAULT_TRUNCATION

ENV_OUTPUT_DIR = "ELLIPTICDVA_OUTPUT_DIR"
FUNCTIONS = ("Y", "tildeY", "F", "g", "dva")
EXTENSIONS = {"verify": "json", "atlas": "jsonl", "tabulate": "csv", "limits": "json"}
RECORD_COLUMNS = ("name", "anchor", "residual", "threshold", "passed", "samples", "bound", "note")


class ConfigError(Exception):
    """Invalid configuration; reported with exit status 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _complex(text):
    try:
        v = complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    return v.real if v.imag == 0 else v


def _seed(text):
    return int(str(text), 0)


def _common(p):
    p.add_argument("--config", help="key=value file; explicit flags take precedence")
    p.add_argument("--output", "-o", help="output file (default: stdout or $%s)" % ENV_OUTPUT_DIR)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--product-order", type=int, default=DEFAULT_TRUNCATION.product_order)
    p.add_argument("--series-order", type=int, default=DEFAULT_TRUNCATION.series_order)
    p.add_argument("--target-tol", type=float, default=DEFAULT_TRUNCATION.target_tol)


def build_parser():
    parser = _Parser(prog="ellipticdva", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ellipticdva {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="R-matrix identity suite at one parameter point")
    _common(v)
    v.add_argument("--N", type=int, default=2)
    v.add_argument("--q", type=_complex, default=0.4)
    v.add_argument("--p", type=_complex, default=0.09)
    v.add_argument("--s", type=_complex, default=None, help="carrier of -p^(1/2); overrides --p")
    v.add_argument("--c", type=float, default=-2.0)
    v.add_argument("--samples", type=int, default=16)
    v.add_argument("--max-m", type=int, default=4)
    v.add_argument("--format", choices=("json", "csv"), default="json",
                   help="csv writes the check records as a table")

    a = sub.add_parser("atlas", help="abelianity loci with verification, as JSON lines")
    _common(a)
    a.add_argument("--N", type=int, default=2)
    a.add_argument("--q", type=_complex, default=0.7)
    a.add_argument("--mmax", type=int, default=4)
    a.add_argument("--nmax", type=int, default=4)
    a.add_argument("--bound", type=int, default=12, help="search bound for lambda")
    a.add_argument("--samples", type=int, default=32)
    a.add_argument("--delta", type=float, default=0.05, help="shift of c for negative controls")
    a.add_argument("--no-controls", action="store_true")
    a.add_argument("--localized", action="store_true", help="localized-center loci instead")
    a.add_argument("--m", type=int, action="append", help="odd m for --localized (repeatable)")
    a.add_argument("--report", help="also write the JSON verification report here")

    t = sub.add_parser("tabulate", help="tabulate a structure function as CSV")
    _common(t)
    t.add_argument("--fn", required=True, choices=FUNCTIONS)
    t.add_argument("--N", type=int, default=2)
    t.add_argument("--q", type=_complex, default=0.4)
    t.add_argument("--p", type=_complex, default=None)
    t.add_argument("--s", type=_complex, default=None)
    t.add_argument("--c", type=float, default=-2.7)
    t.add_argument("--m", type=int, default=None)
    t.add_argument("--n", type=int, default=None)
    t.add_argument("--k", type=int, default=1)
    t.add_argument("--starred", action="store_true")
    t.add_argument("--form", choices=("product", "series"), default="product")
    t.add_argument("--grid", type=int, default=64, help="number of points on the circle |x| = radius")
    t.add_argument("--radius", type=float, default=None)

    lm = sub.add_parser("limits", help="scaling and Poisson limit checks")
    _common(lm)
    lm.add_argument("--case", choices=POISSON_TAGS, default=None)
    lm.add_argument("--m", type=int, default=None)
    lm.add_argument("--q", type=_complex, default=0.6)
    lm.add_argument("--points", type=int, default=8)
    lm.add_argument("--scaling", choices=("auto", "yes", "no"), default="auto",
                    help="include scaling checks (auto: only without --case)")
    lm.add_argument("--format", choices=("json", "csv"), default="json",
                    help="csv writes x, closed form, oracle and mismatch per Poisson sample")
    return parser


def read_config(path):
    out = {}
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}")
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.config:
        return args
    cfg = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    for key in cfg:
        if key not in actions or key in ("config", "help"):
            raise ConfigError(f"unknown config key {key!r} for {args.command}")
    # config values become defaults; anything on the command line still wins
    defaults = {}
    for key, text in cfg.items():
        act = actions[key]
        if act.const is True or act.const is False:
            defaults[key] = text.lower() in ("1", "true", "yes", "on")
        elif act.type is not None:
            try:
                val = act.type(text)
            except (argparse.ArgumentTypeError, ValueError):
                raise ConfigError(f"bad value for {key}: {text!r}")
            defaults[key] = [val] if isinstance(act, argparse._AppendAction) else val
        else:
            defaults[key] = text
        if act.choices is not None and defaults[key] not in act.choices:
            raise ConfigError(f"bad value for {key}: {text!r}")
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def truncation(args):
    try:
        return replace(DEFAULT_TRUNCATION, product_order=args.product_order,
                       series_order=args.series_order, target_tol=args.target_tol)
    except ValueError as exc:
        raise ConfigError(str(exc))


def _jsonable(v):
    if isinstance(v, complex):
        return v.real if v.imag == 0 else repr(v)
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def resolved_config(args):
    d = {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in ("config", "output", "report")}
    d["truncation"] = asdict(truncation(args))
    return d


def _params(args):
    """ModelParams from (N, q, c) and either s or p."""
    try:
        if args.s is not None:
            return ModelParams(args.N, args.q, args.c, args.s)
        return ModelParams.from_p(args.N, args.q, args.c, args.p)
    except (EllipticError, ValueError) as exc:
        raise ConfigError(str(exc))


def _sink(args):
    if args.output:
        return args.output
    d = os.environ.get(ENV_OUTPUT_DIR)
    if d:
        ext = getattr(args, "format", None) or EXTENSIONS[args.command]
        return os.path.join(d, f"{args.command}.{ext}")
    return None


def _csv_header(buf, meta):
    for key in sorted(meta):
        buf.write(f"# {key}: {meta[key]}\n")


def records_csv(report):
    buf = io.StringIO()
    _csv_header(buf, {"tool": "ellipticdva", "version": report.version, "schema": 1,
                      "command": report.command, "verdict": "PASS" if report.passed else "FAIL",
                      "truncation": json.dumps(report.config.get("truncation"), sort_keys=True)})
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_COLUMNS)
    for r in report.sorted_records():
        d = r.to_dict()
        w.writerow([_fmt(d[c]) if isinstance(d[c], float) else d[c] for c in RECORD_COLUMNS])
    return buf.getvalue()


def _emit(args, text):
    path = _sink(args)
    if path is None:
        sys.stdout.write(text)
        return
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _summary(report):
    bad = [r.name for r in report.sorted_records() if not r.passed]
    n = len(report.records)
    msg = f"{'PASS' if report.passed else 'FAIL'}: {n - len(bad)}/{n} checks passed"
    if bad:
        msg += "; failed: " + ", ".join(bad[:8]) + (" ..." if len(bad) > 8 else "")
    print(msg, file=sys.stderr)


# --- commands ----------------------------------------------------------------------

def cmd_verify(args):
    if args.N < 2:
        raise ConfigError("N must be an integer >= 2")
    if args.samples < 1:
        raise ConfigError("samples must be positive")
    if abs(args.q) >= 1 or args.q == 0:
        raise ConfigError(f"q outside unit disk (|q| = {abs(args.q):.6g})")
    params = _params(args)
    try:
        params.require_nomes()
        rm.regularity_residual(params, truncation(args))
    except PoleProximity as exc:
        raise ConfigError(f"degenerate parameters, R(z) is singular at z = 1: {exc}")
    except EllipticError as exc:
        raise ConfigError(str(exc))
    records = suite.rmatrix_suite(params, args.samples, args.seed, truncation(args), args.max_m)
    report = VerificationReport("verify", resolved_config(args), records)
    _emit(args, records_csv(report) if args.format == "csv" else report.to_json())
    return report


def _check_q(q):
    if q == 0 or abs(q) >= 1:
        raise ConfigError(f"q outside unit disk (|q| = {abs(q):.6g})")


def cmd_atlas(args):
    _check_q(args.q)
    if args.N < 2:
        raise ConfigError("N must be an integer >= 2")
    trunc = truncation(args)
    if args.localized:
        ms = args.m or [3]
        for m in ms:
            if m % 2 == 0 or abs(m) == 1:
                raise ConfigError(f"--m must be odd with |m| > 1, got {m}")
        records, lines = suite.localized_run(tuple(ms), args.N, args.q, args.samples, args.seed, trunc)
    else:
        if args.mmax < 0 or args.nmax < 0:
            raise ConfigError("mmax and nmax must be non-negative")
        records, lines = suite.atlas_run(args.N, args.mmax, args.nmax, args.q, args.samples, args.seed,
                                         trunc, args.bound, args.delta, not args.no_controls)
    _emit(args, "".join(json.dumps(_clean_line(l), sort_keys=True) + "\n" for l in lines))
    report = VerificationReport("atlas", resolved_config(args), records)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
    return report


def _clean_line(line):
    return {k: _jsonable(v) for k, v in line.items()}


def _surface_params(args, m, n):
    if args.p is not None or args.s is not None:
        P = _params(args)
    else:
        _check_q(args.q)
        try:
            root = solve_surface(sf.SurfaceSpec(m, n), args.q, args.c, args.N).roots[0]
        except (EllipticError, IndexError) as exc:
            raise ConfigError(f"cannot place a point on S_({m},{n}): {exc}")
        P = ModelParams(args.N, args.q, args.c, root)
    try:
        sf.SurfaceSpec(m, n).require(P)
    except NotOnSurface:
        raise ConfigError(f"not on surface S_({m},{n})")
    return P


def tabulate_function(args):
    """(callable x -> value, params, default radius, label)."""
    trunc = truncation(args)
    fn = args.fn
    if fn == "Y":
        if args.m is None or args.n is None:
            raise ConfigError("--fn Y needs --m and --n")
        if args.p is None and args.s is None:
            args.p = 0.09
        P = _params(args)
        spec = sf.SurfaceSpec(args.m, args.n)
        if not spec.holds(P):
            raise ConfigError(f"not on surface S_({args.m},{args.n}): residual {spec.residual(P):.3g}")
        return (lambda x: sf.calY(spec, x, P, trunc)), P, 1.0, f"Y_({args.m},{args.n})"
    if fn in ("tildeY", "dva"):
        if args.N != 2:
            raise ConfigError(f"--fn {fn} is defined for N = 2")
        if args.starred:
            k = args.n if args.n is not None else 2
            P = _surface_params(args, -1, k)
            if fn == "tildeY":
                return (lambda x: sf.tildeY(k, x, True, P, trunc)), P, 1.0, f"tildeY*_(-1,{k})"
            return (lambda x: sf.dva_ratio(1 / x, P, trunc, starred=True)), P, 1.0, "dva*(1/x)"
        k = args.m if args.m is not None else 2
        P = _surface_params(args, k, -1)
        if fn == "tildeY":
            return (lambda x: sf.tildeY(k, x, False, P, trunc)), P, 1.0, f"tildeY_({k},-1)"
        return (lambda x: sf.dva_ratio(x, P, trunc)), P, 1.0, "dva"
    if args.p is None and args.s is None:
        args.p = 0.09
    P = _params(args)
    if fn == "F":
        m = args.m if args.m is not None else 1
        return (lambda x: sf.calF(m, x, args.starred, P, trunc)), P, 1.0, f"F{'*' if args.starred else ''}_{m}"
    if args.k < 1:
        raise ConfigError("--k must be a positive integer")
    pk = abs(P.p_star if args.starred else P.p) ** args.k
    radius = 0.5 * pk if args.form == "series" else 0.5
    return ((lambda z: sf.g_k(args.k, z, args.starred, P, trunc, args.form)), P, radius,
            f"g{'*' if args.starred else ''}^({args.k})")


def removable_value(f, x, radius=1e-3, points=16):
    """Value at a removable singularity via the mean over a small circle.

    Returns None when the samples are not bounded and consistent (a true pole).
    """
    try:
        vals = np.array([complex(f(x + radius * cmath.exp(2j * math.pi * (j + 0.5) / points)))
                         for j in range(points)])
    except (EllipticError, ZeroDivisionError, OverflowError):
        return None
    mean = complex(vals.mean())
    if not np.all(np.isfinite(vals)) or np.max(np.abs(vals - mean)) > 1e-2 * max(1.0, abs(mean)):
        return None
    return mean


def _fmt(v):
    return "nan" if not math.isfinite(v) else f"{v:.17g}"


def cmd_tabulate(args):
    if args.grid < 1:
        raise ConfigError("--grid must be positive")
    f, P, radius, label = tabulate_function(args)
    if args.radius is not None:
        if not args.radius > 0:
            raise ConfigError("--radius must be positive")
        radius = args.radius
    trunc = truncation(args)
    theta = -math.pi + 2 * math.pi * np.arange(args.grid) / args.grid
    buf = io.StringIO()
    meta = {
        "tool": "ellipticdva", "version": __version__, "schema": 1, "function": label,
        "N": P.N, "q": _jsonable(P.q), "c": _jsonable(P.c), "s": _jsonable(P.s),
        "product_order": trunc.product_order, "series_order": trunc.series_order,
        "target_tol": trunc.target_tol, "radius": radius, "grid": args.grid,
    }
    _csv_header(buf, meta)
    buf.write("x_re,x_im,value_re,value_im,status\n")
    bad = 0
    for th in theta:
        x = radius * cmath.exp(1j * th) if th != 0 else complex(radius)
        try:
            val, status = complex(f(x)), "ok"
        except (EllipticError, ZeroDivisionError, OverflowError) as exc:
            val, status = removable_value(f, x), "limit"
            if val is None:
                val, status = complex(math.nan, math.nan), type(exc).__name__
                bad += 1
        buf.write(f"{_fmt(x.real)},{_fmt(x.imag)},{_fmt(val.real)},{_fmt(val.imag)},{status}\n")
    _emit(args, buf.getvalue())
    if bad:
        print(f"{bad} grid points hit poles (value nan)", file=sys.stderr)
    return None


def cmd_limits(args):
    _check_q(args.q)
    if args.points < 1:
        raise ConfigError("--points must be positive")
    try:
        cases = suite.poisson_panel(args.case, args.m)
    except ValueError as exc:
        raise ConfigError(str(exc))
    if args.m is not None and not cases:
        raise ConfigError(f"no Poisson case with m = {args.m}" + (f" for {args.case}" if args.case else ""))
    scaling = args.scaling == "yes" or (args.scaling == "auto" and args.case is None and args.m is None)
    trunc = truncation(args)
    records = (suite.scaling_records() if scaling else []) + suite.poisson_records(
        cases, args.q, args.points, args.seed, trunc)
    report = VerificationReport("limits", resolved_config(args), records)
    if args.format == "csv":
        _emit(args, poisson_csv(report, suite.poisson_table(cases, args.q, args.points, args.seed, trunc)))
    else:
        _emit(args, report.to_json())
    return report


def poisson_csv(report, rows):
    buf = io.StringIO()
    _csv_header(buf, {"tool": "ellipticdva", "version": report.version, "schema": 1, "command": "limits",
                      "verdict": "PASS" if report.passed else "FAIL",
                      "truncation": json.dumps(report.config.get("truncation"), sort_keys=True)})
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("case", "x_re", "x_im", "f_closed_re", "f_closed_im", "f_oracle_re", "f_oracle_im", "rel_err"))
    for label, x, f, o, err in rows:
        w.writerow([label] + [_fmt(v) for v in (x.real, x.imag, f.real, f.imag, o.real, o.imag, err)])
    return buf.getvalue()


COMMANDS = {"verify": cmd_verify, "atlas": cmd_atlas, "tabulate": cmd_tabulate, "limits": cmd_limits}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse(argv)
        report = COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"ellipticdva: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if report is None:
        return 0
    _summary(report)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
