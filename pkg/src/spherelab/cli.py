"""Command-line driver: ``spherelab <command> [options]``.

Exit codes: 0 pass, 2 usage or configuration error, 3 verification failure.
Reports are deterministic (sorted keys, no timestamps); timing, cache status
and the list of written files go to a run manifest under the cache directory.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .arithmetic import completed_sum_identity, gauss_bound_check, zero_count
from .averaging import (
    GridFunction, TestFamilySpec, apply_average, maximal_lp_norms, op_norm_estimate,
)
from .errors import DegenerateFit, SpherelabError
from .lattice import enumerate_sphere, load_table, rep_count_table, save_table
from .multipliers import NORMALIZATIONS, decay_fit, decay_grid, decomposition_check
from .seqfact import SEQUENCE_KINDS, WindowConfig, j0_for, lambda_value

log = logging.getLogger("spherelab")

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 2, 3
DECOMPOSITION_TOL = 1e-9
ARITH_TOL = 1e-6
GAUSS_TOL = 1e-9
DEFAULT_DECAY_LAMBDAS = "24,120,720,5040,40320"
SEQUENCES = SEQUENCE_KINDS + ("lacunary2l",)


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    config: dict
    version: str = __version__
    checks: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    started: float = field(default_factory=time.time)

    def check(self, name: str, passed: bool) -> bool:
        if any(c["name"] == name for c in self.checks):
            raise ValueError(f"check {name!r} recorded twice")
        self.checks.append({"name": name, "passed": bool(passed)})
        return bool(passed)

    def as_dict(self) -> dict:
        return {
            "command": self.command, "config": self.config, "version": self.version,
            "checks": self.checks, "artifacts": self.artifacts, "notes": self.notes,
            "started_unix": self.started, "wall_clock_seconds": time.time() - self.started,
        }


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("list must be nonempty")
    return vals


def _p_value(text: str) -> float:
    p = math.inf if str(text).lower() in ("inf", "infinity") else float(text)
    if not p >= 1:
        raise argparse.ArgumentTypeError(f"p must be >= 1, got {text}")
    return p


def _p_list(text: str) -> list[float]:
    return [_p_value(v) for v in str(text).split(",") if v.strip()]


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; blank lines and ``#`` comments ignored."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for num, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{num}: expected key=value, got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def sequence_terms(kind: str, terms: int | None) -> list[int]:
    """Radii of a named sequence at desk scale."""
    if kind == "factorial2l":
        return [lambda_value(l) for l in range(1, (terms or 3) + 1)]
    if kind == "factoriall":
        return [lambda_value(l, "factoriall") for l in range(2, (terms or 7) + 2)]
    if kind == "lacunary2l":
        return [1 << l for l in range(1, (terms or 8) + 1)]
    return _int_list(kind)


def _read_function(path: str | None, n: int) -> GridFunction:
    if path is None:
        return GridFunction.delta(n)
    pts, vals = [], []
    with open(path, encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            if len(row) not in (n + 1, n + 2):
                raise UsageError(f"{path}: expected {n} coordinates and a value, got {row}")
            pts.append([int(v) for v in row[:n]])
            vals.append(complex(float(row[n]), float(row[n + 1]) if len(row) == n + 2 else 0.0))
    if not pts:
        raise UsageError(f"{path}: no points")
    return GridFunction.from_arrays(n, pts, vals)


def _json(obj) -> str:
    def fix(v):
        if isinstance(v, float) and not math.isfinite(v):
            return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
        if isinstance(v, dict):
            return {str(k): fix(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [fix(x) for x in v]
        if isinstance(v, np.generic):
            return fix(v.item())
        return v
    return json.dumps(fix(obj), sort_keys=True, indent=2) + "\n"


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _p_key(p: float) -> str:
    return "inf" if math.isinf(p) else repr(float(p))


# ---------------------------------------------------------------------------
# commands: each returns (text, passed)
# ---------------------------------------------------------------------------

def cmd_count(args, man: RunManifest):
    if args.max < 0:
        raise UsageError("--max must be >= 0")
    cache = Path(args.cache_dir) / f"rep-n{args.n}-max{args.max}.csv"
    if cache.exists():
        table = load_table(cache)
        log.info("cache hit: %s", cache)
        man.notes.append(f"cache hit {cache}")
    else:
        table = rep_count_table(args.n, args.max)
        cache.parent.mkdir(parents=True, exist_ok=True)
        save_table(table, cache)
        man.artifacts.append(str(cache))
        man.notes.append(f"cache miss {cache}")
    ok = man.check("r(0)=1", table[0] == 1)
    if args.format == "json":
        text = _json({"n": table.n, "max_lambda": table.max_lambda,
                      "counts": [int(c) for c in table.counts]})
    else:
        text = cache.read_text(encoding="ascii")
    return text, ok


def cmd_enumerate(args, man):
    pts = enumerate_sphere(args.lam, args.n, budget=args.budget)
    ok = man.check("count matches r(lambda)", pts.count == len(pts.points))
    if args.format == "json":
        return _json({"lambda": args.lam, "n": args.n, "count": pts.count,
                      "points": pts.points.tolist()}), ok
    return _csv([f"x{i + 1}" for i in range(args.n)], pts.points.tolist()), ok


def _function_rows(g: GridFunction):
    return [[*map(int, p), repr(float(v.real)), repr(float(v.imag))]
            for p, v in zip(g.points, g.values)]


def cmd_average(args, man):
    f = _read_function(args.input, args.n)
    g = apply_average(f, args.lam, budget=args.budget)
    ok = man.check("mass preserved", abs(g.total() - f.total()) <= 1e-12 * max(1.0, abs(f.total())))
    if args.format == "json":
        return _json({"lambda": args.lam, "n": args.n, "points": g.points.tolist(),
                      "values": [[float(v.real), float(v.imag)] for v in g.values]}), ok
    return _csv([f"x{i + 1}" for i in range(args.n)] + ["re", "im"], _function_rows(g)), ok


def cmd_maximal(args, man):
    f = _read_function(args.input, args.n)
    lams = args.lams if args.lams else sequence_terms(args.sequence, args.terms)
    s = maximal_lp_norms([f], lams, args.p)[0]
    fnorm = {_p_key(p): float(np.linalg.norm(np.abs(f.values), ord=p)) for p in args.p}
    ok = True
    for p in args.p:
        ceiling = sum(s.per_lambda[lam][p] for lam in sorted(set(lams)))
        ok &= man.check(f"ceiling p={_p_key(p)}", s.maximal[p] <= ceiling * (1 + 1e-12))
    report = {
        "lambdas": sorted(set(lams)),
        "streamed": s.streamed,
        "f_norm": fnorm,
        "maximal_norm": {_p_key(p): v for p, v in s.maximal.items()},
        "average_norms": {str(lam): {_p_key(p): v for p, v in d.items()}
                          for lam, d in s.per_lambda.items()},
    }
    if args.format == "csv":
        rows = [[lam, _p_key(p), v] for lam, d in s.per_lambda.items() for p, v in d.items()]
        rows += [["max", _p_key(p), v] for p, v in s.maximal.items()]
        return _csv(["lambda", "p", "norm"], rows), ok
    return _json(report), ok


def cmd_arith(args, man):
    if args.qmax < 2:
        raise UsageError("--qmax must be >= 2")
    g = gauss_bound_check(args.qmax, args.n, moduli="odd_primes", samples=args.samples,
                          seed=args.seed) if args.qmax >= 3 else None
    ok = True
    if g is not None:
        ok &= man.check("gauss modulus at odd primes",
                        abs(g.max_scaled - 1.0) <= GAUSS_TOL)
    worst = 0.0
    for q in range(1, args.qmax + 1):
        for lam in range(q):
            worst = max(worst, completed_sum_identity(q, lam, args.n))
    ok &= man.check("completed-sum identity", worst <= ARITH_TOL)
    zeros = [zero_count(Q, args.n).as_dict() for Q in (args.Q or [])]
    report = {
        "n": args.n,
        "qmax": args.qmax,
        "gauss_odd_primes": None if g is None else {
            "max_scaled": g.max_scaled, "argmax": g.argmax, "evaluated": g.evaluated},
        "completed_sum_max_residual": worst,
        "zero_counts": zeros,
    }
    for z in zeros:
        log.info("Q=%s normalized zero count %s", z["Q"], z["normalized"])
    return _json(report), ok


def cmd_decompose(args, man):
    rep = decomposition_check(args.l, args.j, args.samples, args.seed, n=args.n, kind=args.kind)
    ok = man.check(f"decomposition l={args.l} j={args.j}", rep.max_residual <= DECOMPOSITION_TOL)
    return _json(rep.as_dict()), ok


def cmd_decay(args, man):
    if len(args.lams) < 3:
        raise UsageError("decay needs at least 3 values of lambda")
    grid = decay_grid(args.grid_size, args.seed, args.n)
    window = WindowConfig(args.window_exponent)
    try:
        rep = decay_fit(args.lams, grid, H=args.H, normalization=args.normalization)
        ok = man.check("fitted decay positive", rep.fitted_delta > 0)
    except DegenerateFit as err:
        rep = err.report
        man.check("fitted decay positive", False)
        man.notes.append(str(err))
        log.error("%s", err)
        ok = False
    out = rep.as_dict()
    out["window_index"] = {str(lam): j0_for(lam, window) for lam in args.lams}
    if args.format == "csv":
        return _csv(["lambda", "residual", "H"],
                    [[lam, repr(r), h] for (lam, r), h in zip(rep.pairs, rep.window_h)]), ok
    return _json(out), ok


def cmd_opnorm(args, man):
    family = TestFamilySpec.parse(args.family)
    lams = sequence_terms(args.sequence, args.terms)
    rep = op_norm_estimate(args.p, lams, family, args.count, args.seed, n=args.n)
    ok = man.check("triangle-inequality ceiling", rep.ceiling_ok)
    if rep.dropped:
        log.warning("radii %s skipped: too large for this family at desk scale", rep.dropped)
    if args.format == "csv":
        return _csv(["item", "ratio"], [[name, repr(r)] for name, r in rep.per_function]), ok
    return _json(rep.as_dict()), ok


COMMANDS = {
    "count": cmd_count, "enumerate": cmd_enumerate, "average": cmd_average,
    "maximal": cmd_maximal, "arith": cmd_arith, "decompose": cmd_decompose,
    "decay": cmd_decay, "opnorm": cmd_opnorm,
}
CSV_COMMANDS = {"count", "enumerate", "average", "maximal", "decay", "opnorm"}
TABLE_COMMANDS = {"count", "enumerate", "average"}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    def d(value):
        return argparse.SUPPRESS if suppress else value

    g = parser.add_argument_group("global options")
    g.add_argument("--n", type=_positive, default=d(5), help="dimension (default 5)")
    g.add_argument("--seed", type=int, default=d(0))
    g.add_argument("--cache-dir", default=d(os.environ.get(
        "SPHERELAB_CACHE", str(Path.home() / ".cache" / "spherelab"))))
    g.add_argument("--out", default=d(None), help="write the report here instead of stdout")
    g.add_argument("--format", choices=("json", "csv"), default=d(None),
                   help="default: csv for count/enumerate/average, json otherwise")
    g.add_argument("--window-exponent", type=_positive, default=d(16),
                   help="c in the windows [2^(2^(c(j-1))), 2^(2^(cj)))")
    g.add_argument("--config", default=d(None),
                   help="key=value file; explicit flags take precedence")
    g.add_argument("-v", "--verbose", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted before or after the command name
    common = _Parser(add_help=False)
    _global_options(common, suppress=True)

    parser = _Parser(prog="spherelab", description=__doc__.splitlines()[0])
    _global_options(parser, suppress=False)
    parser.add_argument("--version", action="version", version=f"spherelab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("count", parents=[common], help="representation-number table")
    p.add_argument("--max", type=int, required=True)

    p = sub.add_parser("enumerate", parents=[common], help="points of one lattice sphere")
    p.add_argument("--lam", type=_nonneg, required=True)
    p.add_argument("--budget", type=_positive, default=10**7)

    p = sub.add_parser("average", parents=[common], help="apply one spherical average")
    p.add_argument("--lam", type=_nonneg, required=True)
    p.add_argument("--input", help="CSV of x1..xn,value[,imag]; default is a unit mass at 0")
    p.add_argument("--budget", type=_positive, default=2 * 10**7)

    p = sub.add_parser("maximal", parents=[common], help="l^p norms of the finite maximal function")
    p.add_argument("--lams", type=_int_list)
    p.add_argument("--sequence", default="factorial2l")
    p.add_argument("--terms", type=_positive)
    p.add_argument("--input")
    p.add_argument("--p", type=_p_list, default=[1.0, 2.0, math.inf])

    p = sub.add_parser("arith", parents=[common], help="Gauss sums, completed sums, zero counts")
    p.add_argument("--qmax", type=int, required=True)
    p.add_argument("--Q", type=_int_list)
    p.add_argument("--samples", type=_positive, default=10)

    p = sub.add_parser("decompose", parents=[common], help="check the multiplier decomposition")
    p.add_argument("--l", type=_positive, required=True)
    p.add_argument("--j", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--samples", type=_positive, default=200)
    p.add_argument("--kind", choices=SEQUENCE_KINDS, default="factorial2l")

    p = sub.add_parser("decay", parents=[common], help="fit the decay of the approximation error")
    p.add_argument("--lams", type=_int_list, default=DEFAULT_DECAY_LAMBDAS)
    p.add_argument("--grid-size", type=_positive, default=500)
    p.add_argument("--H", type=_nonneg, help="truncation level (default floor(log2 sqrt(lambda)))")
    p.add_argument("--normalization", choices=NORMALIZATIONS, default="volume")

    p = sub.add_parser("opnorm", parents=[common], help="empirical maximal-operator norm ratios")
    p.add_argument("--p", type=_p_value, required=True)
    p.add_argument("--sequence", default="factorial2l",
                   help=f"one of {', '.join(SEQUENCES)} or an explicit list like 2,24")
    p.add_argument("--terms", type=_positive)
    p.add_argument("--family", default="random:2:0.002")
    p.add_argument("--count", type=_positive, default=20)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = read_config(known.config)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    dests = {a.dest for a in parser._actions}
    for sp in subparsers.choices.values():
        dests |= {a.dest for a in sp._actions}
    unknown = sorted(set(cfg) - dests)
    if unknown:
        raise UsageError(f"{known.config}: unknown keys {unknown}")
    # a required flag supplied by the config file is no longer required on the command line
    for sp in subparsers.choices.values():
        for a in sp._actions:
            if a.required and a.dest in cfg:
                a.required = False
    top = {a.dest for a in parser._actions}
    parser.set_defaults(**{k: v for k, v in cfg.items() if k in top})
    for sp in subparsers.choices.values():
        own = {a.dest for a in sp._actions} - top
        sp.set_defaults(**{k: v for k, v in cfg.items() if k in own})


def _config_echo(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if isinstance(v, float) and math.isinf(v):
            v = "inf"
        elif isinstance(v, list):
            v = ["inf" if isinstance(x, float) and math.isinf(x) else x for x in v]
        out[k] = v
    return out


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        # string defaults from a config file bypass the type converters for lists
        for name in ("lams", "Q"):
            if isinstance(getattr(args, name, None), str):
                setattr(args, name, _int_list(getattr(args, name)))
        if isinstance(getattr(args, "p", None), str):
            args.p = _p_list(args.p) if args.command == "maximal" else _p_value(args.p)
    except (UsageError, argparse.ArgumentTypeError, OSError) as err:
        print(f"spherelab: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.format is None:
        args.format = "csv" if args.command in TABLE_COMMANDS else "json"
    if args.n < 5:
        log.warning("n=%d: the boundedness theory needs n >= 5; running as an oracle test", args.n)
    if args.format == "csv" and args.command not in CSV_COMMANDS:
        print(f"spherelab: error: --format csv is only offered for tables "
              f"({', '.join(sorted(CSV_COMMANDS))})", file=sys.stderr)
        return EXIT_USAGE

    man = RunManifest(args.command, _config_echo(args))
    try:
        Path(args.cache_dir).mkdir(parents=True, exist_ok=True)
        text, passed = COMMANDS[args.command](args, man)
    except (UsageError, SpherelabError, ValueError, OSError) as err:
        print(f"spherelab: error: {err}", file=sys.stderr)
        return EXIT_USAGE

    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        man.artifacts.append(str(out))
    else:
        sys.stdout.write(text)
    mdir = Path(args.cache_dir) / "manifests"
    mdir.mkdir(parents=True, exist_ok=True)
    (mdir / f"{args.command}.json").write_text(_json(man.as_dict()), encoding="utf-8")
    for c in man.checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}", file=sys.stderr)
    return EXIT_OK if passed else EXIT_FAIL
