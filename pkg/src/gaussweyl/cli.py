"""Command-line front end.

Subcommands: verify, weyl, sweep-q, decompose, jacobi, gauss.  Every run
writes a JSON manifest (config echo, seed, versions, tolerances).  Exit
codes: 0 ok, 1 tolerance failure, 2 usage or parse error.

Any option can also come from ``--config FILE``: one ``key = value`` per
line, ``#`` starts a comment, keys are option names without the leading
dashes (``-`` or ``_``), and repeatable options may appear several times.
Flags given on the command line win over the file.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
from pathlib import Path

import numpy as np
import sympy

from . import reporting
from .characters import LimitCharacter
from .charsums import gauss_all, gauss_sum
from .equidist import (
    CSV_FIELDS, EmptySError, Entry, MonomialConfig, PRESETS, c_window,
    corollary_experiment, corollary_values, make_corollary, weyl_series, weyl_sums,
)
from .field_tower import FieldConfigError, get_tower, split_prime_power
from .identities import run_suite
from .relations import MonomialParseError, decompose, dumps_result, numeric_crosscheck, parse_monomial

DEFAULT_FIELDS = [5, 7, 9, 13, 25, 27]


class UsageError(Exception):
    pass


# -- argument parsing helpers -------------------------------------------------


def int_tuple(text: str) -> tuple[int, ...]:
    text = text.strip().strip("()")
    try:
        return tuple(int(x) for x in re.split(r"[,\s]+", text) if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def level_range(text: str) -> list[int]:
    """'1-8', '3' or '1,2,5'."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError(f"bad level range {text!r}")
    return out


def positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("tolerances must be positive")
    return value


_QEXPR = re.compile(r"^q([+-]\d+)?$")


def _exponent(token: str, q: int) -> int:
    token = token.strip()
    match = _QEXPR.match(token)
    if match:
        return q + int(match[1] or 0)
    return int(token)


def parse_entry(text: str, q: int) -> Entry:
    """ETA:A[:T], e.g. '0/1:1', '1/2:1,-2:1,2'.  A may use q, q-1, q+1."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"entry {text!r} must look like ETA:A or ETA:A:T")
    try:
        eta = LimitCharacter.parse(parts[0])
        a = tuple(_exponent(x, q) for x in parts[1].strip("()").split(","))
        t = tuple(int(x) for x in parts[2].strip("()").split(",")) if len(parts) == 3 else None
    except ValueError as exc:
        raise UsageError(f"entry {text!r}: {exc}") from None
    return Entry(eta, a, t)


def field_of(q: int) -> tuple[int, int]:
    try:
        return split_prime_power(q)
    except (ValueError, FieldConfigError) as exc:
        raise UsageError(str(exc)) from None


def build_config(entries: list[str], q: int) -> MonomialConfig:
    if not entries:
        raise UsageError("at least one --entry is required")
    p, f = field_of(q)
    try:
        return MonomialConfig(p, f, [parse_entry(e, q) for e in entries])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def read_config_file(path: str) -> list[tuple[str, str]]:
    pairs = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        pairs.append((key.replace("-", "_"), value))
    return pairs


def apply_config(parser: argparse.ArgumentParser, pairs, explicit: set):
    actions = {a.dest: a for a in parser._actions}
    defaults: dict = {}
    for key, value in pairs:
        if key not in actions:
            raise UsageError(f"unknown config key {key!r}")
        if key in explicit:
            continue
        action = actions[key]
        convert = action.type or str
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        elif isinstance(action, argparse._AppendAction):
            defaults.setdefault(key, []).append(convert(value))
        elif action.nargs in ("*", "+"):
            defaults[key] = [convert(v) for v in value.split()]
        else:
            defaults[key] = convert(value)
    parser.set_defaults(**defaults)


# -- commands ------------------------------------------------------------------


def manifest(args, tolerances: dict) -> dict:
    echo = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "manifest")}
    return {
        "command": args.command,
        "config": echo,
        "seed": args.seed,
        "versions": reporting.versions(),
        "tolerances": tolerances,
    }


def cmd_verify(args) -> int:
    if not args.fields:
        raise UsageError("the field list is empty")
    rows, failed = [], False
    for q in args.fields:
        p, f = field_of(q)
        for res in run_suite(p, f, 1, args.tolerance, args.max_lift, args.jacobi_max):
            failed |= not res.ok
            rows.append({"field": res.field, "identity": res.identity, "residual": repr(res.residual),
                         "sweep_size": res.sweep_size, "tolerance": res.tolerance,
                         "ok": "pass" if res.ok else "FAIL"})
    reporting.write_csv(rows, ["field", "identity", "residual", "sweep_size", "tolerance", "ok"], args.out)
    reporting.write_manifest(manifest(args, {"identity": args.tolerance}), args.manifest, args.out)
    return 1 if failed else 0


def cmd_weyl(args) -> int:
    cfg = build_config(args.entry, args.q)
    cs = list(args.c or [])
    if args.window:
        cs += c_window(cfg.n, args.window)
    if not cs:
        raise UsageError("give --c at least once or --window")
    for c in cs:
        if len(c) != cfg.n:
            raise UsageError(f"c={c} needs {cfg.n} entries")
    reports = []
    for c in dict.fromkeys(cs):
        reports += weyl_series(cfg, c, args.m, tuple(args.calibration), workers=args.workers)
    reporting.write_csv([r.csv_row() for r in reports], CSV_FIELDS, args.out)
    reporting.write_manifest(manifest(args, {"bound": "fitted on calibration levels"}), args.manifest, args.out)
    if args.plot:
        reporting.plot_weyl_series(reports, args.plot, title=f"q={cfg.q}")
    if args.check_bound:
        late = [r for r in reports if r.m > max(args.calibration) and r.rhs is not None]
        if any(not r.within_bound for r in late):
            return 1
    return 0


def cmd_sweep_q(args) -> int:
    primes = args.primes or list(sympy.primerange(5, 98))
    configs = {}
    for q in primes:
        cfg = build_config(args.entry, q)
        worst = max(abs(x) for e in cfg.entries for x in e.a)
        if worst > args.A:
            raise UsageError(f"exponent {worst} at q={q} exceeds the cap A={args.A}")
        if len(args.c) != cfg.n:
            raise UsageError(f"c needs {cfg.n} entries")
        configs[q] = cfg
    rows = []
    for q, cfg in configs.items():
        try:
            rep = weyl_sums(cfg, [args.c], args.level, workers=args.workers)[0]
        except EmptySError:
            continue
        rows.append({"q": q, "m": args.level, "abs": repr(rep.abs_sigma),
                     "scaled": repr(rep.abs_sigma * math.sqrt(q**args.level)), "s_size": rep.s_size})
    if not rows:
        raise UsageError("no prime gave a nonempty S")
    med = float(np.median([float(r["scaled"]) for r in rows]))
    for row in rows:
        row["ratio_to_median"] = repr(float(row["scaled"]) / med) if med else ""
    reporting.write_csv(rows, ["q", "m", "abs", "scaled", "s_size", "ratio_to_median"], args.out)
    reporting.write_manifest(manifest(args, {"uniform_factor": args.uniform_factor, "A": args.A}),
                             args.manifest, args.out)
    if args.plot:
        reporting.plot_sweep(rows, args.plot)
    if any(float(r["scaled"]) > args.uniform_factor * med for r in rows):
        return 1
    return 0


def cmd_decompose(args) -> int:
    text = args.monomial if args.monomial is not None else Path(args.file).read_text()
    p, f = field_of(args.q)
    try:
        x = parse_monomial(text, p, f, r=args.r)
    except MonomialParseError as exc:
        raise UsageError(f"parse error: {exc}") from None
    result = decompose(x)
    extra = {"input": str(x), "q": args.q}
    status = 0
    if args.crosscheck and result.verdict == "in_H":
        checks = []
        for m in args.levels:
            try:
                cc = numeric_crosscheck(x, result.decomposition, m, args.sample, seed=args.seed)
                ok = cc.deviation <= args.tolerance
                status |= 0 if ok else 1
                checks.append({"m": m, "deviation": cc.deviation, "used": cc.used,
                               "excluded": cc.excluded, "ok": ok})
            except ValueError as exc:
                checks.append({"m": m, "error": str(exc)})
        extra["crosscheck"] = checks
    text_out = dumps_result(result, **extra) + "\n"
    if args.out:
        Path(args.out).write_text(text_out)
    else:
        sys.stdout.write(text_out)
    reporting.write_manifest(manifest(args, {"constancy": args.tolerance}), args.manifest, args.out)
    return status


def cmd_jacobi(args) -> int:
    p, f = field_of(args.q)
    tails = [[s for s in re.split(r"[,\s]+", t) if s] for t in (args.tail or [])]
    try:
        cor = make_corollary(args.preset, p, f, n=args.n, d=args.d, tails=tails, powers=args.powers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows, reports = [], []
    for m in args.m:
        try:
            reps = corollary_experiment(cor, m, C=args.window, workers=args.workers)
        except EmptySError:
            continue
        reports += reps
        rows += [r.csv_row() for r in reps]
    reporting.write_csv(rows, CSV_FIELDS, args.out)
    reporting.write_manifest(manifest(args, {}), args.manifest, args.out)
    if args.plot and args.m:
        _, values = corollary_values(cor, max(args.m))
        reporting.plot_unit_circle(values[:, 0], args.plot, title=f"{args.preset}, q={args.q}, m={max(args.m)}")
    return 0


def cmd_gauss(args) -> int:
    p, f = field_of(args.q)
    ctx = get_tower(p, f, args.level).level(args.level)
    table = gauss_all(ctx)
    indices = args.index if args.index else range(ctx.n_units)
    rows, failed = [], False
    root = math.sqrt(ctx.order)
    for e in indices:
        value = gauss_sum(ctx, e) if args.direct else complex(table[e % ctx.n_units])
        expected = 1.0 if e % ctx.n_units == 0 else root
        ok = abs(abs(value) - expected) <= args.tolerance * root
        failed |= not ok
        rows.append({"index": e % ctx.n_units, "re": repr(value.real), "im": repr(value.imag),
                     "abs": repr(abs(value)), "ok": "pass" if ok else "FAIL"})
    reporting.write_csv(rows, ["index", "re", "im", "abs", "ok"], args.out)
    reporting.write_manifest(manifest(args, {"modulus": args.tolerance}), args.manifest, args.out)
    return 1 if failed else 0


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaussweyl", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat key = value file with option defaults")
        sp.add_argument("--out", help="output file (stdout when omitted)")
        sp.add_argument("--manifest", help="manifest path (default: next to --out, else stderr)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--workers", type=int, default=os.cpu_count() or 1)

    sp = sub.add_parser("verify", help="run the identity suite on a list of fields")
    common(sp)
    sp.add_argument("--fields", type=int, nargs="*", default=DEFAULT_FIELDS)
    sp.add_argument("--tolerance", type=positive_float, default=1e-8)
    sp.add_argument("--max-lift", type=int, default=3)
    sp.add_argument("--jacobi-max", type=int, default=3)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("weyl", help="Weyl sums of one configuration over a range of levels")
    common(sp)
    sp.add_argument("--q", type=int)
    sp.add_argument("--entry", action="append", default=None, help="ETA:A[:T], repeatable")
    sp.add_argument("--c", type=int_tuple, action="append", default=None, help="repeatable, e.g. 1,-1")
    sp.add_argument("--window", type=int, default=0, help="add every c with 0 < max|c_i| <= WINDOW")
    sp.add_argument("--m", type=level_range, default=[1, 2, 3])
    sp.add_argument("--calibration", type=int_tuple, default=(1, 2))
    sp.add_argument("--check-bound", action="store_true", help="exit 1 if a later level breaks the bound")
    sp.add_argument("--plot", help="PNG of |Sigma_m| against m")
    sp.set_defaults(func=cmd_weyl)

    sp = sub.add_parser("sweep-q", help="|Sigma_1| over increasing primes")
    common(sp)
    sp.add_argument("--primes", type=int, nargs="*", default=None)
    sp.add_argument("--entry", action="append", default=None, help="ETA:A[:T]; A may use q, q-1")
    sp.add_argument("--c", type=int_tuple)
    sp.add_argument("--A", type=int, default=10, help="cap on |a_ij|")
    sp.add_argument("--level", type=int, default=1)
    sp.add_argument("--uniform-factor", type=positive_float, default=4.0)
    sp.add_argument("--plot", help="PNG of the scaled series")
    sp.set_defaults(func=cmd_sweep_q)

    sp = sub.add_parser("decompose", help="decide membership in the relation subgroup")
    common(sp)
    sp.add_argument("monomial", nargs="?", help="[eta=u/v; a=(...); exp=e] * ...")
    sp.add_argument("--file")
    sp.add_argument("--q", type=int)
    sp.add_argument("--r", type=int, default=None, help="dimension, needed for the empty product '1'")
    sp.add_argument("--crosscheck", action="store_true")
    sp.add_argument("--levels", type=level_range, default=[1, 2])
    sp.add_argument("--sample", type=int, default=None)
    sp.add_argument("--tolerance", type=positive_float, default=1e-6)
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("jacobi", help="Weyl sums of normalized Jacobi sums")
    common(sp)
    sp.add_argument("--preset", choices=PRESETS)
    sp.add_argument("--q", type=int)
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--tail", action="append", default=None, help="fixed characters, e.g. '1/2,1/4'")
    sp.add_argument("--powers", type=int, nargs="*", default=None)
    sp.add_argument("--m", type=level_range, default=[1, 2])
    sp.add_argument("--window", type=int, default=1)
    sp.add_argument("--plot", help="PNG of the first coordinate on the unit circle")
    sp.set_defaults(func=cmd_jacobi)

    sp = sub.add_parser("gauss", help="dump Gauss sums of one field")
    common(sp)
    sp.add_argument("--q", type=int)
    sp.add_argument("--level", type=int, default=1)
    sp.add_argument("--index", type=int, action="append", default=None)
    sp.add_argument("--direct", action="store_true", help="use the direct sum instead of the batch table")
    sp.add_argument("--tolerance", type=positive_float, default=1e-8)
    sp.set_defaults(func=cmd_gauss)
    return parser


def _explicit_dests(sub: argparse.ArgumentParser, argv: list[str]) -> set:
    flags = {}
    for action in sub._actions:
        for opt in action.option_strings:
            flags[opt] = action.dest
    return {flags[a.split("=", 1)[0]] for a in argv if a.split("=", 1)[0] in flags}


REQUIRED = {
    "weyl": ["q", "entry"],
    "sweep-q": ["entry", "c"],
    "decompose": ["q"],
    "jacobi": ["preset", "q"],
    "gauss": ["q"],
}


def _config_path(argv: list[str]) -> str | None:
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if arg.startswith("--config="):
            return arg.split("=", 1)[1]
    return None


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    subparsers = parser._subparsers._group_actions[0].choices
    command = next((a for a in argv if not a.startswith("-")), None)
    try:
        path = _config_path(argv)
        if path is not None and command in subparsers:
            sub = subparsers[command]
            apply_config(sub, read_config_file(path), _explicit_dests(sub, argv))
    except (UsageError, OSError) as exc:
        print(f"gaussweyl: error: {exc}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        missing = [d for d in REQUIRED.get(args.command, []) if getattr(args, d) in (None, [])]
        if missing:
            raise UsageError("missing " + ", ".join("--" + d.replace("_", "-") for d in missing))
        if args.command == "decompose" and (args.monomial is None) == (args.file is None):
            raise UsageError("give exactly one of MONOMIAL or --file")
        return args.func(args)
    except (UsageError, FieldConfigError, OSError) as exc:
        print(f"gaussweyl {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
