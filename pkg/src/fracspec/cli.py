"""Command-line front end: ``fracspec <subcommand> [flags]``.

Exit codes: 0 success, 1 a reproduction check failed, 2 invalid input,
3 a criterion was inconclusive under ``--strict``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from mpmath import mp, mpf

from . import io as fio
from .decimation import DEFAULT_PRECISION, get_system, load_registry
from .graphs import build_level, get_fractal
from .laplacian import BOUNDARY_CONDITIONS, CONVENTIONS, level_spectrum, verify_decimation
from .limits import generate_spectrum, truncated_spectrum
from .perturbation import run_trials, trials_csv, wielandt_check
from .reproduce import CHECKS, format_table, run_all
from .spacing import (
    INCONCLUSIVE,
    POSITIVE,
    ZERO,
    positive_criterion,
    spacing_report,
    suggest_D0,
    witness_sequence,
    zero_criterion,
)

FORMATS = ("json", "csv", "text")


class UsageError(Exception):
    """Invalid flag value; the message names the flag."""


@dataclass
class Output:
    data: dict
    csv: Optional[str] = None
    text: Optional[str] = None
    code: int = 0


# --- helpers ------------------------------------------------------------------------


def _rows_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _text(data, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(data, dict):
        for k, v in data.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.append(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {v}")
    elif isinstance(data, list):
        for v in data:
            if isinstance(v, (dict, list)):
                lines.append(_text(v, indent + 1))
                lines.append("")
            else:
                lines.append(f"{pad}{v}")
    else:
        lines.append(f"{pad}{data}")
    return "\n".join(lines).rstrip("\n")


def _number(s: str, flag: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"{flag}: not a number: {s!r}") from None


def _system(args):
    try:
        registry = load_registry(args.registry) if args.registry else None
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"--registry: cannot load {args.registry!r}: {exc}") from None
    try:
        return get_system(args.fractal, registry)
    except KeyError as exc:
        raise UsageError(f"--fractal: {exc.args[0]}") from None


def _spec(system):
    try:
        return get_fractal(system.fractal)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"--fractal: no graph template for {system.fractal!r} ({exc})") from None


def _level(spec, level: int, flag: str = "--level", low: int = 0) -> int:
    if not low <= level <= spec.max_level:
        raise UsageError(f"{flag}: must lie in [{low}, {spec.max_level}] for {spec.name}, got {level}")
    return level


def _d0(text: Optional[str]) -> Optional[list[Fraction]]:
    if text is None:
        return None
    return [_number(t.strip(), "--D0") for t in text.split(",") if t.strip()]


# --- subcommands --------------------------------------------------------------------


def cmd_graph(args) -> Output:
    spec = get_fractal(args.fractal) if not args.registry else _spec(_system(args))
    g = build_level(spec, _level(spec, args.level))
    d = g.to_dict()
    labels = g.labels()
    rows = [[labels[i], labels[j]] for i, nb in enumerate(g.adjacency) for j in nb if i < j]
    return Output(d, _rows_csv(["u", "v"], rows))


def cmd_spectrum(args) -> Output:
    system = _system(args)
    spec = _spec(system)
    conv = args.convention or system.convention
    res = level_spectrum(spec, _level(spec, args.level), conv, args.bc, min(args.tol, 1e-12))
    return Output(res.to_dict(), res.to_csv())


def cmd_decimate_verify(args) -> Output:
    system = _system(args)
    spec = _spec(system)
    levels = range(1, _level(spec, args.level, low=1) + 1) if args.all_levels else [_level(spec, args.level, low=1)]
    reps = [verify_decimation(spec, m, system, args.tol, args.bc) for m in levels]
    data = {"fractal": spec.name, "bc": args.bc, "passed": all(r.passed for r in reps), "levels": [r.to_dict() for r in reps]}
    rows = [[r.level, r.passed, repr(r.max_distance), r.checked, len(r.skipped)] for r in reps]
    return Output(data, _rows_csv(["level", "passed", "max_distance", "checked", "skipped"], rows), code=0 if data["passed"] else 1)


def _limits(args, system, spec):
    if args.depth_only:
        _level(spec, args.depth_only + 1, "--depth-only")
        vals = truncated_spectrum(system, spec, args.bc, args.depth_only, args.tol, args.precision)
        return None, vals
    if args.count is None and args.cutoff is None:
        raise UsageError("--count: give --count, --cutoff or --depth-only")
    if args.count is not None and args.count < 1:
        raise UsageError("--count: must be at least 1")
    cutoff = _number(args.cutoff, "--cutoff") if args.cutoff is not None else None
    try:
        gen = generate_spectrum(
            system, spec, args.bc, cutoff=cutoff, count=args.count, tol=args.tol,
            precision=args.precision, depth=args.depth, verify_closed_form=args.verify_closed_form,
        )
    except ValueError as exc:
        raise UsageError(f"--count/--cutoff: {exc}") from None
    return gen, gen.values


def cmd_limit(args) -> Output:
    system = _system(args)
    spec = _spec(system)
    gen, vals = _limits(args, system, spec)
    if gen is not None:
        return Output(gen.to_dict(), gen.to_csv())
    digits = fio.digits_for(args.precision)
    rows = [[i, mp.nstr(v.value, digits), v.base_level, mp.nstr(v.base_value, digits), mp.nstr(v.error_bound, 6)] for i, v in enumerate(vals)]
    data = {
        "fractal": spec.name,
        "bc": args.bc,
        "depth": args.depth_only,
        "eigenvalues": [dict(zip(["index", "eigenvalue", "base_level", "base_value", "error_bound"], r)) for r in rows],
    }
    return Output(data, _rows_csv(["index", "eigenvalue", "base_level", "base_value", "error_bound"], rows))


def cmd_spacing(args) -> Output:
    system = _system(args)
    spec = _spec(system)
    if args.level is not None:
        res = level_spectrum(spec, _level(spec, args.level), system.convention, args.bc)
        values = [mpf(float(v)) for v in res.eigenvalues]
        source = f"{spec.name} level {args.level} {args.bc}"
    else:
        _, vals = _limits(args, system, spec)
        values = [v.value for v in vals]
        source = f"{spec.name} limit {args.bc}"
    if len(values) < 2:
        raise UsageError("--count: need at least two eigenvalues")
    rep = spacing_report(values, source, full=True)
    d = rep.to_dict()
    digits = fio.digits_for(args.precision)
    rows = [[i, mp.nstr(v, digits), mp.nstr(values[i + 1] - v, digits) if i + 1 < len(values) else ""] for i, v in enumerate(values)]
    return Output(d, _rows_csv(["index", "eigenvalue", "spacing_to_next"], rows))


def cmd_criterion(args) -> Output:
    system = _system(args)
    zc = zero_criterion(system, args.precision)
    D0 = _d0(args.D0)
    suggestion = None
    if D0 is None:
        spec = _spec(system)
        suggestion = suggest_D0(system, spec, _level(spec, args.n, "--n"), precision=args.precision)
        D0 = suggestion.values
    pc = positive_criterion(system, D0, args.precision)
    overall = ZERO if zc.verdict == ZERO else POSITIVE if pc.verdict == POSITIVE else INCONCLUSIVE
    c = system.c_delta
    data = {
        "fractal": system.name,
        "verdict": overall,
        "c_delta": str(c),
        "zero_criterion": zc.to_dict(),
        "positive_criterion": pc.to_dict(),
    }
    if suggestion is not None:
        data["suggested_D0"] = suggestion.to_dict()
    text = "\n".join([f"{system.name}: {overall} (R'(0) = {c})", zc.to_text(), pc.to_text()])
    rows = [[crit.criterion, cond.name, cond.status, cond.detail] for crit in (zc, pc) for cond in crit.conditions]
    code = 3 if args.strict and overall == INCONCLUSIVE else 0
    return Output(data, _rows_csv(["criterion", "condition", "status", "detail"], rows), text, code)


def cmd_witness(args) -> Output:
    system = _system(args)
    if args.m_max < 0:
        raise UsageError("--m-max: must be nonnegative")
    x1, x2 = _number(args.x1, "--x1"), _number(args.x2, "--x2")
    try:
        seq = witness_sequence(system, x1, x2, args.n0, range(args.m_max + 1), args.j, args.precision)
    except ValueError as exc:
        raise UsageError(f"--x1/--x2: {exc}") from None
    digits = fio.digits_for(args.precision)
    rows = []
    for k, w in enumerate(seq):
        ratio = mp.nstr(w.spacing / seq[k - 1].spacing, digits) if k else ""
        rows.append([w.m, mp.nstr(w.values[0], digits), mp.nstr(w.values[1], digits), mp.nstr(w.spacing, digits), ratio])
    header = ["m", "value_1", "value_2", "spacing", "ratio"]
    return Output({"fractal": system.name, "points": [dict(zip(header, r)) for r in rows]}, _rows_csv(header, rows))


def cmd_wielandt(args) -> Output:
    if args.n < 2:
        raise UsageError("--n: must be at least 2")
    if not 1 <= args.d < args.n:
        raise UsageError(f"--d: must lie in [1, {args.n - 1}]")
    if args.trials < 1:
        raise UsageError("--trials: must be at least 1")
    if args.scale <= 0:
        raise UsageError("--scale: must be positive")
    rows = run_trials(args.n, args.d, args.trials, args.scale, args.seed, min(args.tol, 1e-12))
    bad = sum(r.violation for r in rows)
    data = {
        "n": args.n,
        "d": args.d,
        "trials": args.trials,
        "scale_fraction": args.scale,
        "seed": args.seed,
        "violations": bad,
        "worst_margin_top": min(r.worst_margin_top for r in rows),
        "worst_margin_bottom": min(r.worst_margin_bottom for r in rows),
    }
    return Output(data, trials_csv(rows), code=1 if bad else 0)


def cmd_reproduce(args) -> Output:
    ids = args.ids or list(CHECKS)
    for i in ids:
        if i not in CHECKS:
            raise UsageError(f"example-id: unknown {i!r}; known: {', '.join(CHECKS)}")
    results = run_all(ids)
    ok = all(r.passed for r in results)
    data = {"passed": ok, "checks": [r.to_dict() for r in results]}
    rows = [[r.id, r.title, "PASS" if r.passed else "FAIL", f"{r.seconds:.3f}", r.detail] for r in results]
    text = format_table(results) + f"\n{sum(r.passed for r in results)}/{len(results)} passed"
    return Output(data, _rows_csv(["id", "title", "result", "seconds", "detail"], rows), text, 0 if ok else 1)


# --- parser -------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, fractal: bool = True) -> None:
    if fractal:
        p.add_argument("--fractal", default="sg", help="registry entry (interval, sg, sg3, ...)")
    p.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="working precision in bits (>= 64)")
    p.add_argument("--tol", type=float, default=1e-10, help="numerical tolerance (> 0)")
    p.add_argument("--format", choices=FORMATS, default="json")
    p.add_argument("--output", "-o", help="write the artifact here (atomically) instead of stdout")
    p.add_argument("--registry", help="registry JSON overriding $FRACSPEC_REGISTRY and the bundled file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strict", action="store_true", help="exit 3 when a criterion is inconclusive")


def _bc(p, default="dirichlet") -> None:
    p.add_argument("--bc", choices=BOUNDARY_CONDITIONS, default=default)


def _limit_flags(p) -> None:
    p.add_argument("--count", type=int, help="number of distinct eigenvalues")
    p.add_argument("--cutoff", help="all eigenvalues up to this value")
    p.add_argument("--depth", type=int, default=0, help="minimum number of levels")
    p.add_argument("--depth-only", type=int, default=0, help="all limits born at levels <= this, no target")
    p.add_argument("--verify-closed-form", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracspec", description="Spectral decimation toolkit for self-similar fractals.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph", help="level-m graph approximation")
    _common(p)
    p.add_argument("--level", type=int, default=1)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("spectrum", help="discrete Laplacian spectrum at one level")
    _common(p)
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--convention", choices=CONVENTIONS, help="default: the registry convention")
    _bc(p, "neumann")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("decimate-verify", help="check R maps level m spectrum into level m-1")
    _common(p)
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--all-levels", action="store_true", help="check every level 1..--level")
    _bc(p, "neumann")
    p.set_defaults(func=cmd_decimate_verify)

    p = sub.add_parser("limit", help="renormalised limit eigenvalues")
    _common(p)
    _bc(p)
    _limit_flags(p)
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("spacing", help="spacing statistics of a level or limit spectrum")
    _common(p)
    _bc(p)
    _limit_flags(p)
    p.add_argument("--level", type=int, help="use the discrete level spectrum instead of limits")
    p.set_defaults(func=cmd_spacing)

    p = sub.add_parser("criterion", help="zero and positive spacing criteria")
    _common(p)
    p.add_argument("--D0", help="comma separated seed set; default: suggested from level --n")
    p.add_argument("--n", type=int, default=1, help="level used to suggest D0")
    p.set_defaults(func=cmd_criterion)

    p = sub.add_parser("witness", help="pairs of limit eigenvalues with vanishing spacing")
    _common(p)
    p.set_defaults(fractal="sg3")
    p.add_argument("--x1", default="3/4")
    p.add_argument("--x2", default="1")
    p.add_argument("--n0", type=int, default=1)
    p.add_argument("--j", type=int, default=8)
    p.add_argument("--m-max", type=int, default=6)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("wielandt", help="seeded trials of the block perturbation inequalities")
    _common(p, fractal=False)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--d", type=int, default=4)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--scale", type=float, default=0.1, help="||B|| as a fraction of the spectral gap")
    p.set_defaults(func=cmd_wielandt)

    p = sub.add_parser("reproduce", help="run the end-to-end example checks")
    _common(p, fractal=False)
    p.set_defaults(format="text")
    p.add_argument("ids", nargs="*", metavar="example-id", help=f"any of {', '.join(CHECKS)}; default all")
    p.set_defaults(func=cmd_reproduce)
    return parser


def _validate(args) -> None:
    if args.precision < 64:
        raise UsageError(f"--precision: must be >= 64, got {args.precision}")
    if not args.tol > 0:
        raise UsageError(f"--tol: must be > 0, got {args.tol}")


def _render(out: Output, fmt: str, precision: int) -> str:
    if fmt == "csv" and out.csv is not None:
        return out.csv
    if fmt == "text":
        return (out.text if out.text is not None else _text(fio.to_jsonable(out.data, precision))) + "\n"
    return fio.dumps(out.data, precision)


def run(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _validate(args)
        with mp.workprec(args.precision):
            out = args.func(args)
        text = _render(out, args.format, args.precision)
    except UsageError as exc:
        print(f"fracspec {args.command}: error: {exc}", file=sys.stderr)
        return 2
    if args.output:
        try:
            fio.atomic_write(args.output, text)
        except OSError as exc:
            print(f"fracspec {args.command}: error: --output: {exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    return out.code


def main() -> None:
    sys.exit(run())
