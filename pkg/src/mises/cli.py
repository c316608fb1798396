"""Command-line interface: ``mises transform | catalog | numcheck``.

Exit status is 0 when every executed check passed, 1 when a check failed
and 2 for usage, parse or template errors.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import yaml

from . import __version__
from .expr import ParseError, default_context, parse, parse_equation
from .expr.equality import DEFAULT_SEED, DEFAULT_TOL, DEFAULT_TRIALS
from .expr.nodes import Integral
from .jets import JetContext, MisesError, resolve
from .transform import (
    Equation,
    IntegroDiffEquation,
    SubstitutionError,
    TemplateMismatch,
    change_dependent,
    equations_equivalent,
    match_boundary_layer,
    match_evolution,
    match_integro,
    match_ode,
    match_three_var,
    reduce_mises_2_1,
    reduce_mises_2_5,
    reduce_mises_3var,
    reduce_ode_autonomous,
    rewrite_mixed_to_integro,
    rf_pair_evolution,
    rf_pair_integrodiff,
    rf_pair_ode,
)

REPORT_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

FRAMES = {
    "evolution": lambda: JetContext(),
    "three-var": lambda: JetContext(("t", "x", "y"), "u", mises_direction="y"),
    "ode": lambda: JetContext(("x",), "u", mises_direction="x"),
}


class UsageError(ValueError):
    """Bad command-line input; reported with exit status 2."""


@dataclass
class RunConfig:
    command: str
    seed: int = DEFAULT_SEED
    trials: int = DEFAULT_TRIALS
    tol: float = DEFAULT_TOL
    json_path: str | None = None
    csv_path: str | None = None
    quiet: bool = False
    timing: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.trials < 1:
            raise UsageError("--trials must be positive")
        if not self.tol > 0:
            raise UsageError("--tol must be positive")


# ----------------------------------------------------------- transform


def _recipe_steps(text: str | None) -> list[tuple[str, str | None]]:
    """``rf_pair,eta=1/zeta`` -> ``[("rf_pair", None), ("eta", "1/zeta")]``."""
    if not text:
        return []
    steps = []
    for part in (p.strip() for p in text.split(",")):
        if not part:
            continue
        name, _, value = part.partition("=")
        steps.append((name.strip(), value.strip() or None))
    return steps


_REDUCERS = {
    "rf_pair": "evolution",
    "rf_pair_integro": "integro",
    "mises_2_1": "boundary-layer",
    "mises_2_5": "boundary-layer",
    "mises_3var": "three-var",
    "ode_reduce": "ode",
    "rf_pair_ode": "ode-solved",
    "mixed_to_integro": "mixed",
}


def _auto_reduce(eq: Equation, ctx: JetContext, frame: str):
    """Pick the reduction from the shape of the equation."""
    if frame == "three-var":
        return reduce_mises_3var(match_three_var(eq, ctx)), None
    if frame == "ode":
        try:
            return rf_pair_ode(match_ode(eq, ctx, solved=True)), None
        except TemplateMismatch:
            return reduce_ode_autonomous(match_ode(eq, ctx)), None
    names = eq.lhs.free_symbols | eq.rhs.free_symbols
    if any(resolve(n, {"w": ctx.independents}) for n in names):
        return _reduce_integro(rewrite_mixed_to_integro(eq, ctx))
    if any(isinstance(n, Integral) for n in eq.residual.walk()):
        return _reduce_integro(match_integro(eq, ctx))
    try:
        return rf_pair_evolution(match_evolution(eq, ctx))
    except TemplateMismatch as first:
        try:
            return reduce_mises_2_1(match_boundary_layer(eq, ctx)), None
        except TemplateMismatch:
            raise first from None


def _reduce_integro(eq):
    if isinstance(eq, IntegroDiffEquation):
        return rf_pair_integrodiff(eq)
    return rf_pair_evolution(eq)


def _reduce(name: str, eq: Equation, ctx: JetContext, source, G: str | None):
    kind = _REDUCERS[name]
    if kind == "evolution":
        return rf_pair_evolution(match_evolution(eq, ctx))
    if kind == "integro":
        return rf_pair_integrodiff(match_integro(eq, ctx))
    if kind == "mixed":
        return _reduce_integro(rewrite_mixed_to_integro(eq, ctx))
    if kind == "boundary-layer":
        generator = parse(G, source) if G else None
        bl = match_boundary_layer(eq, ctx, generator)
        return (reduce_mises_2_5(bl) if name == "mises_2_5" else reduce_mises_2_1(bl)), None
    if kind == "three-var":
        return reduce_mises_3var(match_three_var(eq, ctx)), None
    if kind == "ode":
        return reduce_ode_autonomous(match_ode(eq, ctx)), None
    return rf_pair_ode(match_ode(eq, ctx, solved=True)), None


def transform_one(text: str, recipe: str | None, frame: str, cfg: RunConfig, expect: str | None = None,
                  G: str | None = None, label: str = "eq-1") -> dict:
    """Apply a recipe to one equation and return the report entry."""
    from .catalog import load_catalog

    if frame not in FRAMES:
        raise UsageError(f"unknown frame {frame!r}; choose from {', '.join(FRAMES)}")
    ctx = FRAMES[frame]()
    base = default_context()
    source, target = ctx.source_context(base), ctx.target_context(base)
    lhs, rhs = parse_equation(text, source)
    eq = Equation(lhs=lhs, rhs=rhs)
    steps = _recipe_steps(recipe)
    reducers = [s for s, v in steps if v is None]
    unknown = [s for s in reducers if s not in _REDUCERS]
    if unknown:
        raise UsageError(f"unknown recipe step {unknown[0]!r}; known: {', '.join(sorted(_REDUCERS))}, <unknown>=<expr>")
    if len(reducers) > 1:
        raise UsageError("a recipe holds at most one reduction step")
    if reducers:
        out, pair = _reduce(reducers[0], eq, ctx, source, G)
    else:
        out, pair = _auto_reduce(eq, ctx, frame)
    for name, value in steps:
        if value is None:
            continue
        if name != out.unknown:
            raise UsageError(f"change of variable names {name!r}, but the current unknown is {out.unknown!r}")
        new = _new_unknown(value, target, out.unknown)
        out = change_dependent(out, new, parse(value, target.with_symbols(new)))
    rules = load_catalog().rules
    entry: dict[str, Any] = {
        "id": label,
        "cite": "",
        "status": "pass",
        "input": text,
        "output": out.text(),
        "log": [{"rule": s.rule, "cite": rules.get(s.rule, "")} for s in out.log],
    }
    if pair is not None:
        entry["backlund"] = [pair.relation1.text(), pair.relation2.text()]
    if expect:
        el, er = parse_equation(expect, target)
        ok = equations_equivalent(out, Equation(lhs=el, rhs=er), trials=cfg.trials, tol=cfg.tol, rng=cfg.seed)
        entry["expected"] = expect
        entry["status"] = "pass" if ok else "fail"
    return entry


def _new_unknown(value: str, target, current: str) -> str:
    """The one identifier in ``value`` that is neither a plain symbol nor a function names the new unknown."""
    names = {n for n in re.findall(r"[A-Za-z_][A-Za-z0-9_]*", value)
             if n not in target.symbols and n not in target.functions and n != current}
    if len(names) != 1:
        raise UsageError(f"cannot tell the new unknown in {value!r}")
    return names.pop()


def _load_batch(path: str) -> list[dict]:
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, dict):
        data = data.get("equations")
    if not isinstance(data, list) or not all(isinstance(d, dict) and "eq" in d for d in data):
        raise UsageError(f"{path}: expected a list of records with an 'eq' field")
    return data


def cmd_transform(args, cfg: RunConfig) -> tuple[int, dict]:
    if bool(args.eq) == bool(args.file):
        raise UsageError("give exactly one of --eq and --file")
    jobs = [{"eq": args.eq, "recipe": args.recipe, "frame": args.frame, "expect": args.expect, "G": args.G}]
    if args.file:
        jobs = _load_batch(args.file)
    entries = []
    for k, job in enumerate(jobs, 1):
        entries.append(transform_one(job["eq"], job.get("recipe"), job.get("frame") or "evolution", cfg,
                                     job.get("expect"), job.get("G"), job.get("id", f"eq-{k}")))
    if not cfg.quiet:
        for e in entries:
            if len(entries) > 1:
                print(f"[{e['id']}] {e['input']}")
            print(e["output"])
            for rel in e.get("backlund", ()):
                print(f"  backlund: {rel}")
            for s in e["log"]:
                print(f"  {s['rule']}: {s['cite']}")
            if "expected" in e:
                print(f"  expected: {e['expected']} -> {e['status']}")
    ok = all(e["status"] == "pass" for e in entries)
    return (EXIT_OK if ok else EXIT_FAIL), {"entries": entries}


# -------------------------------------------------------------- catalog


def cmd_catalog(args, cfg: RunConfig) -> tuple[int, dict]:
    from .catalog import CatalogError, RunOptions, list_entries, load_catalog, run_all

    catalog = load_catalog(args.catalog) if args.catalog else load_catalog()
    if args.action == "list":
        entries = list_entries(catalog, section=args.section, tag=args.tag)
        if not cfg.quiet:
            for e in entries:
                print(f"{e.id:16s} {e.cite}")
        return EXIT_OK, {"entries": [e.summary() for e in entries]}
    if not args.all and not args.id:
        raise UsageError("catalog run needs --all or --id")
    options = RunOptions(seed=cfg.seed, trials=cfg.trials, tol=cfg.tol)
    try:
        agg = run_all(catalog, parallelism=args.parallel, options=options, ids=None if args.all else args.id)
    except CatalogError as err:
        raise UsageError(str(err)) from None
    if not cfg.quiet:
        for r in agg.entries:
            line = f"{r.status.upper():5s} {r.id}"
            if cfg.timing:
                line += f"  ({r.seconds:.3f} s)"
            print(line)
            for c in r.checks:
                if not c.passed:
                    print(f"      failed: {c.name} {c.detail}".rstrip())
            if r.error:
                print(f"      {r.error}")
        print(f"{agg.passed}/{agg.total} pass")
    report = {"entries": [r.to_dict(cfg.timing) for r in agg.entries], "passed": agg.passed, "total": agg.total}
    return (EXIT_OK if agg.ok else EXIT_FAIL), report


# ------------------------------------------------------------- numcheck


def cmd_numcheck(args, cfg: RunConfig) -> tuple[int, dict]:
    from .numeric import SUITES
    from .numeric.mol import MIN_POINTS, GridError

    suites = list(SUITES) if args.suite == "all" else [args.suite]
    entries = []
    ok = True
    for name in suites:
        kwargs: dict[str, Any] = {}
        if args.nx is not None:
            if args.nx < MIN_POINTS:
                raise GridError(f"grid below minimum: nx = {args.nx} < {MIN_POINTS}")
            kwargs["nx" if name in ("burgers-correspondence", "characteristic-shift") else "n"] = args.nx
        if args.nt is not None:
            if name != "burgers-correspondence":
                raise UsageError("--nt applies to burgers-correspondence only")
            if args.nt < 2:
                raise GridError("need at least two snapshot times")
            kwargs["nt"] = args.nt
        if cfg.csv_path and name in ("burgers-correspondence", "example3-exact"):
            kwargs["csv_path"] = cfg.csv_path if len(suites) == 1 else f"{cfg.csv_path}.{name}.csv"
        if name == "burgers-correspondence" and args.nx is not None and args.nx // 4 < MIN_POINTS:
            raise GridError(f"grid below minimum: the coarsest of three levels needs nx >= {4 * MIN_POINTS}")
        for rep in SUITES[name](**kwargs):
            control = bool(rep.details.get("expect_fail"))
            good = rep.passed != control
            ok &= good
            d = rep.to_dict()
            entries.append({
                "id": rep.check_id, "cite": name, "status": "pass" if good else "fail",
                "residuals": {k: d[k] for k in ("residual_max", "residual_l2", "tolerance", "order")},
                "control": control, "notes": rep.notes, "details": rep.details,
            })
            if not cfg.quiet:
                tag = "PASS" if good else "FAIL"
                extra = f" order={rep.order:.3f}" if rep.order is not None else ""
                kind = " (negative control, expected to exceed tolerance)" if control else ""
                print(f"{tag} {rep.check_id}: max={rep.residual_max:.3e} l2={rep.residual_l2:.3e} "
                      f"tol={rep.tolerance:.1e}{extra}{kind}")
    return (EXIT_OK if ok else EXIT_FAIL), {"entries": entries}


# ------------------------------------------------------------------ main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: $MISES_SEED or %d)" % DEFAULT_SEED)
    common.add_argument("--trials", type=int, default=DEFAULT_TRIALS, help="random points per equality test")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="relative tolerance of equality tests")
    common.add_argument("--json", metavar="PATH", help="write the JSON report to PATH ('-' for stdout)")
    common.add_argument("--quiet", action="store_true", help="suppress the human-readable output")
    common.add_argument("--timing", action="store_true", help="include wall-clock timings")

    p = argparse.ArgumentParser(prog="mises", description="Von Mises transformation, RF-pairs and Backlund pairs.")
    p.add_argument("--version", action="version", version=f"mises {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("transform", parents=[common], help="transform an equation")
    t.add_argument("--eq", help="equation in the DSL, e.g. 'u_t = u_xx + u*u_x'")
    t.add_argument("--file", help="YAML list of {eq, recipe, frame, expect, G, id} records")
    t.add_argument("--recipe", help="comma-separated steps, e.g. 'rf_pair,eta=1/zeta'")
    t.add_argument("--frame", default="evolution", choices=sorted(FRAMES), help="independent variables of the input")
    t.add_argument("--G", help="generator G for mises_2_5 (default u_x)")
    t.add_argument("--expect", help="expected result; the run fails if it differs")

    c = sub.add_parser("catalog", help="list or run the golden catalog")
    csub = c.add_subparsers(dest="action", required=True)
    cl = csub.add_parser("list", parents=[common], help="list entries")
    cl.add_argument("--section", help="section number, e.g. 4")
    cl.add_argument("--tag")
    cl.add_argument("--catalog", help=argparse.SUPPRESS)
    cr = csub.add_parser("run", parents=[common], help="run entries")
    cr.add_argument("--all", action="store_true")
    cr.add_argument("--id", action="append", help="entry id (repeatable)")
    cr.add_argument("--parallel", type=int, default=1, help="worker processes")
    cr.add_argument("--catalog", help="alternative catalog file")

    from .numeric.suites import SUITES

    n = sub.add_parser("numcheck", parents=[common], help="run a numeric verification suite")
    n.add_argument("suite", choices=[*SUITES, "all"])
    n.add_argument("--nx", type=int, help="grid points (finest level for convergence studies)")
    n.add_argument("--nt", type=int, help="snapshot count for the Burgers run")
    n.add_argument("--csv", metavar="PATH", help="dump the residual field as CSV (t, u, value)")
    return p


def _seed(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("MISES_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"MISES_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _write_json(path: str, report: dict) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command if args.command != "catalog" else f"catalog {args.action}"
    start = time.perf_counter()
    try:
        cfg = RunConfig(command=command, seed=_seed(args.seed), trials=args.trials, tol=args.tol,
                        json_path=args.json, csv_path=getattr(args, "csv", None),
                        quiet=args.quiet or args.json == "-", timing=args.timing)
        handler = {"transform": cmd_transform, "catalog": cmd_catalog, "numcheck": cmd_numcheck}[args.command]
        status, body = handler(args, cfg)
    except (UsageError, ParseError, TemplateMismatch, MisesError, SubstitutionError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as err:  # grid validation, monotonicity and other precondition failures
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.json_path:
        report = {"version": REPORT_VERSION, "command": command, "seed": cfg.seed, **body}
        if cfg.timing:
            report["timing"] = {"seconds": round(time.perf_counter() - start, 4)}
        _write_json(cfg.json_path, report)
    return status


if __name__ == "__main__":
    sys.exit(main())
