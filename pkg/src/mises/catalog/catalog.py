"""Load the golden catalog and replay its recipes through the engine."""

from __future__ import annotations

import time
from fractions import Fraction
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from ..expr import Context, default_context, instantiate, parse, parse_equation, substitute
from ..expr.equality import DEFAULT_SEED, DEFAULT_TOL, DEFAULT_TRIALS
from ..expr.nodes import ZERO, Rational, Sum, add, mul
from ..jets import JetContext
from ..transform import (
    BacklundPair,
    Equation,
    MisesEquation,
    Substitution,
    apply_substitution,
    change_dependent,
    check_invertible,
    classify_linear,
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

FRAMES = {
    "evolution": lambda: JetContext(),
    "boundary-layer": lambda: JetContext(),
    "three-var": lambda: JetContext(("t", "x", "y"), "u", mises_direction="y"),
    "ode": lambda: JetContext(("x",), "u", mises_direction="x"),
}


class CatalogError(ValueError):
    """Malformed catalog data or an unknown entry id."""


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    section: int
    cite: str
    frame: str
    input: str
    recipe: tuple
    expected: str
    tags: tuple[str, ...] = ()
    linear: Mapping[str, str] | None = None
    specializations: tuple = ()
    declare: Mapping[str, Any] | None = None
    notes: str = ""

    def summary(self) -> dict:
        return {"id": self.id, "section": self.section, "cite": self.cite, "tags": list(self.tags)}


@dataclass(frozen=True)
class Catalog:
    version: int
    rules: Mapping[str, str]
    entries: tuple[CatalogEntry, ...]

    def get(self, entry_id: str) -> CatalogEntry:
        for e in self.entries:
            if e.id == entry_id:
                return e
        raise CatalogError(f"unknown catalog entry {entry_id!r}")


def load_catalog(path: str | Path | None = None) -> Catalog:
    if path is None:
        text = resources.files("mises.catalog").joinpath("data/catalog.yaml").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    data = yaml.safe_load(text) or {}
    entries = []
    for raw in data.get("entries") or ():
        missing = {"id", "input", "recipe", "expected"} - raw.keys()
        if missing:
            raise CatalogError(f"entry {raw.get('id', '?')} lacks {', '.join(sorted(missing))}")
        if raw.get("frame", "evolution") not in FRAMES:
            raise CatalogError(f"entry {raw['id']}: unknown frame {raw.get('frame')!r}")
        entries.append(CatalogEntry(
            id=raw["id"], section=int(raw.get("section", 0)), cite=raw.get("cite", ""),
            frame=raw.get("frame", "evolution"), input=raw["input"], recipe=tuple(raw["recipe"]),
            expected=raw["expected"], tags=tuple(raw.get("tags") or ()), linear=raw.get("linear"),
            specializations=tuple(raw.get("specializations") or ()), declare=raw.get("declare"),
            notes=raw.get("notes", ""),
        ))
    ids = [e.id for e in entries]
    if len(set(ids)) != len(ids):
        raise CatalogError("duplicate entry ids")
    entries.sort(key=lambda e: e.id)
    return Catalog(int(data.get("version", 1)), dict(data.get("rules") or {}), tuple(entries))


def list_entries(catalog: Catalog | None = None, section: int | str | None = None,
                 tag: str | None = None) -> list[CatalogEntry]:
    """Entries sorted by id, optionally filtered by section (``4`` or ``"§4"``) and tag."""
    catalog = catalog or load_catalog()
    out = list(catalog.entries)
    if section is not None:
        sec = int(str(section).lstrip("§"))
        out = [e for e in out if e.section == sec]
    if tag is not None:
        out = [e for e in out if tag in e.tags]
    return out


# ------------------------------------------------------------- running


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class EntryReport:
    id: str
    cite: str
    passed: bool
    checks: list[CheckResult] = field(default_factory=list)
    log: list[dict] = field(default_factory=list)
    actual: str = ""
    expected: str = ""
    backlund: list[str] = field(default_factory=list)
    seconds: float = 0.0
    error: str = ""

    @property
    def status(self) -> str:
        if self.error:
            return "error"
        return "pass" if self.passed else "fail"

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "id": self.id, "cite": self.cite, "status": self.status,
            "checks": [{"name": c.name, "passed": c.passed, **({"detail": c.detail} if c.detail else {})}
                       for c in self.checks],
            "log": self.log, "actual": self.actual, "expected": self.expected,
        }
        if self.backlund:
            out["backlund"] = self.backlund
        if self.error:
            out["error"] = self.error
        if timing:
            out["seconds"] = round(self.seconds, 4)
        return out


@dataclass(frozen=True)
class RunOptions:
    seed: int = DEFAULT_SEED
    trials: int = DEFAULT_TRIALS
    tol: float = DEFAULT_TOL
    negative_controls: bool = True


class _Runner:
    def __init__(self, entry: CatalogEntry, options: RunOptions, rules: Mapping[str, str]):
        self.entry = entry
        self.options = options
        self.rules = rules
        self.rng = np.random.default_rng([options.seed, zlib.crc32(entry.id.encode())])
        self.ctx = FRAMES[entry.frame]()
        base = default_context()
        self.source = self.ctx.source_context(base)
        target = self.ctx.target_context(base)
        if entry.declare:
            d = entry.declare
            target = target.merged(Context.build(d.get("symbols", ()), d.get("functions", ()),
                                                 {k: tuple(v) for k, v in (d.get("jets") or {}).items()}))
        self.target = target
        self.checks: list[CheckResult] = []
        self.backlund: list[str] = []
        self.special = None
        self.label = ""

    # parsing helpers
    def equation(self, text: str, context: Context) -> Equation:
        lhs, rhs = parse_equation(text, context)
        return Equation(lhs=lhs, rhs=rhs)

    def same(self, actual: Equation, expected: Equation) -> bool:
        o = self.options
        return equations_equivalent(actual, expected, trials=o.trials, tol=o.tol, rng=self.rng)

    # recipe execution
    def run_recipe(self, eq: Equation, recipe) -> Equation:
        state: Any = eq
        for step in recipe:
            op, params = (step, {}) if isinstance(step, str) else (step["op"], {k: v for k, v in step.items() if k != "op"})
            state = self.apply(op, params, state)
        return state

    def apply(self, op: str, params: dict, state):
        ctx = self.ctx
        if op == "match_evolution":
            return match_evolution(state, ctx)
        if op == "match_boundary_layer":
            G = parse(params["G"], self.source) if "G" in params else None
            return match_boundary_layer(state, ctx, G)
        if op == "match_three_var":
            return match_three_var(state, ctx)
        if op == "match_integro":
            return match_integro(state, ctx)
        if op == "match_ode":
            return match_ode(state, ctx, solved=bool(params.get("solved", False)))
        if op == "rewrite_mixed_to_integro":
            return rewrite_mixed_to_integro(state, ctx)
        if op in ("rf_pair_evolution", "rf_pair_integrodiff"):
            fn = rf_pair_evolution if op == "rf_pair_evolution" else rf_pair_integrodiff
            out, pair = fn(state)
            self.backlund = _pair_text(pair)
            return out
        simple = {
            "reduce_mises_2_1": reduce_mises_2_1, "reduce_mises_2_5": reduce_mises_2_5,
            "reduce_mises_3var": reduce_mises_3var, "reduce_ode_autonomous": reduce_ode_autonomous,
            "rf_pair_ode": rf_pair_ode,
        }
        if op in simple:
            return simple[op](state)
        if op == "change_dependent":
            target = parse(params["target"], self.target.with_symbols(params["new"]))
            return change_dependent(state, params["new"], target)
        if op == "substitution":
            return self.substitution(state, params)
        if op == "check":
            expected = self.equation(params["expected"], self.target)
            if self.special:
                expected = Equation(lhs=self.special(expected.lhs), rhs=self.special(expected.rhs))
            name = f"{self.label}intermediate: {params['expected']}"
            self.checks.append(CheckResult(name, self.same(state, expected)))
            return state
        raise CatalogError(f"unknown recipe op {op!r}")

    def substitution(self, state: MisesEquation, params: dict) -> Equation:
        variables = tuple(params["variables"])
        defs = {v: parse(params["definitions"][v], self.target) for v in variables}
        relations = tuple((parse(a, self.target), parse(b, self.target)) for a, b in params.get("relations", ()))
        sub = Substitution(state.unknown, params["new"], tuple(state.independents), variables, defs, relations)
        check_invertible(sub, self.rng)
        return apply_substitution(state, sub)

    def linear_check(self, eq: Equation, spec: Mapping[str, str], label: str) -> None:
        unknown = spec["unknown"]
        if spec.get("via"):
            eq = change_dependent(eq, unknown, parse(spec["via"], self.target.with_symbols(unknown)))
        independents = getattr(eq, "independents", self.ctx.mises_independents)
        kind = classify_linear(eq, unknown, independents).kind
        self.checks.append(CheckResult(f"{label}linear in {unknown}", kind == "linear", kind))

    def run(self) -> tuple[Equation, Equation]:
        entry = self.entry
        eq = self.equation(entry.input, self.source)
        actual = self.run_recipe(eq, entry.recipe)
        expected = self.equation(entry.expected, self.target)
        self.checks.append(CheckResult("expected", self.same(actual, expected)))
        if entry.linear:
            self.linear_check(actual, entry.linear, "")
        for spec in entry.specializations:
            self.specialize(eq, spec)
        if self.options.negative_controls:
            flipped = sign_flipped(expected)
            self.checks.append(CheckResult("negative control (sign-flipped expected)", not self.same(actual, flipped)))
        return actual, expected

    def specialize(self, eq: Equation, spec: Mapping[str, Any]) -> None:
        label = spec.get("label", "specialization")
        if "input" in spec:
            eq = self.equation(spec["input"], self.source)
        bind = {k: _number(v) for k, v in (spec.get("bind") or {}).items()}
        defs = {}
        for name, (params, body) in (spec.get("define") or {}).items():
            defs[name] = (tuple(params), parse(body, self.source.with_symbols(*params)))

        def special(e):
            if defs:
                e = instantiate(e, defs)
            return substitute(e, bind) if bind else e

        eq = Equation(lhs=special(eq.lhs), rhs=special(eq.rhs))
        self.special, self.label = special, f"specialization {label}: "
        try:
            actual = self.run_recipe(eq, spec.get("recipe") or self.entry.recipe)
        finally:
            self.special, self.label = None, ""
        expected = self.equation(spec["expected"], self.target)
        self.checks.append(CheckResult(f"specialization {label}", self.same(actual, expected)))
        if spec.get("linear"):
            self.linear_check(actual, spec["linear"], f"specialization {label}: ")


def _number(v) -> Rational:
    return Rational(Fraction(str(v)))


def _pair_text(pair: BacklundPair) -> list[str]:
    return [pair.relation1.text(), pair.relation2.text()]


def sign_flipped(eq: Equation) -> Equation:
    """Negate the right-hand side, or the last term of the left-hand side when the right one is zero."""
    if eq.rhs != ZERO:
        return Equation(lhs=eq.lhs, rhs=mul(-1, eq.rhs))
    if not isinstance(eq.lhs, Sum):
        raise CatalogError(f"cannot build a sign-flipped control for {eq.text()}")
    *rest, last = eq.lhs.terms
    return Equation(lhs=add(*rest, mul(-1, last)))


def run_entry(entry: CatalogEntry | str, options: RunOptions | None = None,
              catalog: Catalog | None = None) -> EntryReport:
    """Replay one entry and compare with its expected output and all attached checks."""
    catalog = catalog or load_catalog()
    if isinstance(entry, str):
        entry = catalog.get(entry)
    options = options or RunOptions()
    runner = _Runner(entry, options, catalog.rules)
    start = time.perf_counter()
    report = EntryReport(entry.id, entry.cite, False, expected=entry.expected)
    try:
        actual, _ = runner.run()
        report.actual = actual.text()
        report.log = [{"rule": s.rule, "cite": catalog.rules.get(s.rule, ""), **({"detail": s.detail} if s.detail else {})}
                      for s in actual.log]
    except Exception as err:  # surfaced in the report; the run continues with other entries
        report.error = f"{type(err).__name__}: {err}"
    report.checks = runner.checks
    report.backlund = runner.backlund
    report.passed = not report.error and bool(report.checks) and all(c.passed for c in report.checks)
    report.seconds = time.perf_counter() - start
    return report


@dataclass
class AggregateReport:
    seed: int
    entries: list[EntryReport]
    seconds: float = 0.0

    @property
    def passed(self) -> int:
        return sum(e.passed for e in self.entries)

    @property
    def total(self) -> int:
        return len(self.entries)

    @property
    def ok(self) -> bool:
        return self.passed == self.total


def _run_one(args) -> EntryReport:
    entry, options, catalog = args
    return run_entry(entry, options, catalog)


def run_all(catalog: Catalog | None = None, parallelism: int = 1, options: RunOptions | None = None,
            ids=None) -> AggregateReport:
    """Run every entry (or ``ids``); results are ordered by id whatever the parallelism."""
    catalog = catalog or load_catalog()
    options = options or RunOptions()
    entries = [catalog.get(i) for i in ids] if ids else list(catalog.entries)
    start = time.perf_counter()
    jobs = [(e, options, catalog) for e in entries]
    if parallelism > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            reports = list(pool.map(_run_one, jobs))
    else:
        reports = [_run_one(j) for j in jobs]
    reports.sort(key=lambda r: r.id)
    return AggregateReport(options.seed, reports, time.perf_counter() - start)
