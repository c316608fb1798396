"""Jet-space bookkeeping and the Mises prolongation.

A jet variable is a plain symbol such as ``u_tx``; which symbols are jets is
decided by a ``{dependent: independents}`` table.  Total derivatives act on
expressions by differentiating explicit occurrences of the independent
variable and promoting every jet symbol one order in that direction.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

from .expr.calculus import differentiate, substitute
from .expr.context import Context, jet_name, split_suffix
from .expr.nodes import Expr, FuncApp, Integral, Symbol, add, map_nodes, mul


class JetOrderWarning(UserWarning):
    """A total derivative produced a jet above the context's declared order."""


class MisesError(ValueError):
    """An expression cannot be carried to Mises variables."""


def resolve(name: str, jets: Mapping[str, tuple[str, ...]]) -> tuple[str, tuple[int, ...]] | None:
    """Split a jet symbol into ``(dependent, counts)``; ``None`` for non-jets."""
    if name in jets:
        return name, (0,) * len(jets[name])
    dep, sep, suffix = name.partition("_")
    if not sep or dep not in jets or not suffix:
        return None
    counts = split_suffix(suffix, jets[dep])
    return None if counts is None else (dep, counts)


def jetify(e: Expr, jets: Mapping[str, tuple[str, ...]]) -> Expr:
    """Turn applications ``u(t,x)`` at the declared independents into jet symbols."""

    def fn(node: Expr) -> Expr:
        if isinstance(node, FuncApp) and node.name in jets:
            indeps = jets[node.name]
            if node.args == tuple(Symbol(v) for v in indeps):
                return Symbol(jet_name(node.name, node.derivs, indeps))
        return node

    return map_nodes(e, fn)


def dejetify(e: Expr, jets: Mapping[str, tuple[str, ...]], at: Mapping[str, Expr]) -> Expr:
    """Inverse of :func:`jetify` with some independents renamed, e.g. ``x -> z``."""
    table = {}
    for name in e.free_symbols:
        hit = resolve(name, jets)
        if hit is None:
            continue
        dep, counts = hit
        args = [at.get(v, Symbol(v)) for v in jets[dep]]
        table[name] = FuncApp(dep, tuple(args), counts)
    return substitute(e, table)


def total_derivative_all(
    e: Expr, v: str, jets: Mapping[str, tuple[str, ...]], max_order: int | None = None
) -> Expr:
    """``D_v e`` for every dependent variable in ``jets`` whose independents include ``v``."""
    parts = [differentiate(e, v)]
    for name in sorted(e.free_symbols):
        hit = resolve(name, jets)
        if hit is None or name == v:
            continue
        dep, counts = hit
        indeps = jets[dep]
        if v not in indeps:
            continue
        de = differentiate(e, name)
        if de == 0:
            continue
        promoted = list(counts)
        promoted[indeps.index(v)] += 1
        if max_order is not None and sum(promoted) > max_order:
            warnings.warn(
                f"jet {jet_name(dep, promoted, indeps)} exceeds declared order {max_order}",
                JetOrderWarning,
                stacklevel=2,
            )
        parts.append(mul(Symbol(jet_name(dep, promoted, indeps)), de))
    return jetify(add(*parts), jets)


@dataclass(frozen=True)
class JetContext:
    """Independent variables, unknown, and the direction the Mises map acts along.

    ``mises_independents`` replaces the Mises direction by the unknown: the
    field ``u(t, x)`` becomes ``eta(t, u)``, and ``u(t, x, y)`` with
    direction ``y`` becomes ``eta(t, x, u)``.
    """

    independents: tuple[str, ...] = ("t", "x")
    dependent: str = "u"
    order: int = 12
    mises_direction: str = "x"
    mises_name: str = "eta"

    def __post_init__(self):
        if self.mises_direction not in self.independents:
            raise ValueError(f"Mises direction {self.mises_direction!r} is not an independent variable")
        if self.order < 1:
            raise ValueError("jet order must be at least 1")

    @property
    def mises_independents(self) -> tuple[str, ...]:
        return tuple(self.dependent if v == self.mises_direction else v for v in self.independents)

    @property
    def source_jets(self) -> dict[str, tuple[str, ...]]:
        return {self.dependent: self.independents}

    @property
    def target_jets(self) -> dict[str, tuple[str, ...]]:
        return {self.mises_name: self.mises_independents}

    def jet(self, **counts: int) -> Symbol:
        return Symbol(jet_name(self.dependent, [counts.get(v, 0) for v in self.independents], self.independents))

    def direction_jet(self, k: int) -> Symbol:
        """``u`` differentiated ``k`` times along the Mises direction."""
        return self.jet(**{self.mises_direction: k})

    def eta(self, **counts: int) -> Symbol:
        ind = self.mises_independents
        return Symbol(jet_name(self.mises_name, [counts.get(v, 0) for v in ind], ind))

    def with_mises_name(self, name: str) -> JetContext:
        return JetContext(self.independents, self.dependent, self.order, self.mises_direction, name)

    def source_context(self, base: Context) -> Context:
        """Parsing context for equations in the original variables."""
        return base.with_jets(**{self.dependent: self.independents})

    def target_context(self, base: Context) -> Context:
        """Parsing context for Mises-side equations: the unknown becomes a plain variable."""
        jets = {k: v for k, v in base.jets.items() if self.dependent in v}
        jets[self.mises_name] = self.mises_independents
        syms = set(base.symbols) | {self.dependent}
        return Context.build(syms, dict(base.functions), jets)


def total_derivative(e: Expr, direction: str, ctx: JetContext) -> Expr:
    """Total derivative of a jet expression in the original variables."""
    return total_derivative_all(e, direction, ctx.source_jets, ctx.order)


def mises_derivative(e: Expr, direction: str, ctx: JetContext) -> Expr:
    """Total derivative of a Mises-side expression, ``eta`` depending on the Mises independents."""
    return total_derivative_all(e, direction, ctx.target_jets, ctx.order)


def mises_prolong(k: int, ctx: JetContext | None = None) -> Expr:
    """Mises image of the k-th derivative of the unknown along the Mises direction."""
    return _prolong(k, ctx or JetContext())


@lru_cache(maxsize=256)
def _prolong(k: int, ctx: JetContext) -> Expr:
    if k < 1:
        raise ValueError("prolongation order must be at least 1")
    if k == 1:
        return ctx.eta()
    return mul(ctx.eta(), mises_derivative(_prolong(k - 1, ctx), ctx.dependent, ctx))


def direction_order(name: str, ctx: JetContext) -> int | None:
    """k if ``name`` is the k-th pure Mises-direction jet of the unknown, else ``None``."""
    hit = resolve(name, ctx.source_jets)
    if hit is None:
        return None
    _, counts = hit
    d = ctx.independents.index(ctx.mises_direction)
    if any(c for i, c in enumerate(counts) if i != d):
        return None
    return counts[d]


def to_mises(e: Expr, ctx: JetContext | None = None) -> Expr:
    """Rewrite pure Mises-direction jets of the unknown in terms of ``eta`` and its u-derivatives."""
    ctx = ctx or JetContext()
    if ctx.mises_direction in e.free_symbols:
        raise MisesError(f"explicit {ctx.mises_direction} cannot be carried to Mises variables")
    if any(isinstance(n, Integral) for n in e.walk()):
        raise MisesError("integral terms must be handled at the equation level")
    table = {}
    for name in e.free_symbols:
        if resolve(name, ctx.source_jets) is None:
            continue
        k = direction_order(name, ctx)
        if k is None:
            raise MisesError(f"jet {name} has no pointwise Mises image")
        if k:
            table[name] = mises_prolong(k, ctx)
    return substitute(e, table)


def jet_order(e: Expr, jets: Mapping[str, tuple[str, ...]], dep: str) -> int:
    """Highest total derivative order of ``dep`` appearing in ``e`` (-1 when absent)."""
    best = -1
    for name in e.free_symbols:
        hit = resolve(name, jets)
        if hit is not None and hit[0] == dep:
            best = max(best, sum(hit[1]))
    return best
