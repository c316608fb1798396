"""The order-reducing and order-preserving transformations.

Each operation takes a typed equation and returns a new typed equation
whose ``log`` records the rules applied.  Rule identifiers are stable
strings; human-readable references for them live in the catalog data.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from ..expr.calculus import differentiate, expand, substitute
from ..expr.equality import equal_probabilistic, is_zero, random_env
from ..expr.evaluate import EvaluationError, eval_numeric
from ..expr.nodes import (
    ONE,
    ZERO,
    Expr,
    FuncApp,
    Power,
    Product,
    Rational,
    Sum,
    Symbol,
    add,
    func,
    integral,
    map_nodes,
    power,
)
from ..expr.context import jet_name
from ..expr.printer import to_text
from ..jets import (
    JetContext,
    direction_order,
    mises_derivative,
    resolve,
    to_mises,
    total_derivative_all,
)
from .equations import (
    BacklundPair,
    BoundaryLayerEquation,
    Equation,
    EvolutionEquation,
    IntegroDiffEquation,
    LogStep,
    MisesEquation,
    OdeEquation,
    ThreeVarEquation,
    coupling,
)
from .matching import TemplateMismatch, linear_split


class SubstitutionError(ValueError):
    """A change of variables is not invertible or cannot be applied."""


# ---------------------------------------------------------------- helpers


def _terms(e: Expr) -> tuple[Expr, ...]:
    return e.terms if isinstance(e, Sum) else (e,)


def _factor_exponent(term: Expr, base: Expr) -> Expr:
    factors = term.factors if isinstance(term, Product) else (term,)
    for f in factors:
        if f == base:
            return ONE
        if isinstance(f, Power) and f.base == base:
            return f.exp
    return ZERO


def cancel_common_factor(eq: Equation, factor: Expr) -> Equation:
    """Divide both sides by ``factor`` when every term carries it explicitly.

    The equation is first brought to ``lhs - rhs`` expanded form; a term
    qualifies when ``factor`` appears with a positive rational exponent.
    The division is recorded in the log; otherwise ``eq`` is returned unchanged.
    """
    lhs, rhs = expand(eq.lhs), expand(eq.rhs)
    terms = [t for t in _terms(lhs) + _terms(rhs) if t != ZERO]
    if not terms:
        return eq
    for t in terms:
        k = _factor_exponent(t, factor)
        if not (isinstance(k, Rational) and k.value >= 1):
            return replace(eq, lhs=lhs, rhs=rhs)
    new = replace(eq, lhs=expand(lhs / factor), rhs=expand(rhs / factor))
    return new.logged("cancel-factor", f"divided by {to_text(factor)}")


def _mises_equation(lhs: Expr, rhs: Expr, ctx: JetContext, log, name: str | None = None) -> MisesEquation:
    return MisesEquation(
        lhs=expand(lhs),
        rhs=expand(rhs),
        unknown=name or ctx.mises_name,
        independents=ctx.mises_independents,
        log=tuple(log),
    )


def _rename_direction_jets(e: Expr, ctx: JetContext) -> Expr:
    """``u^(k)_x -> eta^(k-1)_x`` for the first relation of a Backlund pair."""
    table = {}
    for name in e.free_symbols:
        k = direction_order(name, ctx)
        if k:
            table[name] = Symbol(f"{ctx.mises_name}_{ctx.mises_direction * (k - 1)}" if k > 1 else ctx.mises_name)
    return substitute(e, table)


# ------------------------------------------------------- order reduction


def reduce_mises_2_1(eq: BoundaryLayerEquation) -> MisesEquation:
    """``u_x u_tx - u_t u_xx = F`` becomes ``eta eta_t = F`` in Mises variables."""
    if eq.G is not None:
        raise TemplateMismatch("equation carries G; use reduce_mises_2_5")
    ctx = eq.ctx
    eta = ctx.eta()
    out = _mises_equation(eta * ctx.eta(t=1), to_mises(eq.F, ctx), ctx,
                          eq.log + (LogStep("mises-2.1"),))
    return cancel_common_factor(out, eta)


def reduce_mises_2_5(eq: BoundaryLayerEquation) -> MisesEquation:
    """``u_x G_t - u_t G_x = F`` becomes ``eta D_t[G] = F`` in Mises variables."""
    ctx = eq.ctx
    eta = ctx.eta()
    G = to_mises(eq.generator, ctx)
    lhs = eta * mises_derivative(G, "t", ctx)
    out = _mises_equation(lhs, to_mises(eq.F, ctx), ctx, eq.log + (LogStep("mises-2.5"),))
    return cancel_common_factor(out, eta)


def reduce_mises_3var(eq: ThreeVarEquation) -> MisesEquation:
    """Three-variable Mises map: ``A -> eta eta_t``, ``B -> eta eta_x``, ``u_y^(k)`` prolonged."""
    ctx = eq.ctx
    t, x = [v for v in ctx.independents if v != ctx.mises_direction][:2]
    eta = ctx.eta()
    stray = [n for n in eq.F.free_symbols if resolve(n, ctx.source_jets) and direction_order(n, ctx) is None]
    if stray:
        raise TemplateMismatch(f"stray mixed jets outside A, B: {', '.join(sorted(stray))}")
    F = substitute(eq.F, {eq.A: eta * ctx.eta(**{t: 1}), eq.B: eta * ctx.eta(**{x: 1})})
    out = _mises_equation(to_mises(F, ctx), ZERO, ctx, eq.log + (LogStep("mises-3var"),))
    return cancel_common_factor(out, eta)


def reduce_ode_autonomous(ode: OdeEquation) -> MisesEquation:
    """``F(u, u', ..., u^(n)) = 0`` becomes an order ``n-1`` equation for ``eta(u) = u'``."""
    if ode.solved:
        raise TemplateMismatch("expected the autonomous form F(u, u', ...) = 0")
    ctx = ode.ctx
    if ctx.mises_direction in ode.expr.free_symbols:
        raise TemplateMismatch(f"explicit {ctx.mises_direction} found")
    return _mises_equation(to_mises(ode.expr, ctx), ZERO, ctx, ode.log + (LogStep("ode-reduce"),))


# --------------------------------------------------------------- RF-pairs


def _d_u(e: Expr, ctx: JetContext) -> Expr:
    return mises_derivative(e, ctx.dependent, ctx)


def rf_pair_ode(ode: OdeEquation) -> MisesEquation:
    """Solved form ``G(u, u', ...) = x`` gives ``eta d/du G(u, eta, eta eta_u, ...) = 1``."""
    if not ode.solved:
        raise TemplateMismatch("expected the solved form G(u, u', ...) = x")
    ctx = ode.ctx
    lhs = ctx.eta() * _d_u(to_mises(ode.expr, ctx), ctx)
    return _mises_equation(lhs, ONE, ctx, ode.log + (LogStep("rf-pair-ode"),))


def backlund_pair(eq: EvolutionEquation | IntegroDiffEquation) -> BacklundPair:
    """Original equation with ``u_x^(k)`` renamed ``eta_x^(k-1)``, coupled with ``u_x = eta``."""
    ctx = eq.ctx
    eta = ctx.eta()
    F = _rename_direction_jets(eq.F, ctx)
    if isinstance(eq, IntegroDiffEquation):
        rhs = F + eta * eq.integral()
        rule = "backlund-integro"
    else:
        rhs = eq.s * Symbol(ctx.mises_direction) * eta + F
        rule = "backlund"
    return BacklundPair(relation1=Equation(lhs=ctx.jet(t=1), rhs=rhs), relation2=coupling(ctx), cite=rule)


def rf_pair_evolution(eq: EvolutionEquation) -> tuple[MisesEquation, BacklundPair]:
    """``eta_t = s eta + eta^2 D_u(F/eta)`` together with the Backlund pair."""
    ctx = eq.ctx
    eta = ctx.eta()
    rhs = eq.s * eta + eta**2 * _d_u(to_mises(eq.F, ctx) / eta, ctx)
    out = _mises_equation(ctx.eta(t=1), rhs, ctx, eq.log + (LogStep("rf-pair"),))
    return out, backlund_pair(eq)


def rf_pair_integrodiff(eq: IntegroDiffEquation) -> tuple[MisesEquation, BacklundPair]:
    """``eta_t = eta^2 D_u(F/eta) + eta G`` together with the nonlocal Backlund pair."""
    ctx = eq.ctx
    eta = ctx.eta()
    rhs = eta**2 * _d_u(to_mises(eq.F, ctx) / eta, ctx) + eta * to_mises(eq.G, ctx)
    out = _mises_equation(ctx.eta(t=1), rhs, ctx, eq.log + (LogStep("rf-pair-integro"),))
    return out, backlund_pair(eq)


def rewrite_mixed_to_integro(eq: Equation, ctx: JetContext | None = None, x0: Expr = Symbol("x0")):
    """``w_tx = a(t) w w_xx + F`` with ``u = w_x``; see :func:`match_mixed`."""
    from .matching import match_mixed

    out = match_mixed(eq, ctx, x0)
    return replace(out, log=out.log + (LogStep("mixed-to-integro"),))


# ------------------------------------------------------ changes of variable


def _jet_images(target: Expr, unknown: str, new: str, independents: Sequence[str], names) -> dict[str, Expr]:
    """Images of the ``unknown`` jets named in ``names`` under ``unknown = target(new)``."""
    old_jets = {unknown: tuple(independents)}
    new_jets = {new: tuple(independents)}
    out: dict[str, Expr] = {}
    for name in names:
        hit = resolve(name, old_jets)
        if hit is None:
            continue
        _, counts = hit
        img = target
        for v, c in zip(independents, counts):
            for _ in range(c):
                img = total_derivative_all(img, v, new_jets)
        out[name] = img
    return out


def solve_for_pivot(eq: Equation, unknown: str, independents: Sequence[str]) -> Equation:
    """Solve ``eq`` for the unknown's time derivative when it enters linearly."""
    jets = {unknown: tuple(independents)}
    e = expand(eq.lhs - eq.rhs)
    pivots = [n for n in e.free_symbols if (h := resolve(n, jets)) is not None and any(h[1])]
    if "t" in independents:
        ti = list(independents).index("t")
        timed = [n for n in pivots if resolve(n, jets)[1][ti]]
        pivots = sorted(timed, key=lambda n: (sum(resolve(n, jets)[1]), n))
    else:
        pivots = []
    for p in pivots:
        try:
            a, b = linear_split(e, p)
        except TemplateMismatch:
            continue
        if is_zero(a):
            continue
        return replace(eq, lhs=Symbol(p), rhs=expand(-b / a))
    return replace(eq, lhs=expand(eq.lhs), rhs=expand(eq.rhs))


def change_dependent(eq: MisesEquation, new: str, target: Expr, old: str | None = None) -> MisesEquation:
    """Replace the unknown by ``target`` written in the new unknown ``new``.

    ``target`` is an expression in the plain symbol ``new``, e.g. ``1/zeta``
    or ``theta^(1/2)``.  Jets of the old unknown are rewritten by total
    derivatives; the result is solved again for the time derivative.
    """
    old = old or eq.unknown
    names = eq.lhs.free_symbols | eq.rhs.free_symbols
    if any(resolve(n, {new: eq.independents}) for n in names):
        raise SubstitutionError(f"{new} already appears in the equation")
    table = _jet_images(target, old, new, eq.independents, names)
    lhs = substitute(eq.lhs, table)
    rhs = substitute(eq.rhs, table)
    out = MisesEquation(lhs=lhs, rhs=rhs, unknown=new, independents=eq.independents,
                        log=eq.log + (LogStep("change-dependent", f"{old} = {to_text(target)}"),))
    return solve_for_pivot(out, new, eq.independents)


def implicit_solution_from_eta(eta_expr: Expr, u: str = "u", t: str = "t", x: str = "x",
                               lower: Expr = Symbol("u0"), dummy: str = "s") -> Equation:
    """``int(1/eta, s, u0, u) = x + phi(t)``; monomials in ``u`` are integrated in closed form."""
    integrand = substitute(ONE / eta_expr, {u: Symbol(dummy)})
    lhs = _integrate_monomial(integrand, dummy, lower, Symbol(u))
    if lhs is None:
        lhs = integral(integrand, dummy, lower, Symbol(u))
    return Equation(lhs=lhs, rhs=Symbol(x) + func("phi", [Symbol(t)]),
                    log=(LogStep("implicit-solution"),))


def _integrate_monomial(e: Expr, var: str, lo: Expr, hi: Expr) -> Expr | None:
    v = Symbol(var)
    k = _factor_exponent(e, v) if e != v else ONE
    coeff = expand(e / power(v, k)) if k != ZERO else e
    if var in coeff.free_symbols or not isinstance(k, Rational) or k.value == -1:
        return None
    k1 = k.value + 1
    return expand(coeff * (power(hi, k1) - power(lo, k1)) / Rational(k1))


# --------------------------------------------------------- classification


@dataclass(frozen=True)
class Linearity:
    kind: str
    coefficients: Mapping[str, Expr] = field(default_factory=dict)

    def __str__(self) -> str:
        return self.kind


def classify_linear(eq: Equation, unknown: str, independents: Sequence[str] = ("t", "u")) -> Linearity:
    """``linear``, ``quasilinear`` or ``fully nonlinear`` in the unknown and its jets.

    Linear: every term has total degree at most one in the unknown's jets.
    Quasilinear: the highest-order jets enter linearly with coefficients free of the
    unknown; lower-order jets may enter nonlinearly.  Anything else, including
    non-polynomial dependence, is fully nonlinear.  For linear equations the
    coefficient of each jet (and of ``1``) is returned.
    """
    jets = {unknown: tuple(independents)}
    e = expand(eq.lhs - eq.rhs)

    def is_jet(name: str) -> bool:
        return resolve(name, jets) is not None

    def order(name: str) -> int:
        return sum(resolve(name, jets)[1])

    degrees: list[dict[str, int]] = []
    for term in _terms(e):
        powers: dict[str, int] = {}
        for f in term.factors if isinstance(term, Product) else (term,):
            base, k = (f.base, f.exp) if isinstance(f, Power) else (f, ONE)
            if isinstance(base, Symbol) and is_jet(base.name):
                if not (isinstance(k, Rational) and k.is_integer and k.value > 0):
                    return Linearity("fully nonlinear")
                powers[base.name] = powers.get(base.name, 0) + int(k.value)
            elif any(is_jet(n) for n in f.free_symbols):
                return Linearity("fully nonlinear")
        degrees.append(powers)

    if all(sum(p.values()) <= 1 for p in degrees):
        coeffs: dict[str, list[Expr]] = {}
        for term, p in zip(_terms(e), degrees):
            key = next(iter(p), "1")
            coeffs.setdefault(key, []).append(term if key == "1" else expand(term / Symbol(key)))
        return Linearity("linear", {k: add(*v) for k, v in sorted(coeffs.items())})
    top = max((order(n) for p in degrees for n in p), default=0)
    for p in degrees:
        highest = [n for n in p if order(n) == top]
        if not highest:
            continue
        if len(highest) > 1 or p[highest[0]] > 1 or len(p) > 1:
            return Linearity("fully nonlinear")
    return Linearity("quasilinear")


# ---------------------------------------------------- equation comparison


def _jet_like(name: str) -> bool:
    return "_" in name


def _pivot_order(name: str) -> tuple:
    suffix = name.partition("_")[2]
    return ("t" in suffix, len(suffix), name)


def equations_equivalent(a: Equation, b: Equation, trials: int = 12, tol: float = 1e-9, rng=None) -> bool:
    """Probabilistic equivalence of two equations up to a nonzero factor.

    A jet ``p`` entering both equations linearly is used as a pivot: with
    ``a = A p + B`` and ``b = A' p + B'``, the equations agree when
    ``B A' = B' A`` and neither ``A`` nor ``A'`` vanishes.  Without a common
    linear jet the residuals are compared directly.
    """
    ea, eb = expand(a.lhs - a.rhs), expand(b.lhs - b.rhs)
    common = sorted((ea.free_symbols & eb.free_symbols), key=_pivot_order, reverse=True)
    for p in (n for n in common if _jet_like(n)):
        try:
            A, B = linear_split(ea, p)
            A2, B2 = linear_split(eb, p)
        except TemplateMismatch:
            continue
        if is_zero(A, rng=rng) or is_zero(A2, rng=rng):
            continue
        return equal_probabilistic(B * A2, B2 * A, trials=trials, tol=tol, rng=rng)
    return equal_probabilistic(ea, eb, trials=trials, tol=tol, rng=rng)


def integro_equivalent(a: IntegroDiffEquation, b: IntegroDiffEquation, trials: int = 12, tol: float = 1e-9, rng=None) -> bool:
    return (
        equal_probabilistic(a.F, b.F, trials=trials, tol=tol, rng=rng)
        and equal_probabilistic(a.G, b.G, trials=trials, tol=tol, rng=rng)
        and equal_probabilistic(a.x0, b.x0, trials=trials, tol=tol, rng=rng)
    )


# ---------------------------------------------- substitutions of section 7


@dataclass(frozen=True)
class Substitution:
    """``old = new(xi_1, xi_2, ...)`` with each ``xi_i`` defined in the old variables.

    ``side_relations`` maps derivatives of auxiliary functions (e.g.
    ``phi'(t)``) to expressions; they are applied as rewrite rules after
    every differentiation.
    """

    old: str
    new: str
    old_independents: tuple[str, ...]
    new_independents: tuple[str, ...]
    definitions: Mapping[str, Expr]
    side_relations: tuple[tuple[Expr, Expr], ...] = ()
    outer: Expr | None = None


def _apply_relations(e: Expr, relations) -> Expr:
    if not relations:
        return e
    table = {}
    for lhs, rhs in relations:
        table[lhs] = rhs

    def fn(node: Expr) -> Expr:
        if not isinstance(node, FuncApp) or not any(node.derivs):
            return node
        hit = table.get(node)
        if hit is not None:
            return hit
        for lhs, rhs in relations:
            if (isinstance(lhs, FuncApp) and lhs.name == node.name and lhs.args == node.args
                    and all(d >= k for d, k in zip(node.derivs, lhs.derivs))):
                extra = [d - k for d, k in zip(node.derivs, lhs.derivs)]
                out = rhs
                for arg, k in zip(node.args, extra):
                    for _ in range(k):
                        if not isinstance(arg, Symbol):
                            return node
                        out = _apply_relations(differentiate(out, arg.name), relations)
                return out
        return node

    prev = None
    while prev != e:
        prev, e = e, map_nodes(e, fn)
    return e


def _chain_derivative(e: Expr, v: str, sub: Substitution, jets) -> Expr:
    """Derivative in the old variable ``v`` of an expression in new-unknown jets and old variables."""
    out = differentiate(e, v)
    for name in sorted(e.free_symbols):
        hit = resolve(name, jets)
        if hit is None:
            continue
        dep, counts = hit
        de = differentiate(e, name)
        if de == ZERO:
            continue
        for i, nv in enumerate(sub.new_independents):
            dxi = _apply_relations(differentiate(sub.definitions[nv], v), sub.side_relations)
            if dxi == ZERO:
                continue
            promoted = list(counts)
            promoted[i] += 1
            out = out + de * Symbol(jet_name(dep, promoted, sub.new_independents)) * dxi
    return _apply_relations(out, sub.side_relations)


def apply_substitution(eq: Equation, sub: Substitution) -> Equation:
    """Rewrite ``eq`` (in jets of ``sub.old``) in jets of ``sub.new`` over the new variables."""
    old_jets = {sub.old: sub.old_independents}
    new_jets = {sub.new: sub.new_independents}
    base = Symbol(sub.new) if sub.outer is None else sub.outer
    table = {}
    for name in eq.lhs.free_symbols | eq.rhs.free_symbols:
        hit = resolve(name, old_jets)
        if hit is None:
            continue
        _, counts = hit
        img = base
        for v, c in zip(sub.old_independents, counts):
            for _ in range(c):
                img = _chain_derivative(img, v, sub, new_jets)
        table[name] = expand(img)
    return Equation(lhs=expand(substitute(eq.lhs, table)), rhs=expand(substitute(eq.rhs, table)),
                    log=eq.log + (LogStep("substitution", f"{sub.old} = {sub.new}({', '.join(sub.new_independents)})"),))


def check_invertible(sub: Substitution, rng=None) -> None:
    defs = [sub.definitions[v] for v in sub.new_independents]
    rows = [[_apply_relations(differentiate(d, v), sub.side_relations) for v in sub.old_independents] for d in defs]
    gen = np.random.default_rng(0 if rng is None else rng)
    flat = [c for row in rows for c in row]
    for _ in range(20):
        env = random_env(flat, gen)
        try:
            J = np.array([[float(eval_numeric(c, env)) for c in row] for row in rows])
        except EvaluationError:
            continue
        if np.linalg.matrix_rank(J) == len(defs):
            return
    raise SubstitutionError("substitution is not invertible on the declared variables (Jacobian rank deficient)")


@dataclass(frozen=True)
class SubstitutionReport:
    passed: bool
    transformed: Equation
    notes: str = ""

    def __bool__(self) -> bool:
        return self.passed


def verify_substitution(eq: Equation, sub: Substitution, expected: Equation,
                        trials: int = 12, tol: float = 1e-9, rng=None) -> SubstitutionReport:
    """Does ``eq`` become ``expected`` (up to a nonzero factor) under ``sub``?"""
    check_invertible(sub, rng)
    transformed = apply_substitution(eq, sub)
    ok = equations_equivalent(transformed, expected, trials=trials, tol=tol, rng=rng)
    return SubstitutionReport(ok, transformed)


def identity_substitution(unknown: str, independents: Sequence[str]) -> Substitution:
    return Substitution(unknown, unknown, tuple(independents), tuple(independents),
                        {v: Symbol(v) for v in independents})


__all__ = [
    "Linearity", "Substitution", "SubstitutionError", "SubstitutionReport", "apply_substitution",
    "backlund_pair", "cancel_common_factor", "change_dependent", "check_invertible", "classify_linear",
    "equations_equivalent", "identity_substitution", "implicit_solution_from_eta", "integro_equivalent",
    "reduce_mises_2_1", "reduce_mises_2_5", "reduce_mises_3var", "reduce_ode_autonomous",
    "rewrite_mixed_to_integro", "rf_pair_evolution", "rf_pair_integrodiff", "rf_pair_ode",
    "solve_for_pivot", "verify_substitution",
]
