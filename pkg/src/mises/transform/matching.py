"""Recognize free-form equations as instances of the typed templates.

Every matcher moves the equation to one side, isolates the distinguished
combination of the template (``u_t``, the boundary-layer bracket, the mixed
derivative ``w_tx`` or the placeholders ``A``/``B``), and then checks the
remainder against the template's argument list.  Independence of a
variable is decided by a randomized zero test of the partial derivative,
so expressions that cancel only after simplification still match.
"""

from __future__ import annotations

from ..expr.calculus import differentiate, expand, substitute
from ..expr.equality import is_zero
from ..expr.nodes import ONE, ZERO, Expr, Integral, Symbol, map_nodes, mul
from ..expr.printer import to_text
from ..jets import JetContext, direction_order, jetify, resolve, total_derivative
from .equations import (
    BoundaryLayerEquation,
    Equation,
    EvolutionEquation,
    IntegroDiffEquation,
    OdeEquation,
    ThreeVarEquation,
)


class TemplateMismatch(ValueError):
    """The equation does not have the shape the transformation requires."""


def linear_split(e: Expr, p: str) -> tuple[Expr, Expr]:
    """Write ``e = A*p + B``; raises if ``e`` is not affine in ``p``."""
    dp = differentiate(e, p)
    if p in dp.free_symbols and not is_zero(differentiate(dp, p)):
        raise TemplateMismatch(f"equation is not linear in {p}")
    a = substitute(dp, {p: ZERO}) if p in dp.free_symbols else dp
    b = substitute(e, {p: ZERO})
    return a, b


def eliminate(e: Expr, names, what: str) -> Expr:
    """Drop variables ``e`` provably does not depend on; complain about the others."""
    table = {}
    for name in sorted(set(names) & e.free_symbols):
        if not is_zero(differentiate(e, name)):
            raise TemplateMismatch(f"{what} depends on {name}")
        table[name] = ONE
    return expand(substitute(e, table)) if table else e


def _source_jets_in(e: Expr, ctx: JetContext) -> list[str]:
    return sorted(n for n in e.free_symbols if resolve(n, ctx.source_jets) is not None)


def _non_direction_jets(e: Expr, ctx: JetContext) -> list[str]:
    return [n for n in _source_jets_in(e, ctx) if direction_order(n, ctx) is None]


def _check_nonzero(e: Expr, what: str) -> None:
    if is_zero(e):
        raise TemplateMismatch(f"{what} vanishes identically")


def match_evolution(eq: Equation, ctx: JetContext | None = None) -> EvolutionEquation:
    """``u_t = s(t) x u_x + F(t, u, u_x, ...)``."""
    ctx = ctx or JetContext()
    e = eq.residual
    if any(isinstance(n, Integral) for n in e.walk()):
        raise TemplateMismatch("nonlocal term present; use the integro-differential form")
    ut = ctx.jet(t=1).name
    if ut not in e.free_symbols:
        raise TemplateMismatch(f"no {ut} term")
    a, b = linear_split(e, ut)
    _check_nonzero(a, f"coefficient of {ut}")
    rhs = expand(-b / a)
    x = ctx.mises_direction
    ux = ctx.direction_jet(1)
    s = expand(differentiate(rhs, x) / ux)
    jets = _source_jets_in(s, ctx)
    try:
        s = eliminate(s, [x, *jets], "the coefficient of x*u_x")
    except TemplateMismatch as err:
        raise TemplateMismatch(f"explicit {x} in F is not of the form u_t = s(t)*x*u_x + F: {err}") from None
    F = expand(rhs - mul(s, Symbol(x), ux))
    try:
        F = eliminate(F, [x], "F")
    except TemplateMismatch:
        raise TemplateMismatch(f"explicit {x} in F is not of the form u_t = s(t)*x*u_x + F") from None
    bad = _non_direction_jets(F, ctx)
    if bad:
        raise TemplateMismatch(f"F contains {', '.join(bad)}")
    return EvolutionEquation(F=F, s=s, ctx=ctx, log=eq.log)


def bracket(G: Expr, ctx: JetContext) -> Expr:
    """``u_x D_t G - u_t D_x G`` for the Mises direction ``x``."""
    ux, ut = ctx.direction_jet(1), ctx.jet(t=1)
    return expand(ux * total_derivative(G, "t", ctx) - ut * total_derivative(G, ctx.mises_direction, ctx))


def match_boundary_layer(eq: Equation, ctx: JetContext | None = None, G: Expr | None = None) -> BoundaryLayerEquation:
    """``u_x G_t - u_t G_x = F(t, u, u_x, ...)``; ``G`` defaults to ``u_x``."""
    ctx = ctx or JetContext()
    gen = ctx.direction_jet(1) if G is None else G
    bad = _non_direction_jets(gen, ctx)
    if bad or ctx.mises_direction in gen.free_symbols:
        raise TemplateMismatch(f"G must depend on t, u and x-derivatives only, found {bad or ctx.mises_direction}")
    m = max(direction_order(n, ctx) or 0 for n in _source_jets_in(gen, ctx) or [ctx.dependent])
    if m < 1:
        raise TemplateMismatch("G must contain a derivative of the unknown")
    pivot = ctx.jet(t=1, **{ctx.mises_direction: m}).name
    e = expand(eq.residual)
    brk = bracket(gen, ctx)
    de = differentiate(e, pivot)
    dI = differentiate(brk, pivot)
    lam = expand(de / dI)
    _check_nonzero(lam, f"coefficient of {pivot}")
    F = expand(brk - e / lam)
    t_jets = _non_direction_jets(F, ctx)
    F = eliminate(F, t_jets + [ctx.mises_direction], "F")
    return BoundaryLayerEquation(F=F, G=G, ctx=ctx, log=eq.log)


def match_three_var(eq: Equation, ctx: JetContext | None = None) -> ThreeVarEquation:
    """Collect ``u_y u_ty - u_t u_yy`` and ``u_y u_xy - u_x u_yy`` into placeholders ``A`` and ``B``."""
    ctx = ctx or JetContext(("t", "x", "y"), "u", mises_direction="y")
    t, x = [v for v in ctx.independents if v != ctx.mises_direction][:2]
    y = ctx.mises_direction
    uy, uyy = ctx.direction_jet(1), ctx.direction_jet(2)
    combos = {
        "A": (ctx.jet(**{t: 1}), ctx.jet(**{t: 1, y: 1})),
        "B": (ctx.jet(**{x: 1}), ctx.jet(**{x: 1, y: 1})),
    }
    e = expand(eq.residual)
    rest = e
    F = ZERO
    for placeholder, (first, mixed) in combos.items():
        coef = expand(differentiate(e, mixed.name) / uy)
        rest = rest - coef * (uy * mixed - first * uyy)
        F = F + coef * Symbol(placeholder)
    rest = expand(rest)
    stray = _non_direction_jets(rest, ctx)
    rest = eliminate(rest, stray, "the remainder outside the mixed combinations")
    stray = _non_direction_jets(F, ctx)
    F = eliminate(expand(F), stray, "the coefficients of the mixed combinations")
    return ThreeVarEquation(F=expand(F + rest), ctx=ctx, log=eq.log)


def match_mixed(eq: Equation, ctx: JetContext | None = None, x0: Expr = Symbol("x0")):
    """``w_tx = a(t) w w_xx + F(t, w_x, ..., w_x^(n+1))`` written in ``u = w_x``.

    Returns an :class:`IntegroDiffEquation` with ``G = a(t) u``, or an
    :class:`EvolutionEquation` when ``a`` vanishes.
    """
    wctx = JetContext(ctx.independents if ctx else ("t", "x"), "w")
    uctx = ctx or JetContext()
    x = wctx.mises_direction
    wtx = wctx.jet(t=1, **{x: 1}).name
    e = expand(eq.residual)
    if wtx not in e.free_symbols:
        raise TemplateMismatch(f"no {wtx} term")
    c, b = linear_split(e, wtx)
    _check_nonzero(c, f"coefficient of {wtx}")
    rhs = expand(-b / c)
    w, wxx = wctx.jet(), wctx.direction_jet(2)
    a = expand(differentiate(rhs, w.name) / wxx)
    a = eliminate(a, [w.name, *_source_jets_in(a, wctx), x, uctx.dependent], "a(t)")
    F = expand(rhs - a * w * wxx)
    bad = [n for n in _source_jets_in(F, wctx) if direction_order(n, wctx) is None]
    F = eliminate(F, bad + [w.name, x], "F")
    table = {}
    for name in _source_jets_in(F, wctx):
        k = direction_order(name, wctx)
        table[name] = uctx.direction_jet(k - 1)
    F = expand(substitute(F, table))
    if is_zero(a):
        return EvolutionEquation(F=F, ctx=uctx, log=eq.log)
    return IntegroDiffEquation(F=F, G=expand(a * uctx.jet()), x0=x0, ctx=uctx, log=eq.log)


def match_integro(eq: Equation, ctx: JetContext | None = None) -> IntegroDiffEquation:
    """``u_t = F + u_x * int(G, z, x0, x)``; a factor ``a(t)`` in front is moved into ``G``."""
    ctx = ctx or JetContext()
    e = expand(eq.residual)
    ints = {n for n in e.walk() if isinstance(n, Integral)}
    if len(ints) != 1:
        raise TemplateMismatch(f"expected exactly one integral term, found {len(ints)}")
    node = ints.pop()
    x = ctx.mises_direction
    if node.hi != Symbol(x) or x in node.lo.free_symbols:
        raise TemplateMismatch(f"integral must run from a constant to {x}")
    hole = "Pint"
    e = expand(_replace(e, node, Symbol(hole)))
    ut = ctx.jet(t=1).name
    a, b = linear_split(e, ut)
    _check_nonzero(a, f"coefficient of {ut}")
    rhs = expand(-b / a)
    coef, F = linear_split(rhs, hole)
    lam = expand(coef / ctx.direction_jet(1))
    lam = eliminate(lam, [*_source_jets_in(lam, ctx), x, ctx.dependent], "the factor in front of the integral")
    F = eliminate(expand(F), [*_non_direction_jets(F, ctx), x], "F")
    body = substitute(node.integrand, {node.var: Symbol(x)})
    G = expand(lam * jetify(body, ctx.source_jets))
    if x in G.free_symbols:
        raise TemplateMismatch(f"integrand depends explicitly on the integration variable: {to_text(node.integrand)}")
    bad = _non_direction_jets(G, ctx)
    if bad:
        raise TemplateMismatch(f"integrand contains {', '.join(bad)}")
    return IntegroDiffEquation(F=F, G=G, x0=node.lo, dummy=node.var, ctx=ctx, log=eq.log)


def _replace(e: Expr, old: Expr, new: Expr) -> Expr:
    return map_nodes(e, lambda n: new if n == old else n)


def match_ode(eq: Equation, ctx: JetContext | None = None, solved: bool = False) -> OdeEquation:
    """Autonomous ``F(u, u', ...) = 0`` or, with ``solved``, ``G(u, u', ...) = x``."""
    ctx = ctx or JetContext(("x",), "u", mises_direction="x")
    x = ctx.mises_direction
    e = expand(eq.residual)
    if not solved:
        if x in e.free_symbols and not is_zero(differentiate(e, x)):
            raise TemplateMismatch(f"explicit {x} found; the equation is not autonomous")
        return OdeEquation(expr=eliminate(e, [x], "the equation"), ctx=ctx, log=eq.log)
    c, b = linear_split(e, x)
    c = eliminate(c, [x, *_source_jets_in(c, ctx), ctx.dependent], f"coefficient of {x}")
    _check_nonzero(c, f"coefficient of {x}")
    G = expand(-b / c)
    if x in G.free_symbols:
        raise TemplateMismatch(f"{x} must appear only on one side of the solved form")
    return OdeEquation(expr=G, solved=True, ctx=ctx, log=eq.log)


__all__ = [
    "TemplateMismatch", "bracket", "eliminate", "linear_split", "match_boundary_layer",
    "match_evolution", "match_integro", "match_mixed", "match_ode", "match_three_var",
]
