"""Differentiation, substitution and expansion."""

from __future__ import annotations

from typing import Callable, Mapping

from .nodes import (
    ONE,
    ZERO,
    Expr,
    FuncApp,
    Integral,
    Power,
    Product,
    Rational,
    Sum,
    Symbol,
    add,
    as_expr,
    func,
    integral,
    map_nodes,
    mul,
    power,
    rebuild,
)


class UnsupportedDerivative(ValueError):
    """Raised when a derivative is outside what the calculus supports."""


def _name(v) -> str:
    return v.name if isinstance(v, Symbol) else str(v)


def differentiate(e: Expr, v) -> Expr:
    """Exact partial derivative of ``e`` with respect to the symbol ``v``.

    Opaque functions pick up an incremented derivative index through the
    chain rule. An integral may depend on ``v`` only through its integrand
    or through an upper bound equal to ``v``.
    """
    name = _name(v)
    memo: dict[Expr, Expr] = {}

    def d(node: Expr) -> Expr:
        if name not in node.free_symbols:
            return ZERO
        hit = memo.get(node)
        if hit is not None:
            return hit
        if isinstance(node, Symbol):
            out = ONE
        elif isinstance(node, Sum):
            out = add(*[d(t) for t in node.terms])
        elif isinstance(node, Product):
            fs = node.factors
            parts = []
            for i, f in enumerate(fs):
                df = d(f)
                if df != ZERO:
                    parts.append(mul(df, *fs[:i], *fs[i + 1:]))
            out = add(*parts)
        elif isinstance(node, Power):
            if name in node.exp.free_symbols:
                raise UnsupportedDerivative(f"exponent of {node} depends on {name}")
            out = mul(node.exp, power(node.base, add(node.exp, -1)), d(node.base))
        elif isinstance(node, FuncApp):
            parts = []
            for i, a in enumerate(node.args):
                da = d(a)
                if da != ZERO:
                    derivs = list(node.derivs)
                    derivs[i] += 1
                    parts.append(mul(func(node.name, node.args, derivs), da))
            out = add(*parts)
        elif isinstance(node, Integral):
            out = _d_integral(node, name, d)
        else:
            out = ZERO
        memo[node] = out
        return out

    return d(e)


def _d_integral(node: Integral, name: str, d: Callable[[Expr], Expr]) -> Expr:
    if name in node.lo.free_symbols:
        raise UnsupportedDerivative(f"lower bound of {node} depends on {name}")
    parts = []
    if name in node.hi.free_symbols:
        if node.hi != Symbol(name):
            raise UnsupportedDerivative(f"upper bound of {node} depends on {name} non-trivially")
        parts.append(substitute(node.integrand, {node.var: node.hi}))
    if name != node.var and name in node.integrand.free_symbols:
        parts.append(integral(differentiate(node.integrand, name), node.var, node.lo, node.hi))
    return add(*parts)


def diff(e: Expr, *variables) -> Expr:
    for v in variables:
        e = differentiate(e, v)
    return e


def substitute(e: Expr, bindings: Mapping) -> Expr:
    """Simultaneous substitution of symbols; bound integration variables are respected."""
    table = {_name(k): as_expr(v) for k, v in bindings.items()}
    if not table:
        return e

    def go(node: Expr, table: dict[str, Expr]) -> Expr:
        if not (node.free_symbols & table.keys()):
            return node
        if isinstance(node, Symbol):
            return table[node.name]
        if isinstance(node, Integral):
            inner = {k: v for k, v in table.items() if k != node.var}
            var, body = node.var, node.integrand
            if any(var in val.free_symbols for val in inner.values()):
                fresh = var + "1"
                while any(fresh in val.free_symbols for val in inner.values()) or fresh in body.free_symbols:
                    fresh += "1"
                body = go(body, {var: Symbol(fresh)})
                var = fresh
            return integral(go(body, inner), var, go(node.lo, table), go(node.hi, table))
        kids = tuple(go(k, table) for k in node.children)
        return rebuild(node, kids)

    return go(e, table)


def instantiate(e: Expr, definitions: Mapping[str, tuple[tuple[str, ...], Expr]]) -> Expr:
    """Replace opaque functions by closed forms.

    ``definitions`` maps a function name to ``(parameters, body)``; derivative
    indices are honoured by differentiating ``body`` before substituting the
    call's arguments for the parameters.
    """

    def fn(node: Expr) -> Expr:
        if isinstance(node, FuncApp) and node.name in definitions:
            params, body = definitions[node.name]
            if len(params) != len(node.args):
                return node
            for p, k in zip(params, node.derivs):
                for _ in range(k):
                    body = differentiate(body, p)
            return substitute(body, dict(zip(params, node.args)))
        return node

    return map_nodes(e, fn)


def replace_nodes(e: Expr, table: Mapping[Expr, Expr]) -> Expr:
    """Replace whole sub-expressions (exact structural matches)."""
    if not table:
        return e
    return map_nodes(e, lambda n: table.get(n, n))


def expand(e: Expr, max_power: int = 12) -> Expr:
    """Distribute products over sums and expand small positive integer powers of sums."""

    def fn(node: Expr) -> Expr:
        if isinstance(node, Product):
            return _distribute(node.factors)
        if isinstance(node, Power) and isinstance(node.base, Sum):
            k = node.exp
            if isinstance(k, Rational) and k.is_integer and 1 < k.value <= max_power:
                return _distribute((node.base,) * int(k.value))
        return node

    # merging bases while multiplying out can recreate powers of sums
    for _ in range(8):
        new = map_nodes(e, fn)
        if new == e:
            break
        e = new
    return e


def _distribute(factors) -> Expr:
    acc: list[Expr] = [ONE]
    for f in factors:
        terms = f.terms if isinstance(f, Sum) else (f,)
        acc = [mul(a, t) for a in acc for t in terms]
    return add(*acc)


def depends_on(e: Expr, name: str) -> bool:
    return name in e.free_symbols


def symbol_exponent(term: Expr, name: str) -> Expr:
    """Exponent of ``name`` as an explicit factor of ``term`` (0 when absent)."""
    factors = term.factors if isinstance(term, Product) else (term,)
    for f in factors:
        if f == Symbol(name):
            return ONE
        if isinstance(f, Power) and f.base == Symbol(name):
            return f.exp
    return ZERO
