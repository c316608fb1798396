"""Immutable expression nodes and the canonicalizing constructors.

Every public way of building an expression goes through ``add``, ``mul``,
``power``, ``func`` and ``integral``, so an ``Expr`` value is always in
canonical form:

* sums and products are flattened and sorted by ``Expr.key``;
* a product carries at most one ``Rational`` factor and a sum at most one
  ``Rational`` term;
* like terms and like bases are collected;
* no power with exponent 0 or 1 survives.

Variables are assumed positive, which licenses ``(a*b)^p -> a^p*b^p`` and
``(a^p)^q -> a^(p*q)`` for non-integer exponents.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Callable, Iterator, Union

Number = Union[int, Fraction]

_RATIONAL, _SYMBOL, _FUNC, _POWER, _PRODUCT, _SUM, _INTEGRAL = range(7)


class Expr:
    """Base class of all expression nodes."""

    __slots__ = ("_key", "_hash", "_free")

    kind: int = -1

    def _compute_key(self) -> tuple:
        raise NotImplementedError

    @property
    def key(self) -> tuple:
        """Total-order sort key; also the structural identity of the node."""
        try:
            return self._key
        except AttributeError:
            k = self._compute_key()
            object.__setattr__(self, "_key", k)
            return k

    def __hash__(self) -> int:
        try:
            return self._hash
        except AttributeError:
            h = hash(self.key)
            object.__setattr__(self, "_hash", h)
            return h

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if isinstance(other, (int, Fraction)):
            other = Rational(other)
        if not isinstance(other, Expr):
            return NotImplemented
        return self.kind == other.kind and self.key == other.key

    def __ne__(self, other: object) -> bool:
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __lt__(self, other: Expr) -> bool:
        return self.key < other.key

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    # arithmetic sugar
    def __add__(self, other): return add(self, other)
    def __radd__(self, other): return add(other, self)
    def __sub__(self, other): return add(self, mul(-1, other))
    def __rsub__(self, other): return add(other, mul(-1, self))
    def __mul__(self, other): return mul(self, other)
    def __rmul__(self, other): return mul(other, self)
    def __truediv__(self, other): return mul(self, power(other, -1))
    def __rtruediv__(self, other): return mul(other, power(self, -1))
    def __pow__(self, other): return power(self, other)
    def __rpow__(self, other): return power(other, self)
    def __neg__(self): return mul(-1, self)
    def __pos__(self): return self

    @property
    def children(self) -> tuple[Expr, ...]:
        return ()

    def walk(self) -> Iterator[Expr]:
        """Pre-order traversal over all sub-expressions (bound variables included)."""
        stack: list[Expr] = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    @property
    def free_symbols(self) -> frozenset[str]:
        try:
            return self._free  # type: ignore[attr-defined]
        except AttributeError:
            out = self._compute_free()
            object.__setattr__(self, "_free", out)
            return out

    def _compute_free(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for c in self.children:
            out |= c.free_symbols
        return out

    def has(self, name: str) -> bool:
        return name in self.free_symbols

    def functions(self) -> set[tuple[str, int]]:
        """Names and arities of every opaque function application."""
        return {(n.name, len(n.args)) for n in self.walk() if isinstance(n, FuncApp)}

    def __repr__(self) -> str:
        from .printer import to_text

        return f"Expr({to_text(self)!r})"

    def __str__(self) -> str:
        from .printer import to_text

        return to_text(self)


class Rational(Expr):
    __slots__ = ("value",)
    kind = _RATIONAL

    def __init__(self, value: Number):
        object.__setattr__(self, "value", Fraction(value))

    def _compute_key(self):
        return (_RATIONAL, self.value)

    def _compute_free(self):
        return frozenset()

    @property
    def is_integer(self) -> bool:
        return self.value.denominator == 1


class Symbol(Expr):
    __slots__ = ("name",)
    kind = _SYMBOL

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def _compute_key(self):
        return (_SYMBOL, self.name)

    def _compute_free(self):
        return frozenset((self.name,))


class FuncApp(Expr):
    """Opaque function ``name(args)`` differentiated ``derivs[i]`` times in slot ``i``."""

    __slots__ = ("name", "args", "derivs")
    kind = _FUNC

    def __init__(self, name: str, args: tuple[Expr, ...], derivs: tuple[int, ...]):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "derivs", derivs)

    def _compute_key(self):
        return (_FUNC, self.name, len(self.args), self.derivs, tuple(a.key for a in self.args))

    @property
    def children(self):
        return self.args


class Power(Expr):
    __slots__ = ("base", "exp")
    kind = _POWER

    def __init__(self, base: Expr, exp: Expr):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exp", exp)

    def _compute_key(self):
        return (_POWER, self.base.key, self.exp.key)

    @property
    def children(self):
        return (self.base, self.exp)


class Product(Expr):
    __slots__ = ("factors",)
    kind = _PRODUCT

    def __init__(self, factors: tuple[Expr, ...]):
        object.__setattr__(self, "factors", factors)

    def _compute_key(self):
        return (_PRODUCT, tuple(f.key for f in self.factors))

    @property
    def children(self):
        return self.factors

    def split_coeff(self) -> tuple[Fraction, Expr]:
        first = self.factors[0]
        if isinstance(first, Rational):
            rest = self.factors[1:]
            return first.value, rest[0] if len(rest) == 1 else Product(rest)
        return Fraction(1), self


class Sum(Expr):
    __slots__ = ("terms",)
    kind = _SUM

    def __init__(self, terms: tuple[Expr, ...]):
        object.__setattr__(self, "terms", terms)

    def _compute_key(self):
        return (_SUM, tuple(t.key for t in self.terms))

    @property
    def children(self):
        return self.terms


class Integral(Expr):
    """Definite integral of ``integrand`` over ``var`` from ``lo`` to ``hi``."""

    __slots__ = ("integrand", "var", "lo", "hi")
    kind = _INTEGRAL

    def __init__(self, integrand: Expr, var: str, lo: Expr, hi: Expr):
        object.__setattr__(self, "integrand", integrand)
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def _compute_key(self):
        return (_INTEGRAL, self.var, self.integrand.key, self.lo.key, self.hi.key)

    @property
    def children(self):
        return (self.integrand, self.lo, self.hi)

    def _compute_free(self):
        inner = self.integrand.free_symbols - {self.var}
        return inner | self.lo.free_symbols | self.hi.free_symbols


ZERO = Rational(0)
ONE = Rational(1)
NEG_ONE = Rational(-1)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction)):
        return Rational(value)
    if isinstance(value, str):
        return Symbol(value)
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


def num(value: Number) -> Rational:
    return Rational(value)


def sym(name: str) -> Symbol:
    return Symbol(name)


def coeff_and_rest(term: Expr) -> tuple[Fraction, Expr]:
    if isinstance(term, Product):
        return term.split_coeff()
    return Fraction(1), term


def add(*terms) -> Expr:
    constant = Fraction(0)
    collected: dict[Expr, Fraction] = {}
    stack = [as_expr(t) for t in reversed(terms)]
    while stack:
        t = stack.pop()
        if isinstance(t, Sum):
            stack.extend(reversed(t.terms))
        elif isinstance(t, Rational):
            constant += t.value
        else:
            c, rest = coeff_and_rest(t)
            collected[rest] = collected.get(rest, Fraction(0)) + c
    out = []
    for rest, c in collected.items():
        if c == 0:
            continue
        out.append(rest if c == 1 else mul(Rational(c), rest))
    if constant != 0:
        out.append(Rational(constant))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    out.sort(key=lambda e: e.key)
    return Sum(tuple(out))


def _base_exp(f: Expr) -> tuple[Expr, Expr]:
    if isinstance(f, Power):
        return f.base, f.exp
    return f, ONE


def mul(*factors) -> Expr:
    coeff = Fraction(1)
    powers: dict[Expr, Expr] = {}
    stack = [as_expr(f) for f in reversed(factors)]
    while stack:
        f = stack.pop()
        if isinstance(f, Rational):
            coeff *= f.value
        elif isinstance(f, Product):
            stack.extend(reversed(f.factors))
        else:
            b, e = _base_exp(f)
            powers[b] = add(powers[b], e) if b in powers else e
    if coeff == 0:
        return ZERO
    out: list[Expr] = []
    regroup: list[Expr] = []
    for b, e in powers.items():
        p = power(b, e)
        if isinstance(p, Rational):
            coeff *= p.value
        elif isinstance(p, Product):
            regroup.append(p)
        elif p is not ONE:
            out.append(p)
    if regroup:
        return mul(Rational(coeff), *out, *regroup)
    if coeff == 0:
        return ZERO
    if coeff != 1:
        out.append(Rational(coeff))
    if not out:
        return ONE
    if len(out) == 1:
        return out[0]
    out.sort(key=lambda e: e.key)
    return Product(tuple(out))


def _exact_root(n: int, k: int) -> int | None:
    if n < 0:
        return None
    r = round(n ** (1.0 / k))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    if k == 2:
        r = isqrt(n)
        return r if r * r == n else None
    return None


def _rational_power(v: Fraction, q: Fraction) -> Expr:
    """Canonical ``v**q`` for rational ``v`` and ``q`` (not integer)."""
    if v < 0:
        return Power(Rational(v), Rational(q))
    if v.denominator != 1:
        return mul(_int_power(v.numerator, q), _int_power(v.denominator, -q))
    return _int_power(v.numerator, q)


def _int_power(n: int, q: Fraction) -> Expr:
    if n == 1:
        return ONE
    if q.denominator == 1:
        return Rational(Fraction(n) ** q.numerator)
    root = _exact_root(n, q.denominator)
    if root is not None:
        return Rational(Fraction(root) ** q.numerator)
    # keep the unevaluated exponent in (0, 1)
    whole = q.numerator // q.denominator
    frac = q - whole
    node = Power(Rational(n), Rational(frac))
    if whole == 0:
        return node
    return Product(tuple(sorted((Rational(Fraction(n) ** whole), node), key=lambda e: e.key)))


def power(base, exp) -> Expr:
    b, e = as_expr(base), as_expr(exp)
    if isinstance(e, Rational):
        q = e.value
        if q == 0:
            return ONE
        if q == 1:
            return b
        if isinstance(b, Rational):
            v = b.value
            if v == 0:
                if q < 0:
                    raise ZeroDivisionError("0 raised to a negative power")
                return ZERO
            if v == 1:
                return ONE
            if q.denominator == 1:
                return Rational(v**q.numerator)
            return _rational_power(v, q)
    elif isinstance(b, Rational) and b.value == 1:
        return ONE
    if isinstance(b, Power):
        return power(b.base, mul(b.exp, e))
    if isinstance(b, Product):
        c, _ = b.split_coeff()
        integer_exp = isinstance(e, Rational) and e.is_integer
        if integer_exp or c > 0:
            return mul(*[power(f, e) for f in b.factors])
    return Power(b, e)


def func(name: str, args, derivs=None) -> FuncApp:
    args = tuple(as_expr(a) for a in args)
    if derivs is None:
        derivs = (0,) * len(args)
    derivs = tuple(int(d) for d in derivs)
    if len(derivs) != len(args) or any(d < 0 for d in derivs):
        raise ValueError(f"bad derivative index {derivs} for {name} of arity {len(args)}")
    return FuncApp(name, args, derivs)


def integral(integrand, var: str, lo, hi) -> Expr:
    lo, hi = as_expr(lo), as_expr(hi)
    if lo == hi:
        return ZERO
    return Integral(as_expr(integrand), var, lo, hi)


def rebuild(node: Expr, children: tuple[Expr, ...]) -> Expr:
    """Reassemble ``node`` from new children through the canonical constructors."""
    if isinstance(node, Sum):
        return add(*children)
    if isinstance(node, Product):
        return mul(*children)
    if isinstance(node, Power):
        return power(*children)
    if isinstance(node, FuncApp):
        return func(node.name, children, node.derivs)
    if isinstance(node, Integral):
        return integral(children[0], node.var, children[1], children[2])
    return node


def map_nodes(e: Expr, fn: Callable[[Expr], Expr]) -> Expr:
    """Bottom-up rewrite: rebuild every node from mapped children, then apply ``fn``."""
    memo: dict[Expr, Expr] = {}

    def go(node: Expr) -> Expr:
        hit = memo.get(node)
        if hit is not None:
            return hit
        kids = node.children
        if kids:
            new_kids = tuple(go(k) for k in kids)
            node2 = node if new_kids == kids else rebuild(node, new_kids)
        else:
            node2 = node
        out = fn(node2)
        memo[node] = out
        return out

    return go(e)


def simplify(e: Expr) -> Expr:
    """Re-canonicalize ``e`` bottom-up; idempotent."""
    return map_nodes(e, lambda n: rebuild(n, n.children) if n.children else n)
