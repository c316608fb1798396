"""Floating-point evaluation of expressions.

Works elementwise on numpy arrays as well as on Python floats, so the same
routine serves random-point identity testing and finite-difference residuals
on grids.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Protocol

import numpy as np

from .nodes import Expr, FuncApp, Integral, Power, Product, Rational, Sum, Symbol

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


class EvaluationError(ArithmeticError):
    """Division by zero, fractional power of a negative number, or a missing binding."""


class Instantiation(Protocol):
    def __call__(self, args: tuple, derivs: tuple[int, ...]): ...


@dataclass(frozen=True)
class Polynomial:
    """Multivariate polynomial with exact integer coefficients.

    Called as ``p(args, derivs)`` it evaluates the mixed partial derivative
    given by ``derivs``, so derivatives of instantiated opaque functions are
    exact.
    """

    coeffs: Mapping[tuple[int, ...], int]

    @property
    def arity(self) -> int:
        return len(next(iter(self.coeffs)))

    def __call__(self, args, derivs=None):
        derivs = derivs or (0,) * len(args)
        total = 0.0
        for powers, c in self.coeffs.items():
            if any(p < d for p, d in zip(powers, derivs)):
                continue
            term = float(c)
            for a, p, d in zip(args, powers, derivs):
                falling = 1
                for j in range(d):
                    falling *= p - j
                term = term * falling * a ** (p - d) if p - d else term * falling
            total = total + term
        return total

    @classmethod
    def random(cls, arity: int, rng: np.random.Generator, degree: int = 3, bound: int = 5) -> Polynomial:
        monomials = [m for m in itertools.product(range(degree + 1), repeat=arity) if sum(m) <= degree]
        coeffs = {m: int(rng.integers(-bound, bound + 1)) for m in monomials}
        top = [m for m in monomials if sum(m) == degree]
        if arity and all(coeffs[m] == 0 for m in top):
            m = top[int(rng.integers(len(top)))]
            coeffs[m] = int(rng.choice([c for c in range(-bound, bound + 1) if c]))
        return cls(coeffs)


@dataclass
class EvalEnv:
    values: dict[str, object] = field(default_factory=dict)
    functions: dict[str, Callable] = field(default_factory=dict)


def _is_negative(x) -> bool:
    return bool(np.any(np.asarray(x) < 0))


def _is_zero(x) -> bool:
    return bool(np.any(np.asarray(x) == 0))


def eval_numeric(e: Expr, env: EvalEnv):
    """Evaluate ``e`` in ``env``; returns a float or an ndarray."""
    memo: dict[Expr, object] = {}

    def ev(node: Expr, values: Mapping[str, object]):
        cacheable = values is env.values
        if cacheable:
            hit = memo.get(node)
            if hit is not None:
                return hit
        if isinstance(node, Rational):
            out = float(node.value)
        elif isinstance(node, Symbol):
            try:
                out = values[node.name]
            except KeyError:
                raise EvaluationError(f"no value bound for symbol {node.name!r}") from None
        elif isinstance(node, Sum):
            out = ev(node.terms[0], values)
            for t in node.terms[1:]:
                out = out + ev(t, values)
        elif isinstance(node, Product):
            out = ev(node.factors[0], values)
            for f in node.factors[1:]:
                out = out * ev(f, values)
        elif isinstance(node, Power):
            out = _power(ev(node.base, values), node.exp, ev(node.exp, values))
        elif isinstance(node, FuncApp):
            fn = env.functions.get(node.name)
            if fn is None:
                raise EvaluationError(f"no instantiation bound for function {node.name!r}")
            args = tuple(ev(a, values) for a in node.args)
            out = fn(args, node.derivs)
        elif isinstance(node, Integral):
            out = _quadrature(node, values, ev)
        else:
            raise TypeError(type(node))
        if cacheable:
            memo[node] = out
        return out

    return ev(e, env.values)


def _power(base, exp_node: Expr, exp):
    integer = isinstance(exp_node, Rational) and exp_node.is_integer
    if not integer and _is_negative(base):
        raise EvaluationError("fractional power of a negative number")
    if _is_zero(base) and (np.any(np.asarray(exp) < 0)):
        raise EvaluationError("division by zero")
    if integer:
        k = exp_node.value.numerator
        if isinstance(base, np.ndarray):
            return base**k if k > 0 else 1.0 / base ** (-k)
        return float(base) ** k
    return base**exp


def _quadrature(node: Integral, values: Mapping[str, object], ev):
    lo = ev(node.lo, values)
    hi = ev(node.hi, values)
    half = (np.asarray(hi) - np.asarray(lo)) / 2.0
    mid = (np.asarray(hi) + np.asarray(lo)) / 2.0
    total = 0.0
    for xk, wk in zip(_GL_NODES, _GL_WEIGHTS):
        inner = dict(values)
        inner[node.var] = mid + half * xk
        total = total + wk * ev(node.integrand, inner)
    out = half * total
    return float(out) if np.ndim(out) == 0 else out


def polynomial_callable(p: Callable) -> Callable:
    """Wrap a plain ``f(*args)`` numpy callable with no derivative support."""

    def call(args, derivs):
        if any(derivs):
            raise EvaluationError("derivative of a plain callable requested")
        return p(*args)

    return call
