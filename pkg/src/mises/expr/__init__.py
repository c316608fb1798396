"""Canonical symbolic expressions and the equation DSL."""

from .calculus import (
    UnsupportedDerivative,
    diff,
    differentiate,
    expand,
    instantiate,
    replace_nodes,
    substitute,
)
from .context import Context, default_context, jet_name, split_suffix
from .equality import EqualityAborted, equal_probabilistic, is_zero
from .evaluate import EvalEnv, EvaluationError, Polynomial, eval_numeric
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
    num,
    power,
    simplify,
    sym,
)
from .parser import ParseError, parse, parse_equation
from .printer import to_text

__all__ = [
    "Context", "EqualityAborted", "EvalEnv", "EvaluationError", "Expr", "FuncApp", "Integral",
    "ONE", "ParseError", "Polynomial", "Power", "Product", "Rational", "Sum", "Symbol",
    "UnsupportedDerivative", "ZERO", "add", "as_expr", "default_context", "diff", "differentiate",
    "equal_probabilistic", "eval_numeric", "expand", "func", "instantiate", "integral", "is_zero",
    "jet_name", "map_nodes", "mul", "num", "parse", "parse_equation", "power", "replace_nodes",
    "simplify", "split_suffix", "substitute", "sym", "to_text",
]
