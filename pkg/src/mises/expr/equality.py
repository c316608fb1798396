"""Randomized identity testing.

Two expressions are declared equal when they agree at a handful of random
points, with every opaque function replaced, per trial, by a fresh random
cubic polynomial with integer coefficients.  Symbols are drawn from
``[0.3, 1.7]``, which keeps negative and fractional powers of positive
quantities well defined.
"""

from __future__ import annotations

import numpy as np

from .evaluate import EvalEnv, EvaluationError, Polynomial, eval_numeric
from .nodes import Expr, Sum, as_expr

DEFAULT_TRIALS = 12
DEFAULT_TOL = 1e-9
DEFAULT_SEED = 20090717
SAMPLE_LOW, SAMPLE_HIGH = 0.3, 1.7


class EqualityAborted(RuntimeError):
    """Too many evaluation failures while sampling random points."""


def _rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(DEFAULT_SEED if rng is None else rng)


def random_env(exprs, rng: np.random.Generator) -> EvalEnv:
    names: set[str] = set()
    funcs: set[tuple[str, int]] = set()
    for e in exprs:
        names |= e.free_symbols
        funcs |= e.functions()
    values = {n: float(rng.uniform(SAMPLE_LOW, SAMPLE_HIGH)) for n in sorted(names)}
    by_name: dict[str, dict[int, Polynomial]] = {}
    for name, arity in sorted(funcs):
        by_name.setdefault(name, {})[arity] = Polynomial.random(arity, rng)

    functions = {}
    for name, table in by_name.items():
        functions[name] = (lambda table: lambda args, derivs: table[len(args)](args, derivs))(table)
    return EvalEnv(values, functions)


def _sample(exprs, trials: int, rng):
    """Yield evaluations of ``exprs`` at ``trials`` successful random points."""
    gen = _rng(rng)
    exprs = [as_expr(e) for e in exprs]
    done = failures = 0
    while done < trials:
        env = random_env(exprs, gen)
        try:
            vals = [float(eval_numeric(e, env)) for e in exprs]
        except (EvaluationError, ZeroDivisionError, OverflowError):
            failures += 1
            if failures > 10 * trials:
                raise EqualityAborted(f"aborted after {failures} failed evaluations") from None
            continue
        if not all(np.isfinite(vals)):
            failures += 1
            if failures > 10 * trials:
                raise EqualityAborted(f"aborted after {failures} non-finite evaluations")
            continue
        done += 1
        yield vals


def equal_probabilistic(a, b, trials: int = DEFAULT_TRIALS, tol: float = DEFAULT_TOL, rng=None) -> bool:
    """True iff ``|a - b| <= tol * (1 + |a| + |b|)`` at ``trials`` random points."""
    for va, vb in _sample([a, b], trials, rng):
        if abs(va - vb) > tol * (1.0 + abs(va) + abs(vb)):
            return False
    return True


def is_zero(e: Expr, trials: int = DEFAULT_TRIALS, tol: float = DEFAULT_TOL, rng=None, scale: Expr | None = None) -> bool:
    """Randomized test for ``e == 0``.

    The tolerance is relative to the sum of the magnitudes of the top-level
    terms of ``e``, plus ``|scale|`` when given, so cancellation between large
    terms is judged fairly.
    """
    e = as_expr(e)
    if not e.free_symbols and not e.functions():
        return e == 0
    terms = list(e.terms) if isinstance(e, Sum) else [e]
    exprs = terms + ([as_expr(scale)] if scale is not None else [])
    for vals in _sample(exprs, trials, rng):
        total = sum(vals[: len(terms)])
        ref = sum(abs(v) for v in vals)
        if abs(total) > tol * (1.0 + ref):
            return False
    return True
