import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import propcheck
from mises.expr import Symbol, default_context, parse, simplify, to_text
from mises.jets import JetContext
from mises.transform import Equation, EvolutionEquation, change_dependent, equations_equivalent, rf_pair_evolution
from randexpr import random_expr

CTX = default_context()


def test_simplify_idempotent_on_1000_random_expressions():
    assert propcheck.idempotence_failures(1000) == []


def test_print_parse_round_trip_on_1000_random_expressions():
    assert propcheck.round_trip_failures(1000) == []


def test_symbolic_derivative_matches_finite_difference():
    bad, worst = propcheck.derivative_failures(300)
    assert bad == []
    assert worst <= propcheck.FD_TOL


def test_total_derivatives_commute():
    assert propcheck.commutation_failures(60) == []


def test_to_mises_is_sound_on_closed_form_fields():
    bad, worst = propcheck.to_mises_failures(40)
    assert bad == []
    assert worst <= propcheck.MISES_TOL


def test_zeta_form_for_random_right_hand_sides():
    assert propcheck.zeta_form_failures(50) == []


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_round_trip_hypothesis(seed):
    e = random_expr(np.random.default_rng(seed), depth=4)
    assert parse(to_text(e), CTX) == e
    assert simplify(e) == e


@pytest.mark.parametrize("text", [
    "u_x^(n)", "x^(n+1)*y^(-n)", "u_x^(n)*u_xx^(m/2)", "(1 + x^2)^(-3/2)", "f'(u)^(n-1)", "x^-1", "-x^2",
    "int(f(z)*u, z, x0, x)", "f^(2,1)(t, x)", "2^(1/2)*x", "(-1)^n",
])
def test_round_trip_fixed_cases(text):
    e = parse(text, CTX)
    assert parse(to_text(e), CTX) == e


# mutation controls: each check must notice a planted error

def test_finite_difference_check_notices_wrong_variable():
    from mises.expr import EvalEnv, differentiate, eval_numeric
    e = parse("x^3*y + f(t*x)", CTX)
    point = {"x": 0.7, "y": 1.1, "t": 0.9}
    funcs = propcheck.analytic_functions()
    wrong = float(eval_numeric(differentiate(e, "y"), EvalEnv(point, funcs)))
    assert abs(wrong - propcheck._fd(e, point, funcs, "x")) > propcheck.FD_TOL


def test_zeta_form_notices_wrong_sign():
    ctx = JetContext()
    target = ctx.target_context(CTX).with_symbols("zeta")
    F = parse("u_xx + u*u_x", ctx.source_context(CTX))
    s = parse("s(t)", CTX)
    mises, _ = rf_pair_evolution(EvolutionEquation(F=F, s=s, ctx=ctx))
    out = change_dependent(mises, "zeta", parse("1/zeta", target))
    good = parse("-s(t)*zeta - D(-zeta_u/zeta^2 + u, u)", target)
    assert equations_equivalent(out, Equation(lhs=Symbol("zeta_t"), rhs=good))
    assert not equations_equivalent(out, Equation(lhs=Symbol("zeta_t"), rhs=good + 2 * s * Symbol("zeta")))


def test_to_mises_check_notices_wrong_eta(monkeypatch):
    fields = tuple((u, eta + " + 1/1000", box) for u, eta, box in propcheck.MONOTONE_FIELDS)
    monkeypatch.setattr(propcheck, "MONOTONE_FIELDS", fields)
    bad, _ = propcheck.to_mises_failures(8)
    assert len(bad) >= 4
