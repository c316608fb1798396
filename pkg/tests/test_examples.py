"""Worked examples for every operation, each checked through the public API."""

import numpy as np
import pytest

from mises.expr import (
    EvalEnv,
    Integral,
    Power,
    Sum,
    differentiate,
    equal_probabilistic,
    eval_numeric,
    instantiate,
    parse,
    substitute,
    to_text,
)
from mises.jets import mises_derivative, mises_prolong, to_mises, total_derivative
from mises.numeric.eta import build_eta, residual_exact
from mises.numeric.mol import Grid, NumericSolution, solve_mol
from mises.transform import (
    Equation,
    EvolutionEquation,
    IntegroDiffEquation,
    MisesEquation,
    backlund_pair,
    change_dependent,
    classify_linear,
    equations_equivalent,
    implicit_solution_from_eta,
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

from oracles import BURGERS_MAX_ERROR, HEAT_MAX_ERROR, burgers_exact, heat_exact


def same(a, b):
    return equations_equivalent(a, b, rng=11)


def mises_eq(frame, text):
    lhs, rhs = frame.eq(text, target=True).lhs, frame.eq(text, target=True).rhs
    return MisesEquation(lhs=lhs, rhs=rhs, unknown="eta", independents=frame.ctx.mises_independents)


# ----------------------------------------------------------- expressions


class TestExpressions:
    def test_parse_structure(self, evo):
        e = evo.src("u_t + f(u)*u_x - a*u_xx")
        assert isinstance(e, Sum) and len(e.terms) == 3
        p = evo.src("(x+1)^2")
        assert isinstance(p, Power) and isinstance(p.base, Sum) and p.exp == 2
        assert isinstance(evo.src("int(u, z, x0, x)"), Integral)

    def test_canonical_cancellation(self, evo):
        assert evo.src("x + x") == evo.src("2*x")
        assert evo.tgt("eta*(1/eta)") == evo.tgt("1")

    def test_quotient_rule_cancels(self, evo):
        eta = evo.tgt("eta")
        F = evo.tgt("a*eta*eta_u")
        out = eta**2 * mises_derivative(F / eta, "u", evo.ctx)
        assert out == evo.tgt("a*eta^2*eta_uu")

    def test_plain_differentiation(self, evo):
        assert differentiate(evo.tgt("f(u)*eta"), "u") == evo.tgt("f'(u)*eta")
        assert differentiate(evo.tgt("u^3 + 2*u"), "u") == evo.tgt("3*u^2 + 2")
        assert differentiate(evo.src("int(g(t, z), z, x0, x)"), "x") == evo.src("g(t, x)")

    def test_substitution(self, evo):
        ctx = evo.target.with_symbols("zeta", "theta")
        assert substitute(parse("eta^2", ctx), {"eta": parse("1/zeta", ctx)}) == parse("zeta^(-2)", ctx)
        assert substitute(parse("eta", ctx), {"eta": parse("theta^(1/2)", ctx)}) == parse("theta^(1/2)", ctx)
        assert substitute(parse("x + y", ctx), {}) == parse("x + y", ctx)

    def test_evaluation(self, ctx):
        assert eval_numeric(parse("2*x", ctx), EvalEnv({"x": 3})) == 6
        assert eval_numeric(parse("theta^(3/2)", ctx.with_symbols("theta")), EvalEnv({"theta": 4})) == pytest.approx(8)
        v = ctx.with_symbols("v")
        cubic = instantiate(parse("f'(u)", ctx), {"f": (("v",), parse("v^3", v))})
        assert eval_numeric(cubic, EvalEnv({"u": 2})) == pytest.approx(12)

    def test_equality(self, evo):
        assert equal_probabilistic(evo.src("(x+1)^2"), evo.src("x^2 + 2*x + 1"))
        a = evo.tgt("eta_t - a*eta^2*eta_uu + f'(u)*eta^2")
        assert not equal_probabilistic(a, evo.tgt("eta_t - a*eta^2*eta_uu"))


# ----------------------------------------------------------------- jets


class TestJets:
    def test_total_derivatives(self, evo):
        out = total_derivative(evo.src("u_t/u_x"), "x", evo.ctx)
        assert equal_probabilistic(out, evo.src("(u_x*u_tx - u_t*u_xx)/u_x^2"))
        assert total_derivative(evo.src("x*u"), "x", evo.ctx) == evo.src("u + x*u_x")

    def test_prolongation(self, evo):
        assert mises_prolong(1) == evo.tgt("eta")
        assert mises_prolong(2) == evo.tgt("eta*eta_u")
        assert equal_probabilistic(mises_prolong(3), evo.tgt("eta*D(eta*eta_u, u)"))

    def test_to_mises(self, evo):
        assert to_mises(evo.src("u_xx/u_x^2")) == evo.tgt("eta_u/eta")
        assert to_mises(evo.src("u_x^n")) == evo.tgt("eta^n")
        assert equal_probabilistic(to_mises(evo.src("u_xxx")), evo.tgt("eta*(eta_u^2 + eta*eta_uu)"))


# --------------------------------------------------------- boundary layer


class TestBoundaryLayer:
    def test_linear_first_order(self, evo):
        eq = evo.eq("u_x*u_tx - u_t*u_xx = f(t,u)*u_xx + g(t,u)*u_x^2 + h(t,u)*u_x")
        out = reduce_mises_2_1(match_boundary_layer(eq))
        assert same(out, evo.eq("eta_t - f(t,u)*eta_u = g(t,u)*eta + h(t,u)", target=True))

    def test_zero_right_side(self, evo):
        out = reduce_mises_2_1(match_boundary_layer(evo.eq("u_x*u_tx - u_t*u_xx = 0")))
        assert same(out, evo.eq("eta_t = 0", target=True))

    def test_second_derivative_generator(self, evo):
        eq = evo.eq("u_x*u_txx - u_t*u_xxx = f(t,u)*u_x")
        out = reduce_mises_2_5(match_boundary_layer(eq, evo.ctx, evo.src("u_xx")))
        assert same(out, evo.eq("D(eta*eta_u, t) = f(t,u)", target=True))

    def test_default_generator_coincides(self, evo):
        eq = evo.eq("u_x*u_tx - u_t*u_xx = u_x^3 + u*u_xx")
        a = reduce_mises_2_5(match_boundary_layer(eq, evo.ctx, evo.src("u_x")))
        b = reduce_mises_2_1(match_boundary_layer(eq))
        assert same(a, b)

    def test_squared_generator(self, evo):
        eq = evo.eq("u_x*D(u_x^2, t) - u_t*D(u_x^2, x) = u_x")
        out = reduce_mises_2_5(match_boundary_layer(eq, evo.ctx, evo.src("u_x^2")))
        assert same(out, evo.eq("2*eta*eta_t = 1", target=True))


# ------------------------------------------------------------- RF-pairs


class TestEvolution:
    def test_nonlinear_heat(self, evo):
        out, _ = rf_pair_evolution(match_evolution(evo.eq("u_t = a*u_xx - f(u)*u_x")))
        assert same(out, evo.eq("eta_t = a*eta^2*eta_uu - f'(u)*eta^2", target=True))

    def test_stretch_only(self, evo):
        out, _ = rf_pair_evolution(EvolutionEquation(F=evo.src("0"), s=evo.src("s(t)")))
        assert same(out, evo.eq("eta_t = s(t)*eta", target=True))

    def test_transport_term(self, evo):
        out, _ = rf_pair_evolution(match_evolution(evo.eq("u_t = u*u_x")))
        assert same(out, evo.eq("eta_t = eta^2", target=True))

    @pytest.mark.parametrize("text, relation", [
        ("u_t = a*u_xx - f(u)*u_x", "u_t = a*eta_x - f(u)*eta"),
        ("u_t = x*u_x", "u_t = x*eta"),
        ("u_t = a*u_xxx - f(u)*u_x", "u_t = a*eta_xx - f(u)*eta"),
    ])
    def test_backlund_pairs(self, evo, text, relation):
        pair = backlund_pair(match_evolution(evo.eq(text)))
        ctx = evo.source.with_jets(eta=("t", "x"))
        lhs, rhs = parse(relation.split("=")[0], ctx), parse(relation.split("=")[1], ctx)
        assert same(pair.relation1, Equation(lhs=lhs, rhs=rhs))
        assert pair.relation2.text() == "u_x = eta"


class TestIntegro:
    def test_five_coefficient_family(self, evo):
        eq = match_integro(evo.eq(
            "u_t = f1(t,u)*u_x + f2(t,u)*u_xx + f3(t,u)*u_xx/u_x^2 + u_x*int(g1(t,u)*u_x + g2(t,u) + g3(t,u)*u_xx/u_x^2, z, x0, x)"
        ))
        out, _ = rf_pair_integrodiff(eq)
        expected = evo.eq("eta_t = eta^2*D(f1(t,u) + f2(t,u)*eta_u + f3(t,u)*eta_u/eta^2, u)"
                          " + g1(t,u)*eta^2 + g2(t,u)*eta + g3(t,u)*eta_u", target=True)
        assert same(out, expected)

    def test_constant_kernel_matches_stretch(self, evo):
        eq = IntegroDiffEquation(F=evo.src("u_xx"), G=evo.src("s(t)"), x0=evo.src("0"))
        a, _ = rf_pair_integrodiff(eq)
        b, _ = rf_pair_evolution(EvolutionEquation(F=evo.src("u_xx"), s=evo.src("s(t)")))
        assert same(a, b)

    def test_linear_kernel(self, evo):
        eq = match_integro(evo.eq("u_t = f(t,u)*u_x + g(t,u) + a(t)*u_x*int(u, z, x0, x)"))
        out, _ = rf_pair_integrodiff(eq)
        assert same(out, evo.eq("eta_t = eta^2*D(f(t,u) + g(t,u)/eta, u) + a(t)*u*eta", target=True))

    def test_mixed_form(self, evo):
        out = rewrite_mixed_to_integro(evo.eq("w_tx = a(t)*w*w_xx + f(t, w_xx)*w_xxx + g(t, w_xx)"))
        assert isinstance(out, IntegroDiffEquation)
        assert equal_probabilistic(out.F, evo.src("f(t, u_x)*u_xx + g(t, u_x)"))
        assert equal_probabilistic(out.G, evo.src("a(t)*u"))

    @pytest.mark.parametrize("text, F", [("w_tx = w_xx", "u_x"), ("w_tx = w_xxx", "u_xx")])
    def test_mixed_form_without_nonlocal_term(self, evo, text, F):
        out = rewrite_mixed_to_integro(evo.eq(text))
        assert isinstance(out, EvolutionEquation)
        assert out.F == evo.src(F)


# ---------------------------------------------------------- three variables


class TestThreeVariables:
    def test_prandtl(self, three):
        eq = three.eq("u_y*u_ty - u_t*u_yy + u*(u_y*u_xy - u_x*u_yy) = nu*(u_y*u_yyy - u_yy^2) - f(t,x)*u_yy")
        out = reduce_mises_3var(match_three_var(eq, three.ctx))
        assert same(out, three.eq("eta_t + u*eta_x + f(t,x)*eta_u = nu*eta^2*eta_uu", target=True))

    def test_time_block_only(self, three):
        out = reduce_mises_3var(match_three_var(three.eq("u_y*u_ty - u_t*u_yy = 0"), three.ctx))
        assert same(out, three.eq("eta_t = 0", target=True))

    def test_space_block(self, three):
        out = reduce_mises_3var(match_three_var(three.eq("u_y*u_xy - u_x*u_yy - u_yy = 0"), three.ctx))
        assert same(out, three.eq("eta_x = eta_u", target=True))


# ---------------------------------------------------- changes of variable


class TestChangeDependent:
    def test_reciprocal_heat(self, evo):
        eq = mises_eq(evo, "eta_t = a*eta^2*eta_uu - f'(u)*eta^2")
        out = change_dependent(eq, "zeta", parse("1/zeta", evo.target.with_symbols("zeta")))
        assert same(out, evo.eq("zeta_t = a*D(zeta^(-2)*zeta_u, u) + f'(u)", target=True))

    def test_square_root(self, evo):
        mises, _ = rf_pair_evolution(match_evolution(evo.eq("u_t = a*u_xxx + b*u_x^n")))
        out = change_dependent(mises, "theta", parse("theta^(1/2)", evo.target.with_symbols("theta")))
        expected = evo.eq("theta_t = a*theta^(3/2)*theta_uuu + b*(n - 1)*theta^(n/2)*theta_u", target=True)
        assert same(out, expected)

    def test_identity_rename(self, evo):
        eq = mises_eq(evo, "eta_t = eta^2*eta_uu")
        out = change_dependent(eq, "theta", parse("theta", evo.target.with_symbols("theta")))
        assert same(out, evo.eq("theta_t = theta^2*theta_uu", target=True))


class TestImplicitSolution:
    def test_constant(self, evo):
        out = implicit_solution_from_eta(evo.tgt("1"))
        assert same(out, evo.eq("u - u0 = x + phi(t)", target=True))

    def test_reciprocal_is_left_as_integral(self, evo):
        out = implicit_solution_from_eta(evo.tgt("u"))
        assert isinstance(out.lhs, Integral)

    def test_example_solution(self, evo):
        out = implicit_solution_from_eta(evo.tgt("(2*t*u + 1)^(1/2)"), lower=evo.tgt("0"))
        assert to_text(out.rhs) == "x + phi(t)"
        assert equal_probabilistic(differentiate(out.lhs, "u"), evo.tgt("(2*t*u + 1)^(-1/2)"))


# ------------------------------------------------------------------ ODEs


class TestOde:
    @pytest.mark.parametrize("text, expected", [
        ("u_xx = u", "eta*eta_u = u"),
        ("u_xxx = 0", "eta*D(eta*eta_u, u) = 0"),
        ("u_xx + f(u)*u_x^2 = 0", "eta*eta_u + f(u)*eta^2 = 0"),
    ])
    def test_autonomous(self, ode, text, expected):
        out = reduce_ode_autonomous(match_ode(ode.eq(text), ode.ctx))
        assert same(out, ode.eq(expected, target=True))

    @pytest.mark.parametrize("text, expected", [
        ("u_x = x", "eta*eta_u = 1"),
        ("u = x", "eta = 1"),
        ("u_xx = x", "eta*D(eta*eta_u, u) = 1"),
    ])
    def test_solved(self, ode, text, expected):
        out = rf_pair_ode(match_ode(ode.eq(text), ode.ctx, solved=True))
        assert same(out, ode.eq(expected, target=True))

    def test_solved_against_exact_solution(self, ode):
        # u' = x has u = x^2/2 + c, so eta = sqrt(2 (u - c))
        out = rf_pair_ode(match_ode(ode.eq("u_x = x"), ode.ctx, solved=True))
        eta = ode.tgt("(2*(u - 3))^(1/2)")
        res = substitute(out.lhs - out.rhs, {"eta": eta, "eta_u": differentiate(eta, "u")})
        for u in (3.5, 4.0, 7.0):
            assert abs(float(eval_numeric(res, EvalEnv({"u": u})))) < 1e-12


# -------------------------------------------------------------- linearity


def test_linearized_zeta_equation(evo):
    eq = evo.eq("zeta_t = D(f3(t,u)*zeta_u - f2(t,u)*zeta - f1(t,u), u) + g3(t,u)*zeta_u - g2(t,u)*zeta - g1(t,u)",
                target=True)
    assert classify_linear(eq, "zeta").kind == "linear"


# ---------------------------------------------------------------- numerics


class TestNumericExamples:
    def test_heat_short_time(self, evo):
        eq = match_evolution(evo.eq("u_t = u_xx"))
        sol = solve_mol(eq, lambda x: np.exp(-x), Grid(0.0, 1.0, 200, 0.1, 3), exact=heat_exact, rtol=1e-10, atol=1e-12)
        assert np.max(np.abs(sol.u - heat_exact(sol.t[:, None], sol.x[None, :]))) <= HEAT_MAX_ERROR

    def test_burgers_front(self, evo):
        eq = match_evolution(evo.eq("u_t + u*u_x = u_xx"))
        grid = Grid(-5.0, 5.0, 256, 0.5, 6)
        sol = solve_mol(eq, lambda x: burgers_exact(0.0, x), grid, exact=burgers_exact, rtol=1e-10, atol=1e-12)
        assert np.max(np.abs(sol.u - burgers_exact(sol.t[:, None], sol.x[None, :]))) <= BURGERS_MAX_ERROR

    def test_zero_stays_zero(self, evo):
        eq = match_evolution(evo.eq("u_t = u_xx"))
        sol = solve_mol(eq, np.zeros_like, Grid(0.0, 1.0, 32, 1.0, 4), exact=lambda t, x: 0 * x)
        assert not np.any(sol.u)

    def test_linear_profile(self):
        grid = Grid(0.0, 1.0, 64, 1.0, 2)
        field = build_eta(NumericSolution(grid, grid.t, np.tile(grid.x, (2, 1))))
        assert np.allclose(field.eta, 1.0)
        assert field.u[0] >= 0.0 and field.u[-1] <= 1.0

    def test_exponential_profile(self):
        grid = Grid(0.0, 1.0, 201, 0.5, 3)
        u = heat_exact(grid.t[:, None], grid.x[None, :])
        field = build_eta(NumericSolution(grid, grid.t, u))
        assert np.max(np.abs(field.eta + field.u[None, :])) <= 1e-8

    def test_constant_field(self, evo):
        r = residual_exact(evo.eq("eta_t = 0", target=True), evo.tgt("7"), np.linspace(0, 1, 5), np.linspace(0, 1, 5))
        assert not np.any(r)
