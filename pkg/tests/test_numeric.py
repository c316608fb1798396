import numpy as np
import pytest

from mises.expr import default_context, diff, expand, parse, substitute
from mises.numeric import checks, suites
from mises.numeric.eta import MonotonicityError, build_eta, closure_deviation, residual_exact, residual_field
from mises.numeric.fd import central, half_width, trim
from mises.numeric.mol import Grid, GridError, NumericSolution, solve_mol
from mises.transform import Equation, match_evolution, rf_pair_evolution

from oracles import (
    CUBIC_PROFILE_SPOT,
    HEAT_MAX_ERROR,
    PRANDTL_FORCING,
    PRANDTL_POINT,
    PRANDTL_U,
    burgers_exact,
    heat_exact,
    sqrt_eta,
)


def frozen(grid, fn):
    t = grid.t
    return NumericSolution(grid, t, fn(t[:, None], grid.x[None, :]))


class TestStencils:
    @pytest.mark.parametrize("accuracy, expected_order", [(2, 2), (4, 4)])
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_order_of_accuracy(self, k, accuracy, expected_order):
        errs = []
        for n in (40, 80):
            x = np.linspace(0, 1, n + 1)
            d = central(np.sin(x), x[1] - x[0], k, accuracy=accuracy)
            exact = trim(np.sin(x + k * np.pi / 2), half_width(k, accuracy))
            errs.append(np.max(np.abs(d - exact)))
        assert np.log2(errs[0] / errs[1]) == pytest.approx(expected_order, abs=0.3)

    def test_trim_zero(self):
        assert trim(np.arange(4), 0).tolist() == [0, 1, 2, 3]


class TestGrid:
    @pytest.mark.parametrize("kwargs", [dict(nx=8), dict(T=0.0), dict(nt=1), dict(boundary="wall")])
    def test_rejects(self, kwargs):
        args = dict(x_lo=0.0, x_hi=1.0, nx=32, T=1.0, nt=5) | kwargs
        with pytest.raises(GridError):
            Grid(**args)

    def test_periodic_excludes_endpoint(self):
        g = Grid(0.0, 1.0, 16, 1.0, boundary="periodic")
        assert g.x[-1] < 1.0 and g.dx == pytest.approx(1 / 16)


class TestSolver:
    def test_heat_against_exact(self, evo):
        eq = match_evolution(evo.eq("u_t = u_xx"))
        grid = Grid(0.0, 1.0, 101, 0.5, 6)
        sol = solve_mol(eq, lambda x: heat_exact(0.0, x), grid, exact=heat_exact, rtol=1e-10, atol=1e-12)
        err = np.max(np.abs(sol.u - heat_exact(sol.t[:, None], sol.x[None, :])))
        assert err < HEAT_MAX_ERROR

    def test_needs_boundary_data(self, evo):
        eq = match_evolution(evo.eq("u_t = u_xx"))
        with pytest.raises(GridError):
            solve_mol(eq, np.sin, Grid(0.0, 1.0, 32, 1.0))

    def test_rejects_fourth_order(self, evo):
        eq = match_evolution(evo.eq("u_t = u_xxxx"))
        with pytest.raises(GridError):
            solve_mol(eq, np.sin, Grid(0.0, 1.0, 32, 1.0), exact=lambda t, x: np.sin(x))

    def test_periodic_advection(self, evo):
        eq = match_evolution(evo.eq("u_t = u_x"))
        grid = Grid(0.0, 2 * np.pi, 128, 0.5, 3, boundary="periodic")
        sol = solve_mol(eq, np.sin, grid, rtol=1e-10, atol=1e-12)
        assert np.max(np.abs(sol.u[-1] - np.sin(grid.x + 0.5))) < 1e-3


@pytest.fixture(scope="module")
def front():
    grid = Grid(-5.0, 5.0, 201, 0.5, 51)
    sol = frozen(grid, burgers_exact)
    return sol, build_eta(sol)


class TestEtaField:
    def test_cubic_profile(self):
        grid = Grid(-2.0, 2.0, 401, 1.0, 2)
        field = build_eta(frozen(grid, lambda t, x: x**3 + x + 0 * t))
        value = np.interp(CUBIC_PROFILE_SPOT["u"], field.u, field.eta[0])
        assert value == pytest.approx(CUBIC_PROFILE_SPOT["eta"], abs=1e-4)

    def test_pchip_variant(self):
        grid = Grid(-2.0, 2.0, 401, 1.0, 2)
        field = build_eta(frozen(grid, lambda t, x: x**3 + x + 0 * t), method="pchip")
        assert np.interp(2.0, field.u, field.eta[0]) == pytest.approx(4.0, abs=1e-3)

    def test_rejects_non_monotone(self):
        grid = Grid(-2.0, 2.0, 64, 1.0, 2)
        with pytest.raises(MonotonicityError):
            build_eta(frozen(grid, lambda t, x: x**2 + 0 * t))

    def test_unknown_method(self):
        grid = Grid(-2.0, 2.0, 64, 1.0, 2)
        with pytest.raises(ValueError):
            build_eta(frozen(grid, lambda t, x: x + 0 * t), method="linear")

    def test_burgers_image_and_closure(self, evo, front):
        mises, _ = rf_pair_evolution(match_evolution(evo.eq("u_t + u*u_x = u_xx")))
        sol, field = front
        assert np.max(np.abs(residual_field(mises, field))) < 5e-3
        assert closure_deviation(sol, field) < 1e-3

    def test_wrong_image_detected(self, evo, front):
        wrong = evo.eq("eta_t = eta^2*eta_uu + eta^2", target=True)
        assert np.max(np.abs(residual_field(wrong, front[1]))) > 0.1

    def test_exact_residual(self, evo):
        eq = evo.eq("eta_t = 2*t", target=True)
        eta = parse("t^2 + u", default_context().with_symbols("u"))
        grid = np.linspace(0, 1, 9)
        assert np.max(np.abs(residual_exact(eq, eta, grid, grid))) < 1e-14


class TestReports:
    def test_norms_and_orders(self):
        assert checks.norms(np.array([3.0, -4.0])) == (4.0, pytest.approx(np.sqrt(12.5)))
        assert checks.convergence_orders([4.0, 1.0, 0.25]) == [2.0, 2.0]

    def test_report_dict_rounding(self):
        rep = checks.make_report("x", np.array([1.23456789e-3]), 1e-2, note=1)
        d = rep.to_dict()
        assert d["residual_max"] == 1.234568e-3 and d["passed"] is True and d["details"] == {"note": 1}


@pytest.fixture(scope="module")
def transformed():
    return suites.prandtl_transformed()


class TestPrandtl:
    def _field(self):
        ctx = default_context()
        return parse(PRANDTL_U, ctx), parse(suites._prandtl_family()[1], ctx)

    @pytest.mark.parametrize("nu", [0, 1])
    def test_forcing_matches_oracle(self, nu):
        u, v = self._field()
        f = expand(diff(u, "t") + u * diff(u, "x") + v * diff(u, "y") - nu * diff(u, "y", "y"))
        t0, x0 = PRANDTL_POINT
        value = substitute(f, {"t": t0, "x": x0, "y": 0})
        assert value == parse(f"{PRANDTL_FORCING[nu].numerator}/{PRANDTL_FORCING[nu].denominator}", default_context())

    def test_wrong_forcing_fails(self, transformed):
        u, v = self._field()
        shifted = Equation(lhs=transformed.lhs, rhs=transformed.rhs + parse("1", default_context()))
        window = {"t": (0.0, 1.0), "x": (0.0, 1.0), "y": (0.0, 1.0)}
        rep = checks.check_prandtl(u, v, 0.0, shifted, window, n=6)
        assert not rep.passed

    def test_continuity_violation(self, transformed):
        ctx = default_context()
        with pytest.raises(ValueError, match="continuity"):
            checks.check_prandtl(parse("y + x", ctx), parse("0", ctx), 0.0, transformed,
                                 {"t": (0, 1), "x": (0, 1), "y": (0, 1)})

    def test_y_dependent_forcing(self, transformed):
        ctx = default_context()
        with pytest.raises(ValueError, match="depends on y"):
            checks.check_prandtl(parse("y^3", ctx), parse("0", ctx), 1.0, transformed,
                                 {"t": (0, 1), "x": (0, 1), "y": (1, 2)})

    def test_non_monotone(self, transformed):
        ctx = default_context()
        with pytest.raises(ValueError, match="monotone"):
            checks.check_prandtl(parse("-y", ctx), parse("0", ctx), 0.0, transformed,
                                 {"t": (0, 1), "x": (0, 1), "y": (0, 1)})


def test_exact_eta_suite_small_grid():
    (rep,) = suites.example3_exact(n=16)
    assert rep.passed and rep.residual_max <= suites.EXACT_TOL


def test_exact_eta_oracle_by_differences():
    # independent route: (eta eta_u)_t by nested central differences of the numpy oracle
    t, u = np.meshgrid(np.linspace(0.2, 1.0, 41), np.linspace(0.2, 1.0, 41), indexing="ij")
    h = 1e-4
    flux = lambda t, u: sqrt_eta(t, u) * (sqrt_eta(t, u + h) - sqrt_eta(t, u - h)) / (2 * h)  # noqa: E731
    dt = (flux(t + h, u) - flux(t - h, u)) / (2 * h)
    assert np.max(np.abs(dt - 1.0)) < 1e-5


def test_suite_passed_honours_controls():
    good = checks.VerificationReport("a", 0, 0, 1, True)
    control = checks.VerificationReport("b", 1, 1, 0, False, details={"expect_fail": True})
    assert suites.suite_passed([good, control])
    assert not suites.suite_passed([good, checks.VerificationReport("c", 1, 1, 0, False)])


def test_csv_writer(tmp_path):
    path = tmp_path / "f.csv"
    checks.write_csv(path, checks.field_rows(np.array([0.0, 1.0]), np.array([2.0]), np.array([[3.0], [4.0]])))
    assert path.read_text().splitlines() == ["t,u,value", "0,2,3", "1,2,4"]
