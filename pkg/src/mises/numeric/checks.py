"""Verification checks producing :class:`VerificationReport` values."""

from __future__ import annotations

import csv
from fractions import Fraction
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from ..expr.calculus import differentiate, expand, substitute
from ..expr.equality import is_zero
from ..expr.evaluate import EvalEnv, eval_numeric
from ..expr.nodes import Expr, Symbol
from ..transform.equations import Equation, EvolutionEquation
from .fd import central, half_width, trim
from .mol import NumericSolution


@dataclass
class VerificationReport:
    check_id: str
    residual_max: float
    residual_l2: float
    tolerance: float
    passed: bool
    order: float | None = None
    notes: str = ""
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        for k in ("residual_max", "residual_l2", "tolerance", "order"):
            if out[k] is not None:
                out[k] = float(f"{out[k]:.6e}")
        return out


def norms(r: np.ndarray) -> tuple[float, float]:
    r = np.asarray(r, dtype=float)
    return float(np.max(np.abs(r))), float(np.sqrt(np.mean(r**2)))


def make_report(check_id: str, r: np.ndarray, tolerance: float, notes: str = "", **details) -> VerificationReport:
    mx, l2 = norms(r)
    return VerificationReport(check_id, mx, l2, tolerance, bool(mx <= tolerance), notes=notes, details=details)


def convergence_orders(errors: Sequence[float]) -> list[float]:
    """Observed orders between consecutive grid halvings."""
    return [float(np.log2(a / b)) for a, b in zip(errors, errors[1:])]


# ------------------------------------------------------ original residual


def evolution_residual(eq: EvolutionEquation, t: np.ndarray, x: np.ndarray, u: np.ndarray,
                       functions: Mapping[str, Callable] | None = None) -> np.ndarray:
    """``u_t - s x u_x - F`` on interior nodes: 4th order in ``x``, 2nd order in ``t``."""
    ctx = eq.ctx
    jets = {ctx.direction_jet(k).name: (0, k) for k in range(4)}
    jets[ctx.jet(t=1).name] = (1, 0)
    res = ctx.jet(t=1) - eq.s * Symbol(ctx.mises_direction) * ctx.direction_jet(1) - eq.F
    return jet_residual(res, jets, t, x, u, ctx.mises_direction, functions)


def jet_residual(res: Expr, jets: Mapping[str, tuple[int, int]], t: np.ndarray, x: np.ndarray, u: np.ndarray,
                 xname: str = "x", functions: Mapping[str, Callable] | None = None) -> np.ndarray:
    """Evaluate ``res`` with jets named by ``(t-order, x-order)``; t-order at most 1.

    ``x``-derivatives use fourth-order stencils, the ``t``-derivative a
    second-order one; values are returned on the common interior.
    """
    dt, dx = float(t[1] - t[0]), float(x[1] - x[0])
    wx = 3
    values: dict[str, object] = {}
    for name, (kt, kx) in jets.items():
        f = central(u, dt, 1, axis=0) if kt else trim(u, 1, 0)
        if kx:
            values[name] = trim(central(f, dx, kx, axis=1, accuracy=4), wx - half_width(kx, 4), 1)
        else:
            values[name] = trim(f, wx, 1)
    T, X = np.meshgrid(trim(t, 1), trim(x, wx), indexing="ij")
    values["t"], values[xname] = T, X
    return np.asarray(eval_numeric(res, EvalEnv(values, dict(functions or {}))), dtype=float) * np.ones_like(T)


# ------------------------------------------------ characteristic property


def shift_solution(sol: NumericSolution, shift: Callable[[np.ndarray], np.ndarray], margin: float | None = None):
    """``u(t, x + phi(t))`` on the x-window where every shifted point stays inside the grid."""
    x = sol.x
    phi = np.asarray(shift(sol.t), dtype=float) * np.ones_like(sol.t)
    lo = x[0] + max(0.0, -phi.min()) + (margin or 0.0)
    hi = x[-1] - max(0.0, phi.max()) - (margin or 0.0)
    keep = (x >= lo) & (x <= hi)
    if keep.sum() < 16:
        raise ValueError("overlap domain too small for the requested shift")
    xs = x[keep]
    shifted = np.stack([CubicSpline(x, row)(xs + p) for row, p in zip(sol.u, phi)])
    base = sol.u[:, keep]
    return xs, base, shifted


def check_characteristic_property(
    residual: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
    sol: NumericSolution,
    shift: Callable[[np.ndarray], np.ndarray],
    check_id: str = "characteristic-shift",
    factor: float = 10.0,
) -> VerificationReport:
    """Residual of the shifted field must stay within ``factor`` times the unshifted one."""
    xs, base, shifted = shift_solution(sol, shift)
    r0 = residual(sol.t, xs, base)
    r1 = residual(sol.t, xs, shifted)
    b_max, _ = norms(r0)
    rep = make_report(check_id, r1, factor * b_max, notes="tolerance is a multiple of the unshifted residual",
                      baseline_max=float(f"{b_max:.6e}"))
    return rep


# ------------------------------------------------------------- Prandtl


def check_prandtl(
    u_star: Expr,
    v_star: Expr,
    nu: float,
    transformed: Equation,
    window: Mapping[str, tuple[float, float]],
    n: int = 12,
    functions: Mapping[str, Callable] | None = None,
    check_id: str = "prandtl-manufactured",
    tolerance: float = 1e-10,
) -> VerificationReport:
    """Manufactured-solution check of the three-variable Mises image.

    ``u_star(t, x, y)`` and ``v_star`` must satisfy continuity, and the
    forcing ``f = u_t + u u_x + v u_y - nu u_yy`` must not depend on ``y``.
    The Mises jets are evaluated from exact derivatives of ``u_star``:
    ``eta = u_y``, ``eta_t = A/u_y``, ``eta_x = B/u_y``, ``eta_u = u_yy/u_y``,
    ``eta_uu = (u_y u_yyy - u_yy^2)/u_y^3``, where ``A`` and ``B`` are the
    mixed combinations of the three-variable form.
    """
    d = lambda e, *vs: _diffs(e, vs)  # noqa: E731
    ut, ux, uy = d(u_star, "t"), d(u_star, "x"), d(u_star, "y")
    uyy, uyyy = d(u_star, "y", "y"), d(u_star, "y", "y", "y")
    uty, uxy = d(u_star, "t", "y"), d(u_star, "x", "y")
    if not is_zero(expand(ux + d(v_star, "y"))):
        raise ValueError("manufactured field violates continuity u_x + v_y = 0")
    nu_e = Symbol("nu")
    forcing = expand(ut + u_star * ux + v_star * uy - nu_e * uyy)
    forcing = substitute(forcing, {"nu": Fraction(nu).limit_denominator(10**9)})
    if "y" in forcing.free_symbols and not is_zero(differentiate(forcing, "y")):
        raise ValueError("manufactured forcing depends on y")
    A = uy * uty - ut * uyy
    B = uy * uxy - ux * uyy
    images = {
        "eta": uy,
        "eta_t": A / uy,
        "eta_x": B / uy,
        "eta_u": uyy / uy,
        "eta_uu": (uy * uyyy - uyy**2) / uy**3,
    }
    axes = [np.linspace(*window[v], n) for v in ("t", "x", "y")]
    T, X, Y = np.meshgrid(*axes, indexing="ij")
    funcs = dict(functions or {})
    base = EvalEnv({"t": T, "x": X, "y": Y, "nu": nu}, funcs)
    slope = np.asarray(eval_numeric(uy, base)) * np.ones_like(T)
    if np.min(slope) <= 0:
        raise ValueError("manufactured field is not monotone in y on the window")
    values = {name: np.asarray(eval_numeric(e, base)) * np.ones_like(T) for name, e in images.items()}
    values.update({"t": T, "x": X, "u": np.asarray(eval_numeric(u_star, base)) * np.ones_like(T), "nu": nu})
    fvals = np.asarray(eval_numeric(forcing, base)) * np.ones_like(T)
    env_funcs = dict(funcs)
    env_funcs["f"] = lambda args, derivs: fvals
    res = transformed.lhs - transformed.rhs
    r = np.asarray(eval_numeric(res, EvalEnv(values, env_funcs)), dtype=float) * np.ones_like(T)
    scale = max(1.0, float(np.max(np.abs(values["eta_t"]))))
    return make_report(check_id, r, tolerance, notes=f"nu = {nu}; exact derivatives of the manufactured field",
                       scale=float(f"{scale:.6e}"))


def _diffs(e: Expr, vs) -> Expr:
    for v in vs:
        e = differentiate(e, v)
    return e


# ---------------------------------------------------------------- CSV


def write_csv(path: str | Path, rows: Sequence[tuple[float, float, float]], header=("t", "u", "value")) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.12g}" for v in row])


def field_rows(t: np.ndarray, s: np.ndarray, values: np.ndarray):
    T, S = np.meshgrid(t, s, indexing="ij")
    return zip(T.ravel(), S.ravel(), np.asarray(values).ravel())
