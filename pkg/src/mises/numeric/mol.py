"""Method of lines for ``u_t = s(t) x u_x + F(t, u, u_x, u_xx, u_xxx)``."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from ..expr.evaluate import EvalEnv, eval_numeric
from ..expr.nodes import Expr
from ..jets import jet_order
from ..transform.equations import EvolutionEquation
from .fd import central

MIN_POINTS = 16
BLOWUP = 1e6
MONOTONICITY_FLOOR = 1e-3


class GridError(ValueError):
    """Grid parameters outside the supported range."""


class SolverError(RuntimeError):
    """The time integration failed or blew up."""


@dataclass(frozen=True)
class Grid:
    x_lo: float
    x_hi: float
    nx: int
    T: float
    nt: int = 2
    boundary: str = "dirichlet"  # or "periodic"

    def __post_init__(self):
        if self.nx < MIN_POINTS:
            raise GridError(f"grid below minimum: nx = {self.nx} < {MIN_POINTS}")
        if self.T <= 0:
            raise GridError("final time must be positive")
        if self.nt < 2:
            raise GridError("need at least two snapshot times")
        if self.boundary not in ("dirichlet", "periodic"):
            raise GridError(f"unknown boundary kind {self.boundary!r}")

    @property
    def x(self) -> np.ndarray:
        if self.boundary == "periodic":
            return np.linspace(self.x_lo, self.x_hi, self.nx, endpoint=False)
        return np.linspace(self.x_lo, self.x_hi, self.nx)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.nt)


@dataclass
class NumericSolution:
    grid: Grid
    t: np.ndarray
    u: np.ndarray  # shape (nt, nx)
    metadata: dict = field(default_factory=dict)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def min_slope(self) -> float:
        return float(np.min(np.abs(np.diff(self.u, axis=1)) / self.grid.dx))

    @property
    def monotone(self) -> bool:
        return self.min_slope() >= MONOTONICITY_FLOOR


def _compile_rhs(eq: EvolutionEquation, functions: dict[str, Callable]) -> Callable:
    ctx = eq.ctx
    names = {k: ctx.direction_jet(k).name for k in range(4)}
    s_expr: Expr = eq.s
    F = eq.F

    def rhs(t: float, u_full: np.ndarray, dx: float, x: np.ndarray, periodic: bool) -> np.ndarray:
        if periodic:
            w = 2
            ext = np.concatenate([u_full[-w:], u_full, u_full[:w]])
        else:
            w = 0
            ext = u_full
        values: dict[str, object] = {"t": t}
        derivs = {0: ext}
        for k in (1, 2, 3):
            d = central(ext, dx, k)
            pad = (len(ext) - len(d)) // 2
            full = np.full(len(ext), np.nan)
            full[pad: len(ext) - pad] = d
            derivs[k] = full
        for k, arr in derivs.items():
            values[names[k]] = arr[w: len(ext) - w] if w else arr
        values[ctx.mises_direction] = x
        env = EvalEnv(values, functions)
        out = np.asarray(eval_numeric(F, env), dtype=float) * np.ones_like(u_full)
        s = float(eval_numeric(s_expr, env)) if s_expr != 0 else 0.0
        if s:
            out = out + s * x * values[names[1]]
        return out

    return rhs


def solve_mol(
    eq: EvolutionEquation,
    ic: Callable[[np.ndarray], np.ndarray],
    grid: Grid,
    exact: Callable[[float, np.ndarray], np.ndarray] | None = None,
    functions: dict[str, Callable] | None = None,
    rtol: float = 1e-8,
    atol: float = 1e-10,
) -> NumericSolution:
    """Second-order central differences in ``x``, adaptive RK45 in time.

    With Dirichlet boundaries the outermost one (order <= 2) or two
    (order 3) nodes on each side are prescribed from ``exact``.
    """
    order = max(jet_order(eq.F, eq.ctx.source_jets, eq.ctx.dependent), 0)
    if order > 3:
        raise GridError(f"equations of order {order} > 3 are not supported")
    x = grid.x
    dx = grid.dx
    periodic = grid.boundary == "periodic"
    if not periodic and exact is None:
        raise GridError("Dirichlet boundaries need the exact solution for boundary data")
    width = 0 if periodic else (1 if order <= 2 else 2)
    rhs = _compile_rhs(eq, functions or {})
    u0 = np.asarray(ic(x), dtype=float)
    inner = slice(width, grid.nx - width) if width else slice(None)

    def full_state(t: float, interior: np.ndarray) -> np.ndarray:
        if periodic:
            return interior
        u = np.empty(grid.nx)
        u[inner] = interior
        ex = exact(t, x)
        u[:width] = ex[:width]
        u[grid.nx - width:] = ex[grid.nx - width:]
        return u

    def f(t: float, y: np.ndarray) -> np.ndarray:
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > BLOWUP:
            raise SolverError(f"blow-up detected at t = {t:.4g}")
        return rhs(t, full_state(t, y), dx, x, periodic)[inner]

    sol = solve_ivp(f, (0.0, grid.T), u0[inner], method="RK45", t_eval=grid.t, rtol=rtol, atol=atol)
    if not sol.success:
        raise SolverError(sol.message)
    u = np.stack([full_state(t, sol.y[:, k]) for k, t in enumerate(sol.t)])
    out = NumericSolution(grid, sol.t, u, {"scheme": "MOL central-2 / RK45", "dx": dx, "nfev": int(sol.nfev)})
    out.metadata["monotone"] = out.monotone
    return out
