"""The Mises field ``eta(t, u)`` built from a numeric solution, and residuals on it."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline, PchipInterpolator

from ..expr.calculus import differentiate
from ..expr.evaluate import EvalEnv, eval_numeric
from ..expr.nodes import Expr
from ..jets import resolve
from ..transform.equations import Equation
from .fd import central, half_width, trim
from .mol import MONOTONICITY_FLOOR, NumericSolution


class MonotonicityError(ValueError):
    """A snapshot is not strictly monotone in x, so the Mises map is undefined."""


@dataclass
class EtaField:
    t: np.ndarray
    u: np.ndarray
    eta: np.ndarray  # shape (len(t), len(u))
    method: str = "hermite"

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def du(self) -> float:
        return float(self.u[1] - self.u[0])


def build_eta(sol: NumericSolution, nu: int | None = None, method: str = "hermite",
              floor: float = MONOTONICITY_FLOOR) -> EtaField:
    """Resample the pairs ``(u, u_x)`` of every snapshot onto a common uniform ``u`` grid.

    ``u_x`` and ``u_xx`` come from fourth-order central differences.  The
    default ``hermite`` interpolant uses the exact slope ``d eta/du =
    u_xx/u_x`` at every node; ``pchip`` is the shape-preserving
    alternative, which flattens interior extrema of ``eta(u)``.
    """
    dx = sol.grid.dx
    w = 2
    pairs = []
    for k, row in enumerate(sol.u):
        ux = central(row, dx, 1, accuracy=4)
        uxx = central(row, dx, 2, accuracy=4)
        uu = trim(row, w)
        if np.min(np.abs(ux)) < floor or not (np.all(ux > 0) or np.all(ux < 0)):
            raise MonotonicityError(f"snapshot {k} (t = {sol.t[k]:.4g}) violates the monotonicity floor {floor}")
        order = np.argsort(uu)
        pairs.append((uu[order], ux[order], (uxx / ux)[order]))
    lo = max(p[0][0] for p in pairs)
    hi = min(p[0][-1] for p in pairs)
    if not hi > lo:
        raise MonotonicityError("snapshot u-ranges do not overlap")
    n = nu or sol.grid.nx
    ugrid = np.linspace(lo, hi, n)
    eta = np.empty((len(pairs), n))
    for k, (uu, ux, slope) in enumerate(pairs):
        if method == "hermite":
            eta[k] = CubicHermiteSpline(uu, ux, slope)(ugrid)
        elif method == "pchip":
            eta[k] = PchipInterpolator(uu, ux)(ugrid)
        else:
            raise ValueError(f"unknown interpolation method {method!r}")
    return EtaField(np.asarray(sol.t, dtype=float), ugrid, eta, method)


def _eta_jets(expr: Expr, unknown: str, independents: tuple[str, ...]):
    jets = {unknown: independents}
    found = {}
    for name in expr.free_symbols:
        hit = resolve(name, jets)
        if hit is not None:
            found[name] = hit[1]
    return found


def residual_field(eq: Equation, field: EtaField, unknown: str = "eta",
                   independents: tuple[str, ...] = ("t", "u"),
                   functions: Mapping[str, Callable] | None = None) -> np.ndarray:
    """``lhs - rhs`` of ``eq`` on the interior nodes, derivatives by second-order differences."""
    res = eq.lhs - eq.rhs
    jets = _eta_jets(res, unknown, independents)
    ti, ui = independents.index("t"), independents.index("u")
    max_t = max((c[ti] for c in jets.values()), default=0)
    max_u = max((c[ui] for c in jets.values()), default=0)
    if max_t > 1 or max_u > 3 or any(c[ti] and c[ui] for c in jets.values()):
        raise ValueError("only eta_t and u-derivatives up to third order are supported")
    wt = 1 if max_t else 0
    wu = half_width(3) if max_u == 3 else (1 if max_u else 0)
    wu = max(wu, 1)
    values: dict[str, object] = {}
    base = trim(trim(field.eta, wt, 0), wu, 1)
    for name, counts in jets.items():
        if counts[ti]:
            arr = trim(central(field.eta, field.dt, 1, axis=0), wu, 1)
        elif counts[ui]:
            k = counts[ui]
            d = central(field.eta, field.du, k, axis=1)
            arr = trim(trim(d, wu - half_width(k), 1), wt, 0)
        else:
            arr = base
        values[name] = arr
    T, U = np.meshgrid(trim(field.t, wt), trim(field.u, wu), indexing="ij")
    values["t"], values["u"] = T, U
    out = eval_numeric(res, EvalEnv(values, dict(functions or {})))
    return np.asarray(out, dtype=float) * np.ones_like(T)


def residual_exact(eq: Equation, eta_expr: Expr, t: np.ndarray, u: np.ndarray, unknown: str = "eta",
                   independents: tuple[str, ...] = ("t", "u"),
                   functions: Mapping[str, Callable] | None = None) -> np.ndarray:
    """Residual of ``eq`` for a closed-form field, with exact symbolic derivatives."""
    res = eq.lhs - eq.rhs
    T, U = np.meshgrid(t, u, indexing="ij")
    values: dict[str, object] = {"t": T, "u": U}
    for name, counts in _eta_jets(res, unknown, independents).items():
        d = eta_expr
        for v, c in zip(independents, counts):
            for _ in range(c):
                d = differentiate(d, v)
        values[name] = np.asarray(eval_numeric(d, EvalEnv({"t": T, "u": U}, dict(functions or {})))) * np.ones_like(T)
    out = eval_numeric(res, EvalEnv(values, dict(functions or {})))
    return np.asarray(out, dtype=float) * np.ones_like(T)


def closure_deviation(sol: NumericSolution, field: EtaField, eta_min: float = 0.05) -> float:
    """Largest deviation of ``int du/eta`` from ``x`` plus a per-snapshot constant.

    For each snapshot, ``1/eta`` is represented by a cubic spline in ``u``
    and integrated exactly; the antiderivative at the solution's nodal
    values must match the nodal ``x`` up to an additive constant.  Only
    nodes where ``|eta| >= eta_min`` enter, since ``1/eta`` is steep near
    the ends of the profile.
    """
    worst = 0.0
    x = sol.x
    for k in range(len(field.t)):
        eta = field.eta[k]
        keep = np.abs(eta) >= eta_min
        if keep.sum() < 4:
            continue
        ug, inv = field.u[keep], 1.0 / eta[keep]
        anti = CubicSpline(ug, inv).antiderivative()
        row = sol.u[k]
        inside = (row >= ug[0]) & (row <= ug[-1])
        if inside.sum() < 2:
            continue
        X = anti(row[inside])
        dev = X - x[inside]
        dev = dev - dev.mean()
        worst = max(worst, float(np.max(np.abs(dev))))
    return worst
