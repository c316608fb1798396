"""Typed equation templates carried through the transformations."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..expr.nodes import ZERO, Expr, Symbol, integral, mul
from ..expr.printer import to_text
from ..jets import JetContext, dejetify


@dataclass(frozen=True)
class LogStep:
    """One applied rule; ``rule`` is a stable identifier, ``detail`` free text."""

    rule: str
    detail: str = ""


@dataclass(frozen=True, kw_only=True)
class Equation:
    """``lhs = rhs`` with no further structure."""

    lhs: Expr
    rhs: Expr = ZERO
    log: tuple[LogStep, ...] = ()

    @property
    def residual(self) -> Expr:
        return self.lhs - self.rhs

    def logged(self, rule: str, detail: str = "") -> Equation:
        return replace(self, log=self.log + (LogStep(rule, detail),))

    def with_log(self, log) -> Equation:
        return replace(self, log=tuple(log))

    def text(self) -> str:
        return f"{to_text(self.lhs)} = {to_text(self.rhs)}"

    def __str__(self) -> str:
        return self.text()


GeneralEquation = Equation


@dataclass(frozen=True, kw_only=True)
class MisesEquation(Equation):
    """Equation in Mises variables; ``unknown`` depends on ``independents``."""

    unknown: str = "eta"
    independents: tuple[str, ...] = ("t", "u")


@dataclass(frozen=True, kw_only=True)
class EvolutionEquation:
    """``u_t = s(t) x u_x + F`` with ``F`` free of ``u_t`` and of explicit ``x``."""

    F: Expr
    s: Expr = ZERO
    ctx: JetContext = field(default_factory=JetContext)
    log: tuple[LogStep, ...] = ()

    @property
    def order(self) -> int:
        from ..jets import jet_order

        return max(jet_order(self.F, self.ctx.source_jets, self.ctx.dependent), 0)

    def as_equation(self) -> Equation:
        x = Symbol(self.ctx.mises_direction)
        rhs = mul(self.s, x, self.ctx.direction_jet(1)) + self.F
        return Equation(lhs=self.ctx.jet(t=1), rhs=rhs, log=self.log)

    def __str__(self) -> str:
        return self.as_equation().text()


@dataclass(frozen=True, kw_only=True)
class BoundaryLayerEquation:
    """``u_x G_t - u_t G_x = F``; ``G`` defaults to ``u_x``."""

    F: Expr
    G: Expr | None = None
    ctx: JetContext = field(default_factory=JetContext)
    log: tuple[LogStep, ...] = ()

    @property
    def generator(self) -> Expr:
        return self.ctx.direction_jet(1) if self.G is None else self.G

    def __str__(self) -> str:
        g = to_text(self.generator)
        return f"u_x*D({g}, t) - u_t*D({g}, x) = {to_text(self.F)}"


@dataclass(frozen=True, kw_only=True)
class IntegroDiffEquation:
    """``u_t = F + u_x * int(G, z, x0, x)``.

    ``G`` is written with the ordinary jets ``u, u_x, ...``; it is read at
    the integration variable inside the integral.
    """

    F: Expr
    G: Expr
    x0: Expr = Symbol("x0")
    dummy: str = "z"
    ctx: JetContext = field(default_factory=JetContext)
    log: tuple[LogStep, ...] = ()

    def integral(self) -> Expr:
        d = self.ctx.mises_direction
        body = dejetify(self.G, self.ctx.source_jets, {d: Symbol(self.dummy)})
        return integral(body, self.dummy, self.x0, Symbol(d))

    def as_equation(self) -> Equation:
        rhs = self.F + mul(self.ctx.direction_jet(1), self.integral())
        return Equation(lhs=self.ctx.jet(t=1), rhs=rhs, log=self.log)

    def __str__(self) -> str:
        return self.as_equation().text()


@dataclass(frozen=True, kw_only=True)
class ThreeVarEquation:
    """``F = 0`` with the mixed combinations held by placeholder symbols ``A`` and ``B``.

    ``A`` stands for ``u_y u_ty - u_t u_yy`` and ``B`` for ``u_y u_xy - u_x u_yy``.
    """

    F: Expr
    ctx: JetContext = field(
        default_factory=lambda: JetContext(("t", "x", "y"), "u", mises_direction="y")
    )
    A: str = "A"
    B: str = "B"
    log: tuple[LogStep, ...] = ()

    def __str__(self) -> str:
        return f"{to_text(self.F)} = 0"


@dataclass(frozen=True, kw_only=True)
class OdeEquation:
    """Autonomous ``expr = 0`` or solved form ``expr = x`` (``solved=True``)."""

    expr: Expr
    solved: bool = False
    ctx: JetContext = field(default_factory=lambda: JetContext(("x",), "u", mises_direction="x"))
    log: tuple[LogStep, ...] = ()

    def as_equation(self) -> Equation:
        rhs = Symbol(self.ctx.mises_direction) if self.solved else ZERO
        return Equation(lhs=self.expr, rhs=rhs, log=self.log)

    def __str__(self) -> str:
        return self.as_equation().text()


@dataclass(frozen=True, kw_only=True)
class BacklundPair:
    """First relation links u-jets and eta-jets; the second is the coupling ``u_x = eta``."""

    relation1: Equation
    relation2: Equation
    cite: str = ""

    def __str__(self) -> str:
        return f"{self.relation1.text()}; {self.relation2.text()}"


def coupling(ctx: JetContext) -> Equation:
    return Equation(lhs=ctx.direction_jet(1), rhs=ctx.eta())


__all__ = [
    "BacklundPair", "BoundaryLayerEquation", "Equation", "EvolutionEquation", "GeneralEquation",
    "IntegroDiffEquation", "LogStep", "MisesEquation", "OdeEquation", "ThreeVarEquation", "coupling",
]
