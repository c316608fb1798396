"""Variable declarations shared by the parser, printer and jet calculus.

Jet variables are plain symbols whose name encodes a multi-index, e.g.
``u_tx`` is the mixed second derivative of ``u`` in ``t`` and ``x``.  The
suffix lists the independent variables in their declared order, so a name
is canonical once the dependent variable's independents are fixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping


def jet_name(dep: str, counts: Iterable[int], independents: Iterable[str]) -> str:
    suffix = "".join(v * c for v, c in zip(independents, counts))
    return f"{dep}_{suffix}" if suffix else dep


def split_suffix(suffix: str, independents: Iterable[str]) -> tuple[int, ...] | None:
    """Tokenize ``suffix`` into independent-variable names; ``None`` if impossible."""
    indeps = list(independents)
    counts = [0] * len(indeps)
    by_length = sorted(range(len(indeps)), key=lambda i: -len(indeps[i]))
    pos = 0
    while pos < len(suffix):
        for i in by_length:
            if suffix.startswith(indeps[i], pos):
                counts[i] += 1
                pos += len(indeps[i])
                break
        else:
            return None
    return tuple(counts)


@dataclass(frozen=True)
class Context:
    """Identifier declarations for one family of equations.

    ``functions`` maps a name to its arity, or ``None`` when any arity is
    accepted.  ``jets`` maps each dependent variable to its ordered tuple of
    independent variables.  A name may be declared both as a symbol and as a
    function; ``a`` and ``a(t)`` then both parse.
    """

    symbols: frozenset[str] = frozenset()
    functions: Mapping[str, int | None] = field(default_factory=dict)
    jets: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    @classmethod
    def build(cls, symbols=(), functions=(), jets=None) -> Context:
        if isinstance(functions, Mapping):
            funcs = {k: (None if v is None else int(v)) for k, v in functions.items()}
        else:
            funcs = {name: None for name in functions}
        jets = {dep: tuple(ind) for dep, ind in (jets or {}).items()}
        syms = set(symbols)
        for ind in jets.values():
            syms.update(ind)
        return cls(frozenset(syms), funcs, jets)

    def merged(self, other: Context) -> Context:
        return Context(
            self.symbols | other.symbols,
            {**self.functions, **other.functions},
            {**self.jets, **other.jets},
        )

    def with_symbols(self, *names: str) -> Context:
        return Context(self.symbols | set(names), self.functions, self.jets)

    def with_jets(self, **jets: Iterable[str]) -> Context:
        new = {**self.jets, **{k: tuple(v) for k, v in jets.items()}}
        syms = set(self.symbols)
        for ind in new.values():
            syms.update(ind)
        return Context(frozenset(syms), self.functions, new)

    def resolve_jet(self, name: str) -> tuple[str, tuple[int, ...]] | None:
        """Split a jet symbol name into (dependent, counts); ``None`` if not a jet."""
        if name in self.jets:
            return name, (0,) * len(self.jets[name])
        dep, sep, suffix = name.partition("_")
        if not sep or dep not in self.jets or not suffix:
            return None
        counts = split_suffix(suffix, self.jets[dep])
        if counts is None:
            return None
        return dep, counts

    def jet(self, dep: str, counts: Iterable[int]) -> str:
        return jet_name(dep, counts, self.jets[dep])

    def is_declared(self, name: str) -> bool:
        return name in self.symbols or name in self.functions or self.resolve_jet(name) is not None


def default_context() -> Context:
    """Declarations covering the usual names of the transformations' equations."""
    return Context.build(
        symbols=["t", "x", "y", "z", "a", "b", "c", "k", "m", "n", "nu", "C", "x0", "u0", "t0", "A", "B"],
        functions=["f", "g", "h", "s", "p", "q", "a", "b", "phi", "psi",
                   "f1", "f2", "f3", "g1", "g2", "g3"],
        jets={
            "u": ("t", "x"),
            "w": ("t", "x"),
            "eta": ("t", "x", "u"),
            "zeta": ("t", "x", "u"),
            "theta": ("t", "x", "u"),
            "Z": ("t", "x", "u"),
        },
    )
