"""Pratt parser for the equation DSL.

Grammar summary (``docs/dsl.md`` has the full description)::

    equation   := expr '=' expr
    expr       := number | name | jet | call | '(' expr ')'
                | '-' expr | expr ('+'|'-'|'*'|'/'|'^') expr
    jet        := dep '_' suffix [ '^(' k ')' ]       u_x, u_tx, u_x^(4)
    call       := fname ['\\''... | '^(' i,j,... ')'] '(' args ')'
                | 'int(' expr ',' dummy ',' lo ',' hi ')'
                | 'D(' expr ',' var {',' var} ')'

Inside ``int(e, z, lo, x)``, the dependent variables whose independents
include ``x`` are read at the dummy point: ``u`` means ``u(t,z)`` and
``u_z`` its derivative in the integration variable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .context import Context, split_suffix
from .nodes import Expr, Symbol, func, integral, num, power


class ParseError(ValueError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


_TOKEN = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d+)?)"
    r"|(?P<name>[A-Za-z][A-Za-z0-9]*(?:_[A-Za-z0-9]+)?)"
    r"|(?P<op>[-+*/^(),=']))"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


_BINARY = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_UNARY_BP = 25


@dataclass
class _Scope:
    """Dependent variables re-read at an integration dummy."""

    dummy: str
    hi: str
    deps: dict[str, tuple[str, ...]]


class Parser:
    def __init__(self, text: str, context: Context):
        self.text = text
        self.ctx = context
        self.tokens = tokenize(text)
        self.i = 0
        self.scopes: list[_Scope] = []

    # token helpers
    def peek(self, k: int = 0) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.pos)
        return self.advance()

    def parse_expr(self, rbp: int = 0) -> Expr:
        left = self.nud(self.advance())
        while True:
            tok = self.peek()
            lbp = _BINARY.get(tok.text, 0) if tok.kind == "op" else 0
            if lbp <= rbp:
                return left
            self.advance()
            if tok.text == "^":
                right = self.parse_expr(lbp - 1)
                left = power(left, right)
            else:
                right = self.parse_expr(lbp)
                left = {
                    "+": lambda a, b: a + b,
                    "-": lambda a, b: a - b,
                    "*": lambda a, b: a * b,
                    "/": lambda a, b: self._divide(a, b, tok),
                }[tok.text](left, right)

    def _divide(self, a: Expr, b: Expr, tok: Token) -> Expr:
        try:
            return a / b
        except ZeroDivisionError:
            raise ParseError("division by zero", tok.pos) from None

    def nud(self, tok: Token) -> Expr:
        if tok.kind == "number":
            return num(Fraction(tok.text))
        if tok.text == "-":
            return -self.parse_expr(_UNARY_BP)
        if tok.text == "+":
            return self.parse_expr(_UNARY_BP)
        if tok.text == "(":
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if tok.kind == "name":
            return self.identifier(tok)
        raise ParseError(f"unexpected {tok.text or 'end of input'!r}", tok.pos)

    # identifiers
    def identifier(self, tok: Token) -> Expr:
        name = tok.text
        nxt = self.peek()
        if name == "int" and nxt.text == "(":
            return self.parse_integral(tok)
        if name == "D" and nxt.text == "(":
            return self.parse_total_derivative(tok)
        callable_name = name in self.ctx.functions or name in self.ctx.jets
        if callable_name and nxt.text == "'":
            order = 0
            while self.peek().text == "'":
                self.advance()
                order += 1
            args = self.call_args()
            if len(args) != 1:
                raise ParseError(f"prime notation needs a one-argument function, got {name} of arity {len(args)}", tok.pos)
            return self.make_call(name, args, (order,), tok)
        if callable_name and nxt.text == "^" and self._is_index_then_call():
            self.advance()
            index = self.int_list()
            args = self.call_args()
            return self.make_call(name, args, index, tok)
        if callable_name and nxt.text == "(":
            args = self.call_args()
            return self.make_call(name, args, None, tok)
        return self.symbol(tok)

    def _is_index_then_call(self) -> bool:
        # '^' '(' INT {',' INT} ')' '('
        k = 1
        if self.peek(k).text != "(":
            return False
        k += 1
        while True:
            if self.peek(k).kind != "number" or "." in self.peek(k).text:
                return False
            k += 1
            if self.peek(k).text == ",":
                k += 1
                continue
            break
        return self.peek(k).text == ")" and self.peek(k + 1).text == "("

    def int_list(self) -> tuple[int, ...]:
        self.expect("(")
        out = [int(self.advance().text)]
        while self.peek().text == ",":
            self.advance()
            out.append(int(self.advance().text))
        self.expect(")")
        return tuple(out)

    def call_args(self) -> list[Expr]:
        self.expect("(")
        args = [self.parse_expr()]
        while self.peek().text == ",":
            self.advance()
            args.append(self.parse_expr())
        self.expect(")")
        return args

    def make_call(self, name: str, args: list[Expr], derivs, tok: Token) -> Expr:
        if name in self.ctx.jets:
            arity = len(self.ctx.jets[name])
        else:
            arity = self.ctx.functions.get(name)
        if arity is not None and len(args) != arity:
            raise ParseError(f"{name} expects {arity} argument(s), got {len(args)}", tok.pos)
        if derivs is not None and len(derivs) != len(args):
            raise ParseError(f"malformed derivative index for {name}", tok.pos)
        return func(name, args, derivs)

    def symbol(self, tok: Token) -> Expr:
        name = tok.text
        for scope in reversed(self.scopes):
            if name == scope.dummy:
                return Symbol(name)
            hit = self._scoped_jet(name, scope, tok)
            if hit is not None:
                return hit
        dep, sep, suffix = name.partition("_")
        if sep:
            if dep not in self.ctx.jets:
                raise ParseError(f"undeclared identifier {name!r}", tok.pos)
            counts = split_suffix(suffix, self.ctx.jets[dep])
            if counts is None:
                raise ParseError(f"malformed derivative index {suffix!r} for {dep}", tok.pos)
            counts = self._order_suffix(dep, counts, tok)
            return Symbol(self.ctx.jet(dep, counts))
        if name in self.ctx.symbols or name in self.ctx.jets:
            return Symbol(name)
        raise ParseError(f"undeclared identifier {name!r}", tok.pos)

    def _order_suffix(self, dep: str, counts: tuple[int, ...], tok: Token) -> tuple[int, ...]:
        # u_x^(k): k-th derivative in a single direction
        if self.peek().text != "^" or self.peek(1).text != "(":
            return counts
        k_tok, close = self.peek(2), self.peek(3)
        if k_tok.kind != "number" or "." in k_tok.text or close.text != ")":
            return counts
        if sum(1 for c in counts if c) != 1 or sum(counts) != 1:
            raise ParseError(f"order suffix ^(k) needs a single first-order direction on {dep}", tok.pos)
        self.i += 4
        return tuple(int(k_tok.text) if c else 0 for c in counts)

    def _scoped_jet(self, name: str, scope: _Scope, tok: Token) -> Expr | None:
        dep, sep, suffix = name.partition("_")
        if dep not in scope.deps:
            return None
        inner = scope.deps[dep]
        args = [Symbol(v) for v in inner]
        if not sep:
            return func(dep, args)
        counts = split_suffix(suffix, inner)
        if counts is None:
            # names the outer variable, e.g. u_x inside an integral over z
            return None
        counts = self._order_suffix(dep, counts, tok)
        return func(dep, args, counts)

    def parse_integral(self, tok: Token) -> Expr:
        dummy, hi = self._scan_integral_header()
        deps = {}
        if dummy is not None and hi is not None:
            for dep, indeps in self.ctx.jets.items():
                if hi in indeps:
                    deps[dep] = tuple(dummy if v == hi else v for v in indeps)
        self.expect("(")
        self.scopes.append(_Scope(dummy or "", hi or "", deps))
        try:
            body = self.parse_expr()
        finally:
            self.scopes.pop()
        self.expect(",")
        var_tok = self.advance()
        if var_tok.kind != "name" or "_" in var_tok.text:
            raise ParseError("integration variable must be a plain identifier", var_tok.pos)
        self.expect(",")
        lo = self.parse_expr()
        self.expect(",")
        hi_expr = self.parse_expr()
        self.expect(")")
        return integral(body, var_tok.text, lo, hi_expr)

    def _scan_integral_header(self) -> tuple[str | None, str | None]:
        depth = 0
        commas: list[int] = []
        k = self.i
        while k < len(self.tokens):
            t = self.tokens[k].text
            if t == "(":
                depth += 1
            elif t == ")":
                depth -= 1
                if depth == 0:
                    break
            elif t == "," and depth == 1:
                commas.append(k)
            k += 1
        if len(commas) != 3:
            raise ParseError("int() takes (integrand, variable, lower, upper)", self.peek().pos)
        dummy_tok = self.tokens[commas[0] + 1]
        dummy = dummy_tok.text if commas[1] == commas[0] + 2 else None
        hi = self.tokens[commas[2] + 1].text if k == commas[2] + 2 else None
        if hi is not None and hi not in self.ctx.symbols:
            hi = None
        return dummy, hi

    def parse_total_derivative(self, tok: Token) -> Expr:
        from ..jets import total_derivative_all

        self.expect("(")
        body = self.parse_expr()
        variables = []
        while self.peek().text == ",":
            self.advance()
            v = self.advance()
            if v.kind != "name" or v.text not in self.ctx.symbols:
                raise ParseError(f"D() direction must be a declared variable, got {v.text!r}", v.pos)
            variables.append(v.text)
        self.expect(")")
        if not variables:
            raise ParseError("D() needs at least one direction", tok.pos)
        for v in variables:
            body = total_derivative_all(body, v, self.ctx.jets)
        return body


def parse(text: str, context: Context) -> Expr:
    """Parse ``text`` into a canonical expression."""
    p = Parser(text, context)
    out = p.parse_expr()
    if p.peek().kind != "end":
        tok = p.peek()
        raise ParseError(f"unexpected {tok.text!r}", tok.pos)
    return out


def parse_equation(text: str, context: Context) -> tuple[Expr, Expr]:
    """Parse ``lhs = rhs``; returns the two canonical sides."""
    p = Parser(text, context)
    lhs = p.parse_expr()
    p.expect("=")
    rhs = p.parse_expr()
    if p.peek().kind != "end":
        tok = p.peek()
        raise ParseError(f"unexpected {tok.text!r}", tok.pos)
    return lhs, rhs

