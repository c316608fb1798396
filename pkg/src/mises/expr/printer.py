"""Render expressions in the same DSL the parser reads."""

from __future__ import annotations

from fractions import Fraction

from .nodes import Expr, FuncApp, Integral, Power, Product, Rational, Sum, Symbol

_SUM, _NEG, _PROD, _POW, _ATOM = range(1, 6)


def _is_negative_exp(e: Expr) -> bool:
    if isinstance(e, Rational):
        return e.value < 0
    if isinstance(e, Product):
        c, _ = e.split_coeff()
        return c < 0
    return False


def _paren(text: str, prec: int, need: int) -> str:
    return f"({text})" if prec < need else text


def _fmt(e: Expr) -> tuple[str, int]:
    if isinstance(e, Rational):
        v = e.value
        if v.denominator == 1:
            return str(v.numerator), (_ATOM if v >= 0 else _NEG)
        return f"{v.numerator}/{v.denominator}", (_PROD if v > 0 else _NEG)
    if isinstance(e, Symbol):
        return e.name, _ATOM
    if isinstance(e, FuncApp):
        return _fmt_func(e), _ATOM
    if isinstance(e, Integral):
        parts = [_fmt(e.integrand)[0], e.var, _fmt(e.lo)[0], _fmt(e.hi)[0]]
        return f"int({', '.join(parts)})", _ATOM
    if isinstance(e, Sum):
        return _fmt_sum(e), _SUM
    if isinstance(e, Product):
        return _fmt_product(e)
    if isinstance(e, Power):
        if _is_negative_exp(e.exp):
            return _fmt_product(Product((e,)))
        return _fmt_power(e.base, e.exp), _POW
    raise TypeError(type(e))


def _fmt_func(e: FuncApp) -> str:
    args = ", ".join(_fmt(a)[0] for a in e.args)
    if not any(e.derivs):
        return f"{e.name}({args})"
    if len(e.args) == 1 and e.derivs[0] <= 3:
        return f"{e.name}{chr(39) * e.derivs[0]}({args})"
    index = ",".join(str(d) for d in e.derivs)
    return f"{e.name}^({index})({args})"


def _fmt_power(base: Expr, exp: Expr) -> str:
    b, bp = _fmt(base)
    b = _paren(b, bp, _ATOM)
    if isinstance(exp, Rational) and exp.is_integer:
        return f"{b}^{exp.value.numerator}"
    return f"{b}^({_fmt(exp)[0]})"


def _fmt_sum(e: Sum) -> str:
    terms = [t for t in e.terms if not isinstance(t, Rational)]
    terms += [t for t in e.terms if isinstance(t, Rational)]
    out = []
    for i, t in enumerate(terms):
        neg = _coeff(t) < 0
        text, prec = _fmt(-t if (neg and i) else t)
        if i == 0:
            out.append(text)
        else:
            out.append(f" - {_paren(text, prec, _PROD)}" if neg else f" + {text}")
    return "".join(out)


def _coeff(t: Expr) -> Fraction:
    if isinstance(t, Rational):
        return t.value
    if isinstance(t, Product):
        return t.split_coeff()[0]
    return Fraction(1)


def _fmt_product(e: Product) -> tuple[str, int]:
    c, _ = e.split_coeff()
    if c < 0:
        text, prec = _fmt(-e)
        return "-" + _paren(text, prec, _PROD), _NEG
    num: list[str] = []
    den: list[str] = []
    if c.numerator != 1:
        num.append(str(c.numerator))
    if c.denominator != 1:
        den.append(str(c.denominator))
    for f in e.factors:
        if isinstance(f, Rational):
            continue
        if isinstance(f, Power) and _is_negative_exp(f.exp):
            inv = f.base if f.exp == Rational(-1) else None
            text = _fmt(inv)[0] if inv is not None else _fmt_power(f.base, -f.exp)
            prec = _fmt(inv)[1] if inv is not None else _POW
            den.append(_paren(text, prec, _POW if len(e.factors) > 1 or den else _PROD))
        else:
            text, prec = _fmt(f)
            num.append(_paren(text, prec, _PROD + 1 if prec == _NEG else _PROD))
    numerator = "*".join(num) if num else "1"
    if not den:
        return numerator, _PROD
    denominator = den[0] if len(den) == 1 else "(" + "*".join(den) + ")"
    return f"{numerator}/{denominator}", _PROD


def to_text(e: Expr) -> str:
    return _fmt(e)[0]
