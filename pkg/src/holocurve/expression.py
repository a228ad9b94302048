"""Expression trees over complex constants, variables, + - * /, integer
powers, ``exp`` and ``log``, with a text parser/printer and jet evaluation.

The text grammar::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := ('-' | '+') unary | power
    power    := atom ['^' exponent]
    exponent := ['-' | '+'] INT | '(' ['-' | '+'] INT ')'
    atom     := NUMBER | 'i' | NAME | FUNC '(' expr ')' | '(' expr ')'

``FUNC`` is ``exp`` or ``log``; ``i`` is the imaginary unit; any other
name is a variable.  :func:`to_text` prints a form that :func:`parse`
reads back to an identical tree.
"""

from __future__ import annotations

import cmath
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from holocurve.errors import ExpressionSyntaxError, SingularPointError
from holocurve.jets import SINGULAR_TOLERANCE, Jet

__all__ = [
    "Expression",
    "Const",
    "Var",
    "Neg",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "Call",
    "parse",
    "to_text",
    "evaluate",
    "jet_eval",
    "curve_jet",
    "substitute",
    "free_variables",
    "as_polynomial",
    "FUNCTIONS",
]

FUNCTIONS = ("exp", "log")


class Expression:
    """Base node.  Supports Python operators for building trees in code."""

    def __add__(self, other):
        return Add(self, _wrap(other))

    def __radd__(self, other):
        return Add(_wrap(other), self)

    def __sub__(self, other):
        return Sub(self, _wrap(other))

    def __rsub__(self, other):
        return Sub(_wrap(other), self)

    def __mul__(self, other):
        return Mul(self, _wrap(other))

    def __rmul__(self, other):
        return Mul(_wrap(other), self)

    def __truediv__(self, other):
        return Div(self, _wrap(other))

    def __rtruediv__(self, other):
        return Div(_wrap(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, n: int):
        return Pow(self, int(n))

    def __str__(self) -> str:
        return to_text(self)

    def jet(self, z, order: int) -> Jet:
        """Jet in the variable ``z`` at (an array of) base points."""
        return jet_eval(self, z, order)


def _wrap(value) -> Expression:
    if isinstance(value, Expression):
        return value
    if isinstance(value, str):
        return parse(value)
    return Const(complex(value))


@dataclass(frozen=True, eq=True)
class Const(Expression):
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))


@dataclass(frozen=True, eq=True)
class Var(Expression):
    name: str


@dataclass(frozen=True, eq=True)
class Neg(Expression):
    arg: Expression


@dataclass(frozen=True, eq=True)
class Add(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True, eq=True)
class Sub(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True, eq=True)
class Mul(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True, eq=True)
class Div(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True, eq=True)
class Pow(Expression):
    base: Expression
    exponent: int


@dataclass(frozen=True, eq=True)
class Call(Expression):
    func: str
    arg: Expression

    def __post_init__(self):
        if self.func not in FUNCTIONS:
            raise ValueError(f"unknown function {self.func!r}")


_BINARY = {Add: "+", Sub: "-", Mul: "*", Div: "/"}

# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionSyntaxError(f"unexpected character {text[bad]!r}", text, bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message: str, tok=None):
        tok = tok or self.peek()
        if tok[0] == "end":
            message = f"{message} (unexpected end of input)"
        raise ExpressionSyntaxError(message, self.text, tok[2])

    def expect_op(self, op: str):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != op:
            self.fail(f"expected {op!r}, found {tok[1]!r}" if tok[1] else f"expected {op!r}")
        return self.take()

    def parse(self) -> Expression:
        if self.peek()[0] == "end":
            self.fail("empty expression")
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return node

    def expr(self) -> Expression:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Expression:
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            rhs = self.unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def unary(self) -> Expression:
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return Neg(self.unary())
        if tok[0] == "op" and tok[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> int:
        paren = False
        if self.peek() == ("op", "(", self.peek()[2]):
            self.take()
            paren = True
        sign = 1
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            sign = -1 if tok[1] == "-" else 1
        tok = self.peek()
        if tok[0] != "num" or not tok[1].isdigit():
            self.fail("exponent must be an integer literal")
        self.take()
        if paren:
            self.expect_op(")")
        return sign * int(tok[1])

    def atom(self) -> Expression:
        tok = self.peek()
        kind, text, _ = tok
        if kind == "num":
            self.take()
            return Const(float(text))
        if kind == "name":
            self.take()
            if text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            if text == "i":
                return Const(1j)
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "(":
                self.fail(f"unknown function {text!r}; expected one of {', '.join(FUNCTIONS)}", tok)
            return Var(text)
        if kind == "op" and text == "(":
            self.take()
            node = self.expr()
            self.expect_op(")")
            return node
        self.fail(f"unexpected {text!r}" if text else "expected an operand")


def parse(text: str) -> Expression:
    """Parse expression text; raises :class:`ExpressionSyntaxError`."""
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# printing


def _real_text(x: float) -> str:
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _const_text(value: complex) -> str:
    if value == 1j:
        return "i"
    re_, im = value.real, value.imag
    if im == 0 and re_ >= 0:
        return _real_text(re_)
    if re_ == 0 and im > 0:
        return f"({_real_text(im)} * i)"
    if im == 0:
        return f"(-{_real_text(-re_)})"
    sign = "+" if im >= 0 else "-"
    real = _real_text(re_) if re_ >= 0 else f"(-{_real_text(-re_)})"
    return f"({real} {sign} {_real_text(abs(im))} * i)"


def _text(node: Expression) -> str:
    if isinstance(node, Const):
        return _const_text(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{_text(node.arg)})"
    if type(node) in _BINARY:
        return f"({_text(node.left)} {_BINARY[type(node)]} {_text(node.right)})"
    if isinstance(node, Pow):
        exp = str(node.exponent) if node.exponent >= 0 else f"({node.exponent})"
        return f"({_text(node.base)}^{exp})"
    if isinstance(node, Call):
        return f"{node.func}({_to_inner(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def _to_inner(node: Expression) -> str:
    text = _text(node)
    if type(node) in _BINARY or isinstance(node, (Neg, Pow)):
        return text[1:-1]
    return text


def to_text(node: Expression) -> str:
    """Fully parenthesised text; ``parse(to_text(e)) == e`` for parsed ``e``."""
    return _to_inner(node)


# --------------------------------------------------------------------------
# structural helpers


def free_variables(node: Expression) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Const):
        return set()
    if isinstance(node, (Neg, Call)):
        return free_variables(node.arg)
    if isinstance(node, Pow):
        return free_variables(node.base)
    return free_variables(node.left) | free_variables(node.right)


def substitute(node: Expression, mapping: Mapping[str, Expression]) -> Expression:
    """Composition: replace variables by expressions."""
    if isinstance(node, Var):
        return mapping.get(node.name, node)
    if isinstance(node, Const):
        return node
    if isinstance(node, Neg):
        return Neg(substitute(node.arg, mapping))
    if isinstance(node, Call):
        return Call(node.func, substitute(node.arg, mapping))
    if isinstance(node, Pow):
        return Pow(substitute(node.base, mapping), node.exponent)
    return type(node)(substitute(node.left, mapping), substitute(node.right, mapping))


def _poly_mul(p, q):
    out: dict[tuple[int, ...], complex] = {}
    for ea, ca in p.items():
        for eb, cb in q.items():
            key = tuple(x + y for x, y in zip(ea, eb))
            out[key] = out.get(key, 0) + ca * cb
    return out


def as_polynomial(node: Expression, variables: Sequence[str]):
    """Expand into ``{exponent tuple: coefficient}`` or return ``None``.

    ``None`` means the expression is not a polynomial in ``variables``
    (non-constant division, negative powers, transcendental functions of
    the variables, or other free variables).
    """
    variables = tuple(variables)
    zero = (0,) * len(variables)

    def go(n):
        if isinstance(n, Const):
            return {zero: n.value}
        if isinstance(n, Var):
            if n.name not in variables:
                return None
            e = [0] * len(variables)
            e[variables.index(n.name)] = 1
            return {tuple(e): 1 + 0j}
        if isinstance(n, Neg):
            p = go(n.arg)
            return None if p is None else {k: -v for k, v in p.items()}
        if isinstance(n, (Add, Sub)):
            p, q = go(n.left), go(n.right)
            if p is None or q is None:
                return None
            out = dict(p)
            s = 1 if isinstance(n, Add) else -1
            for k, v in q.items():
                out[k] = out.get(k, 0) + s * v
            return out
        if isinstance(n, Mul):
            p, q = go(n.left), go(n.right)
            if p is None or q is None:
                return None
            return _poly_mul(p, q)
        if isinstance(n, Div):
            p, q = go(n.left), go(n.right)
            if p is None or q is None or set(q) - {zero}:
                return None
            c = q.get(zero, 0)
            if c == 0:
                return None
            return {k: v / c for k, v in p.items()}
        if isinstance(n, Pow):
            p = go(n.base)
            if p is None:
                return None
            if n.exponent < 0:
                if set(p) - {zero}:
                    return None
                c = p.get(zero, 0)
                return None if c == 0 else {zero: c**n.exponent}
            out = {zero: 1 + 0j}
            for _ in range(n.exponent):
                out = _poly_mul(out, p)
            return out
        if isinstance(n, Call):
            if free_variables(n.arg):
                return None
            value = complex(evaluate(n, {}, 0).value)
            return {zero: value}
        raise TypeError(f"not an expression node: {n!r}")

    poly = go(node)
    if poly is None:
        return None
    return {k: v for k, v in poly.items() if v != 0}


# --------------------------------------------------------------------------
# evaluation


def _eval(node: Expression, env: Mapping, order: int):
    # constants stay Python complex so they never pay for jet convolution
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise KeyError(f"no value bound to variable {node.name!r}") from None
    try:
        if isinstance(node, Neg):
            return -_eval(node.arg, env, order)
        if isinstance(node, Add):
            return _eval(node.left, env, order) + _eval(node.right, env, order)
        if isinstance(node, Sub):
            return _eval(node.left, env, order) - _eval(node.right, env, order)
        if isinstance(node, Mul):
            return _eval(node.left, env, order) * _eval(node.right, env, order)
        if isinstance(node, Div):
            num = _eval(node.left, env, order)
            den = _eval(node.right, env, order)
            if not isinstance(den, Jet):
                if abs(den) < SINGULAR_TOLERANCE:
                    raise SingularPointError("division by zero constant")
                return num / den
            return num / den
        if isinstance(node, Pow):
            base = _eval(node.base, env, order)
            if not isinstance(base, Jet):
                if node.exponent < 0 and abs(base) < SINGULAR_TOLERANCE:
                    raise SingularPointError("negative power of zero")
                return complex(base) ** node.exponent
            return base**node.exponent
        if isinstance(node, Call):
            arg = _eval(node.arg, env, order)
            if not isinstance(arg, Jet):
                if node.func == "exp":
                    return cmath.exp(arg)
                if abs(arg) < SINGULAR_TOLERANCE:
                    raise SingularPointError("logarithm of zero")
                return cmath.log(arg)
            return arg.exp() if node.func == "exp" else arg.log()
    except SingularPointError as err:
        if err.subexpression is None:
            raise SingularPointError(f"{err} in {to_text(node)}", node) from None
        raise
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(node: Expression, env: Mapping, order: int) -> Jet:
    """Evaluate with variables bound to jets (or plain numbers) of ``order``.

    The result is always a :class:`Jet` whose batch shape is the broadcast
    of the bound jets.
    """
    bound = {}
    shape: tuple[int, ...] = ()
    for name, value in env.items():
        if not isinstance(value, Jet):
            value = Jet.constant(value, order)
        elif value.order < order:
            raise ValueError(f"variable {name!r} bound to a jet of order {value.order} < {order}")
        elif value.order > order:
            value = value.truncate(order)
        bound[name] = value
        shape = np.broadcast_shapes(shape, value.shape)
    out = _eval(node, bound, order)
    if not isinstance(out, Jet):
        return Jet.constant(np.broadcast_to(np.asarray(out, dtype=complex), shape), order)
    if out.shape != shape:
        out = Jet(np.broadcast_to(out.coeffs, (out.order + 1,) + shape).copy(), out.base)
    return out


def jet_eval(expr: Expression, z0, order: int, variable: str = "z") -> Jet:
    """Taylor coefficients of ``expr`` at ``z0`` through ``order``."""
    if order < 0:
        raise ValueError("order must be >= 0")
    extra = free_variables(expr) - {variable}
    if extra:
        raise KeyError(f"unbound variables {sorted(extra)}")
    return evaluate(expr, {variable: Jet.variable(z0, order)}, order)


def curve_jet(components: Sequence[Expression], z0, order: int) -> list[Jet]:
    """Component-wise jets; the order-1 coefficients form the tangent vector."""
    z = Jet.variable(z0, order)
    return [evaluate(c, {"z": z}, order) for c in components]
