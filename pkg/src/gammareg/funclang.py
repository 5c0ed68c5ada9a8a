"""A small expression language for declaring test functions.

Grammar (EBNF)::

    expr     = "if" cond "then" expr "else" expr | sum ;
    cond     = sum ( "==" | "<" | "<=" | ">" | ">=" ) sum ;
    sum      = product { ( "+" | "-" ) product } ;
    product  = unary { ( "*" | "/" ) unary } ;
    unary    = ( "-" | "+" ) unary | power ;
    power    = atom [ "^" unary ] ;
    atom     = number | "inf" | "x" | "y" | "z"
             | name "(" expr { "," expr } ")" | "(" expr ")" ;

``^`` binds tighter than unary minus (``-x^2 == -(x^2)``) and is right
associative. Functions: ``abs``, ``exp``, ``sqrt`` (one argument) and
``min``, ``max`` (two or more).

Values are extended reals in ``(-inf, inf]``. A positive number divided by
zero is ``inf``; anything that would produce ``-inf`` or NaN raises
:class:`EvalError`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

from .core import GammaRegError

VARIABLES = ("x", "y", "z")
FUNCTIONS = {"abs": (1, 1), "exp": (1, 1), "sqrt": (1, 1), "min": (2, None), "max": (2, None)}
COMPARISONS = ("==", "<=", ">=", "<", ">")
KEYWORDS = ("if", "then", "else", "inf")


class ExprSyntaxError(GammaRegError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class UnknownIdentifier(ExprSyntaxError):
    pass


class ArityError(GammaRegError):
    pass


class EvalError(GammaRegError):
    pass


# ---------------------------------------------------------------------------
# syntax tree


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Compare:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class IfElse:
    cond: Compare
    then: "Expr"
    orelse: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call, IfElse]


def max_variable(e) -> int:
    """Number of coordinates ``e`` reads (1 + highest variable index)."""
    if isinstance(e, Var):
        return e.index + 1
    if isinstance(e, Num):
        return 0
    if isinstance(e, Neg):
        return max_variable(e.operand)
    if isinstance(e, (BinOp, Compare)):
        return max(max_variable(e.left), max_variable(e.right))
    if isinstance(e, Call):
        return max(max_variable(a) for a in e.args)
    if isinstance(e, IfElse):
        return max(max_variable(e.cond), max_variable(e.then), max_variable(e.orelse))
    raise TypeError(e)


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>==|<=|>=|[-+*/^(),<>])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "ws":
            nl = text.count("\n")
            if nl:
                line += nl
                line_start = pos + text.rindex("\n") + 1
        else:
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("end", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        shown = repr(tok.text) if tok.kind != "end" else "end of input"
        raise ExprSyntaxError(f"{message}, found {shown}", tok.line, tok.column)

    def expect(self, text: str) -> Token:
        if self.tok.text != text:
            self.error(f"expected {text!r}")
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            self.error("unexpected token")
        return e

    def expr(self) -> Expr:
        if self.tok.kind == "name" and self.tok.text == "if":
            self.advance()
            cond = self.cond()
            self.expect("then")
            then = self.expr()
            self.expect("else")
            return IfElse(cond, then, self.expr())
        return self.sum()

    def cond(self) -> Compare:
        left = self.sum()
        if self.tok.text not in COMPARISONS:
            self.error("expected a comparison")
        op = self.advance().text
        return Compare(op, left, self.sum())

    def sum(self) -> Expr:
        left = self.product()
        while self.tok.text in ("+", "-"):
            op = self.advance().text
            left = BinOp(op, left, self.product())
        return left

    def product(self) -> Expr:
        left = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.advance().text
            left = BinOp(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        if self.tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "name":
            name = tok.text
            if name == "inf":
                self.advance()
                return Num(math.inf)
            if name in VARIABLES:
                self.advance()
                return Var(VARIABLES.index(name))
            if name in FUNCTIONS:
                self.advance()
                self.expect("(")
                args = [self.expr()]
                while self.tok.text == ",":
                    self.advance()
                    args.append(self.expr())
                self.expect(")")
                lo, hi = FUNCTIONS[name]
                if len(args) < lo or (hi is not None and len(args) > hi):
                    raise ArityError(
                        f"{name} takes {lo if hi == lo else f'at least {lo}'} "
                        f"argument(s), got {len(args)} (line {tok.line}, column {tok.column})"
                    )
                return Call(name, tuple(args))
            if name in KEYWORDS:
                self.error("misplaced keyword", tok)
            raise UnknownIdentifier(f"unknown identifier {name!r}", tok.line, tok.column)
        if tok.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        self.error("expected an operand")


def parse(source: str) -> Expr:
    """Parse ``source`` into an expression tree."""
    return _Parser(source).parse()


# ---------------------------------------------------------------------------
# printing


def _num_text(v: float) -> str:
    if v == math.inf:
        return "inf"
    return repr(v)


def to_source(e) -> str:
    """Fully parenthesised canonical text; ``parse(to_source(e)) == e``."""
    if isinstance(e, Num):
        return _num_text(e.value)
    if isinstance(e, Var):
        return VARIABLES[e.index]
    if isinstance(e, Neg):
        return f"(-{to_source(e.operand)})"
    if isinstance(e, BinOp):
        return f"({to_source(e.left)} {e.op} {to_source(e.right)})"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(to_source(a) for a in e.args)})"
    if isinstance(e, Compare):
        return f"{to_source(e.left)} {e.op} {to_source(e.right)}"
    if isinstance(e, IfElse):
        return f"(if {to_source(e.cond)} then {to_source(e.then)} else {to_source(e.orelse)})"
    raise TypeError(e)


# ---------------------------------------------------------------------------
# evaluation


def _checked(v: float, what: str) -> float:
    if math.isnan(v) or v == -math.inf:
        raise EvalError(f"{what} is undefined in (-inf, inf]")
    return v


def _div(a: float, b: float) -> float:
    if b == 0:
        if a > 0:
            return math.inf
        raise EvalError(f"{a!r}/0 is undefined in (-inf, inf]")
    return _checked(a / b, f"{a!r}/{b!r}")


def _pow(a: float, b: float) -> float:
    if a == 0 and b < 0:
        return math.inf
    if a < 0 and not float(b).is_integer():
        raise EvalError(f"{a!r}^{b!r}: non-integer power of a negative number")
    try:
        r = math.pow(a, b)
    except OverflowError:
        if a < 0 and int(b) % 2:
            raise EvalError(f"{a!r}^{b!r} overflows to -inf") from None
        return math.inf
    return _checked(r, f"{a!r}^{b!r}")


def _compare(op: str, a: float, b: float) -> bool:
    if op == "==":
        return a == b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def evaluate(e, point: Sequence[float]) -> float:
    """Value of ``e`` at ``point``."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.index >= len(point):
            raise ArityError(
                f"variable {VARIABLES[e.index]!r} needs a {e.index + 1}-d point, got {len(point)}-d"
            )
        return float(point[e.index])
    if isinstance(e, Neg):
        return _checked(-evaluate(e.operand, point), "negation of inf")
    if isinstance(e, BinOp):
        a = evaluate(e.left, point)
        b = evaluate(e.right, point)
        if e.op == "+":
            return _checked(a + b, f"{a!r}+{b!r}")
        if e.op == "-":
            return _checked(a - b, f"{a!r}-{b!r}")
        if e.op == "*":
            return _checked(a * b, f"{a!r}*{b!r}")
        if e.op == "/":
            return _div(a, b)
        return _pow(a, b)
    if isinstance(e, Call):
        vals = [evaluate(a, point) for a in e.args]
        if e.name == "abs":
            return abs(vals[0])
        if e.name == "exp":
            try:
                return math.exp(vals[0])
            except OverflowError:
                return math.inf
        if e.name == "sqrt":
            if vals[0] < 0:
                raise EvalError(f"sqrt of negative number {vals[0]!r}")
            return math.sqrt(vals[0])
        if e.name == "min":
            return min(vals)
        return max(vals)
    if isinstance(e, IfElse):
        c = e.cond
        branch = _compare(c.op, evaluate(c.left, point), evaluate(c.right, point))
        return evaluate(e.then if branch else e.orelse, point)
    raise TypeError(e)


class Function:
    """Callable wrapper around a parsed expression, usable with ``core.sample``."""

    def __init__(self, source: str):
        self.source = source
        self.expr = parse(source)
        self.arity = max_variable(self.expr)

    def __call__(self, point) -> float:
        point = [float(v) for v in (point if hasattr(point, "__len__") else [point])]
        return evaluate(self.expr, point)

    def __repr__(self):
        return f"Function({self.source!r})"
