"""Scalar expressions on a coordinate chart.

Expressions are sympy trees built by a small recursive-descent parser. The grammar has
no piecewise functions and no absolute value, so every expression is differentiable:

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | factor
    factor   := base ('^' exponent)?
    base     := number | name | '(' expr ')' | func '(' expr ')'
    exponent := ['-'] integer | '(' ['-'] integer ['/' integer] ')'

``func`` is one of sin, cos, tan, exp, log, sqrt and ``name`` is a coordinate or ``pi``.
Decimal literals are kept exact as rationals.
"""

import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import (
    Callable,
    Dict,
    Iterable,
    Iterator,
    List,
    NoReturn,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
import sympy
from sympy.polys.polyerrors import PolynomialError
from sympy.printing.precedence import PRECEDENCE
from sympy.printing.str import StrPrinter

from gradedconn.exceptions import (
    DimensionMismatch,
    EvalSingularity,
    ExpressionBlowup,
    ParseError,
    UnknownIdentifier,
)

logger = logging.getLogger(__name__)

ScalarExpr = sympy.Expr

FUNCTIONS: Dict[str, Callable[[sympy.Expr], sympy.Expr]] = {
    "sin": sympy.sin,
    "cos": sympy.cos,
    "tan": sympy.tan,
    "exp": sympy.exp,
    "log": sympy.log,
    "sqrt": sympy.sqrt,
}

CONSTANTS: Dict[str, sympy.Expr] = {"pi": sympy.pi}


@dataclass(frozen=True)
class Chart:
    """A single coordinate chart: ordered coordinate names and their sympy symbols."""

    names: Tuple[str, ...]
    symbols: Tuple[sympy.Symbol, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        names = tuple(self.names)
        if len(set(names)) != len(names):
            raise ParseError(f"Duplicate coordinate names in {list(names)}")
        for name in names:
            if name in FUNCTIONS or name in CONSTANTS:
                raise ParseError(f"Coordinate name {name!r} shadows a builtin")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "symbols", tuple(sympy.Symbol(n) for n in names))

    @property
    def dim(self) -> int:
        return len(self.names)

    def symbol(self, j: int) -> sympy.Symbol:
        self.check_index(j)
        return self.symbols[j]

    def check_index(self, j: int) -> None:
        if not 0 <= j < self.dim:
            raise DimensionMismatch(f"Coordinate index {j} outside 0..{self.dim - 1}")

    def coordinate(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownIdentifier(name) from None


ChartLike = Union[Chart, Sequence[str]]


def as_chart(coords: ChartLike) -> Chart:
    if isinstance(coords, Chart):
        return coords
    return Chart(tuple(coords))


# ── Scanner ──────────────────────────────────────────────────────────────────

_TOKEN_RE = re.compile(
    r"""
    (?P<WS>\s+)
  | (?P<NUMBER>\d+\.\d*|\.\d+|\d+)
  | (?P<NAME>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<PLUS>\+)
  | (?P<MINUS>-)
  | (?P<TIMES>\*)
  | (?P<DIVIDE>/)
  | (?P<CARET>\^)
  | (?P<LPAREN>\()
  | (?P<RPAREN>\))
    """,
    re.VERBOSE,
)


class _Scanner:
    """Token stream over one sentence; ``token`` is None at end of input."""

    def __init__(self, sentence: str) -> None:
        self.sentence = sentence
        self._tokens: Iterator[Tuple[str, str, int]] = self._tokenize()
        self.token: Optional[str] = None
        self.lexeme = ""
        self.offset = 0
        self.lex()

    def _tokenize(self) -> Iterator[Tuple[str, str, int]]:
        position = 0
        while position < len(self.sentence):
            match = _TOKEN_RE.match(self.sentence, position)
            if match is None:
                raise ParseError(
                    f"Unexpected character {self.sentence[position]!r}",
                    self.sentence,
                    position,
                )
            kind = match.lastgroup or ""
            if kind != "WS":
                yield kind, match.group(), position
            position = match.end()

    def lex(self) -> None:
        try:
            self.token, self.lexeme, self.offset = next(self._tokens)
        except StopIteration:
            self.token, self.lexeme, self.offset = None, "", len(self.sentence)


class ExprParser:
    """Recursive-descent parser producing sympy expressions over a chart."""

    def __init__(self, chart: Chart) -> None:
        self.chart = chart
        self._names = dict(zip(chart.names, chart.symbols))

    def parse(self, sentence: str) -> sympy.Expr:
        self.scanner = _Scanner(sentence)
        if self.scanner.token is None:
            self._fail("Empty expression", {"number", "name", "("})
        expr = self._expression()
        if self.scanner.token is not None:
            self._fail(f"Unexpected {self.scanner.lexeme!r}", {"+", "-", "*", "/", "^"})
        return expr

    # <EXPR> -> <TERM> { ('+' | '-') <TERM> }*
    def _expression(self) -> sympy.Expr:
        expr = self._term()
        while self.peek("PLUS") or self.peek("MINUS"):
            if self.accept("PLUS"):
                expr = expr + self._term()
            elif self.accept("MINUS"):
                expr = expr - self._term()
        return expr

    # <TERM> -> <UNARY> { ('*' | '/') <UNARY> }*
    def _term(self) -> sympy.Expr:
        expr = self._unary()
        while self.peek("TIMES") or self.peek("DIVIDE"):
            if self.accept("TIMES"):
                expr = expr * self._unary()
            elif self.accept("DIVIDE"):
                expr = expr / self._unary()
        return expr

    # <UNARY> -> '-' <UNARY> | <FACTOR>
    def _unary(self) -> sympy.Expr:
        if self.accept("MINUS"):
            return -self._unary()
        return self._factor()

    # <FACTOR> -> <BASE> [ '^' <EXPONENT> ]
    def _factor(self) -> sympy.Expr:
        base = self._base()
        if self.accept("CARET"):
            return sympy.Pow(base, self._exponent())
        return base

    def _base(self) -> sympy.Expr:
        if self.peek("NUMBER"):
            lexeme = self.scanner.lexeme
            self.scanner.lex()
            return sympy.Rational(lexeme)
        if self.peek("NAME"):
            name = self.scanner.lexeme
            self.scanner.lex()
            if name in FUNCTIONS:
                self.expect("LPAREN")
                argument = self._expression()
                self.expect("RPAREN")
                return FUNCTIONS[name](argument)
            if self.peek("LPAREN"):
                raise UnknownIdentifier(name)
            if name in self._names:
                return self._names[name]
            if name in CONSTANTS:
                return CONSTANTS[name]
            raise UnknownIdentifier(name)
        if self.accept("LPAREN"):
            expr = self._expression()
            self.expect("RPAREN")
            return expr
        self._fail(self._describe(), {"number", "name", "("})

    # <EXPONENT> -> [ '-' ] <INTEGER> | '(' [ '-' ] <INTEGER> [ '/' <INTEGER> ] ')'
    def _exponent(self) -> sympy.Rational:
        if self.accept("LPAREN"):
            sign = -1 if self.accept("MINUS") else 1
            numerator = self._integer()
            denominator = 1
            if self.accept("DIVIDE"):
                denominator = self._integer()
                if denominator == 0:
                    self._fail("Zero denominator in exponent", {"integer"})
            self.expect("RPAREN")
            return sympy.Rational(sign * numerator, denominator)
        sign = -1 if self.accept("MINUS") else 1
        return sympy.Integer(sign * self._integer())

    def _integer(self) -> int:
        if self.peek("NUMBER") and self.scanner.lexeme.isdigit():
            value = int(self.scanner.lexeme)
            self.scanner.lex()
            return value
        self._fail(self._describe(), {"integer"})

    def _describe(self) -> str:
        if self.scanner.token is None:
            return "Unexpected end of input"
        return f"Unexpected {self.scanner.lexeme!r}"

    def _fail(self, message: str, expected: Iterable[str]) -> NoReturn:
        raise ParseError(message, self.scanner.sentence, self.scanner.offset, expected)

    def peek(self, token: str) -> bool:
        return self.scanner.token == token

    def accept(self, token: str) -> bool:
        if self.peek(token):
            self.scanner.lex()
            return True
        return False

    def expect(self, token: str) -> None:
        if not self.accept(token):
            self._fail(f"Expected {token}", {_TOKEN_TEXT.get(token, token)})


_TOKEN_TEXT = {"LPAREN": "(", "RPAREN": ")"}


def parse_expr(text: str, coords: ChartLike) -> sympy.Expr:
    """Parse ``text`` into a sympy expression over the chart ``coords``."""
    return ExprParser(as_chart(coords)).parse(text)


# ── Printing ─────────────────────────────────────────────────────────────────


class ExprPrinter(StrPrinter):
    """Prints expressions back into the parser's grammar (``^`` powers, no ``E``)."""

    def _print_Pow(self, expr: sympy.Pow, rational: bool = False) -> str:
        base, exponent = expr.as_base_exp()
        if exponent == sympy.S.Half:
            return f"sqrt({self._print(base)})"
        if exponent == -sympy.S.Half:
            return f"1/sqrt({self._print(base)})"
        base_text = self.parenthesize(base, PRECEDENCE["Pow"], strict=True)
        if isinstance(exponent, sympy.Integer):
            if exponent < 0:
                return f"{base_text}^({exponent})"
            return f"{base_text}^{exponent}"
        if isinstance(exponent, sympy.Rational):
            return f"{base_text}^({exponent.p}/{exponent.q})"
        return f"exp(({self._print(exponent)})*log({self._print(base)}))"

    def _print_Exp1(self, expr: sympy.Expr) -> str:
        return "exp(1)"

    def _print_Pi(self, expr: sympy.Expr) -> str:
        return "pi"


_PRINTER = ExprPrinter()


def print_expr(expr: sympy.Expr) -> str:
    """Render an expression in the manifest grammar."""
    return str(_PRINTER.doprint(expr))


# ── Calculus and evaluation ──────────────────────────────────────────────────


def diff_expr(expr: sympy.Expr, j: int, chart: Chart) -> sympy.Expr:
    """Exact partial derivative with respect to coordinate ``j`` (0-based)."""
    return sympy.diff(expr, chart.symbol(j))


def _fold_cos(expr: sympy.Expr) -> sympy.Expr:
    """Expand with every ``cos(a)^n``, ``n >= 2``, rewritten through ``1 - sin(a)^2``."""
    folded = expr.replace(
        lambda e: e.is_Pow
        and isinstance(e.base, sympy.cos)
        and e.exp.is_Integer
        and e.exp > 1,
        lambda e: (1 - sympy.sin(e.base.args[0]) ** 2) ** (int(e.exp) // 2)
        * e.base ** (int(e.exp) % 2),
    )
    return sympy.expand(folded)


@lru_cache(maxsize=1 << 16)
def tidy_expr(expr: sympy.Expr) -> sympy.Expr:
    """Normal form for structural zero tests.

    The expression is cancelled to one fraction and both halves are reduced modulo
    ``sin(a)^2 + cos(a)^2 = 1``. An expression that vanishes identically as a rational
    function of the coordinates and of sines and cosines comes back as exactly 0.
    """
    if expr.is_Atom:
        return expr
    try:
        numer, denom = sympy.cancel(expr).as_numer_denom()
        numer = _fold_cos(numer)
        if numer == 0:
            return sympy.Integer(0)
        return sympy.cancel(numer / _fold_cos(denom))
    except PolynomialError:
        return expr


@lru_cache(maxsize=4096)
def _compiled(expr: sympy.Expr, chart: Chart) -> Callable[..., object]:
    return sympy.lambdify(chart.symbols, expr, modules="numpy")


def eval_expr(expr: sympy.Expr, point: Sequence[float], chart: Chart) -> float:
    """Evaluate at one point; NaN, Inf or a complex value raises EvalSingularity."""
    if len(point) != chart.dim:
        raise DimensionMismatch(f"Point has {len(point)} coordinates, chart has {chart.dim}")
    with np.errstate(all="ignore"):
        try:
            fn = _compiled(expr, chart)
            value = complex(fn(*[float(x) for x in point]))  # type: ignore[arg-type]
        except ZeroDivisionError as e:
            raise EvalSingularity(f"{print_expr(expr)} is singular at {tuple(point)}") from e
    if not np.isfinite(value) or abs(value.imag) > 0.0:
        raise EvalSingularity(f"{print_expr(expr)} is not finite at {tuple(point)}")
    return value.real


def count_ops(expr: sympy.Expr) -> int:
    return int(sympy.count_ops(expr))


def check_size(expr: sympy.Expr, cap: int, what: str = "expression") -> sympy.Expr:
    ops = count_ops(expr)
    if ops > cap:
        raise ExpressionBlowup(f"{what} has {ops} operations (cap {cap})")
    return expr


def is_zero(expr: sympy.Expr) -> bool:
    """Cheap structural zero test; callers fall back to pointwise evaluation."""
    if expr == 0:
        return True
    return bool(sympy.expand(expr) == 0)


def free_coordinates(expr: sympy.Expr, chart: Chart) -> List[int]:
    return [j for j, s in enumerate(chart.symbols) if expr.has(s)]
