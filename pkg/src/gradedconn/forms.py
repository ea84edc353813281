"""Differential forms and vector fields on one chart.

A :class:`Form` is a finite sum of ``coefficient * dx_I`` with ``I`` a strictly increasing
tuple of 0-based coordinate indices. Sign bookkeeping is always permutation parity into
that order, and forms of degree above the chart dimension never appear.
"""

import logging
import re
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Sequence, Tuple

import sympy

from gradedconn.exceptions import DimensionMismatch, NonHomogeneous, ParseError
from gradedconn.expr import Chart, diff_expr, eval_expr, parse_expr, print_expr, tidy_expr

logger = logging.getLogger(__name__)

MultiIndex = Tuple[int, ...]


def sort_sign(indices: Sequence[int]) -> Tuple[int, MultiIndex]:
    """Sign of the permutation sorting ``indices`` (0 if an index repeats) and the sorted tuple."""
    if len(set(indices)) != len(indices):
        return 0, ()
    inversions = sum(
        1
        for a in range(len(indices))
        for b in range(a + 1, len(indices))
        if indices[a] > indices[b]
    )
    return (-1 if inversions % 2 else 1), tuple(sorted(indices))


def _normalize(terms: Mapping[MultiIndex, sympy.Expr]) -> Tuple[Tuple[MultiIndex, sympy.Expr], ...]:
    kept = [(index, sympy.sympify(coeff)) for index, coeff in terms.items()]
    kept = [(index, coeff) for index, coeff in kept if coeff != 0]
    return tuple(sorted(kept, key=lambda item: (len(item[0]), item[0])))


@dataclass(frozen=True)
class Form:
    chart: Chart
    terms: Tuple[Tuple[MultiIndex, sympy.Expr], ...] = ()

    @classmethod
    def build(cls, chart: Chart, terms: Mapping[MultiIndex, sympy.Expr]) -> "Form":
        return cls(chart, _normalize(terms))

    @classmethod
    def zero(cls, chart: Chart) -> "Form":
        return cls(chart, ())

    @classmethod
    def scalar(cls, chart: Chart, value: object) -> "Form":
        return cls.build(chart, {(): sympy.sympify(value)})

    @classmethod
    def dx(cls, chart: Chart, j: int) -> "Form":
        chart.check_index(j)
        return cls(chart, (((j,), sympy.Integer(1)),))

    # ── structure ────────────────────────────────────────────────────────

    def as_dict(self) -> Dict[MultiIndex, sympy.Expr]:
        return dict(self.terms)

    def coeff(self, index: MultiIndex) -> sympy.Expr:
        return self.as_dict().get(tuple(index), sympy.Integer(0))

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degrees(self) -> List[int]:
        return sorted({len(index) for index, _ in self.terms})

    def homogeneous_components(self) -> Dict[int, "Form"]:
        parts: Dict[int, Dict[MultiIndex, sympy.Expr]] = {}
        for index, coeff in self.terms:
            parts.setdefault(len(index), {})[index] = coeff
        return {degree: Form.build(self.chart, part) for degree, part in parts.items()}

    def parity_part(self, parity: int) -> "Form":
        return Form(self.chart, tuple(t for t in self.terms if len(t[0]) % 2 == parity))

    def parity_parts(self) -> Iterator[Tuple[int, "Form"]]:
        """Non-zero even and odd parts, in that order."""
        for parity in (0, 1):
            part = self.parity_part(parity)
            if not part.is_zero():
                yield parity, part

    @property
    def parity(self) -> int:
        """Parity of a homogeneous form; the zero form counts as even."""
        parities = {len(index) % 2 for index, _ in self.terms}
        if len(parities) > 1:
            raise NonHomogeneous(f"Form {self} mixes parities")
        return parities.pop() if parities else 0

    def involution(self) -> "Form":
        """The grade involution: odd components change sign."""
        return Form(
            self.chart,
            tuple((index, -coeff if len(index) % 2 else coeff) for index, coeff in self.terms),
        )

    def map_coeffs(self, fn: Callable[[sympy.Expr], sympy.Expr]) -> "Form":
        return Form.build(self.chart, {index: fn(coeff) for index, coeff in self.terms})

    def tidy(self) -> "Form":
        """Coefficients in normal form; terms that cancel are dropped."""
        return self.map_coeffs(tidy_expr)

    def _check(self, other: "Form") -> None:
        if self.chart != other.chart:
            raise DimensionMismatch(f"Charts differ: {self.chart.names} vs {other.chart.names}")

    # ── algebra ──────────────────────────────────────────────────────────

    def __add__(self, other: "Form") -> "Form":
        self._check(other)
        combined = self.as_dict()
        for index, coeff in other.terms:
            combined[index] = combined.get(index, 0) + coeff
        return Form.build(self.chart, combined)

    def __neg__(self) -> "Form":
        return Form(self.chart, tuple((index, -coeff) for index, coeff in self.terms))

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, factor: object) -> "Form":
        factor = sympy.sympify(factor)
        if factor == 0:
            return Form.zero(self.chart)
        return Form.build(self.chart, {index: factor * coeff for index, coeff in self.terms})

    def wedge(self, other: "Form") -> "Form":
        return wedge(self, other)

    def __xor__(self, other: "Form") -> "Form":
        return wedge(self, other)

    def partial(self, j: int) -> "Form":
        """Coefficient-wise derivative along the coordinate field ``j``."""
        return Form.build(
            self.chart, {index: diff_expr(coeff, j, self.chart) for index, coeff in self.terms}
        )

    # ── evaluation ───────────────────────────────────────────────────────

    def at(self, point: Sequence[float]) -> Dict[MultiIndex, float]:
        return {index: eval_expr(coeff, point, self.chart) for index, coeff in self.terms}

    def max_abs(self, point: Sequence[float]) -> float:
        return max((abs(v) for v in self.at(point).values()), default=0.0)

    def __str__(self) -> str:
        return print_form(self)


def wedge(a: Form, b: Form) -> Form:
    a._check(b)
    out: Dict[MultiIndex, sympy.Expr] = {}
    for i_index, i_coeff in a.terms:
        for j_index, j_coeff in b.terms:
            sign, index = sort_sign(i_index + j_index)
            if sign == 0:
                continue
            out[index] = out.get(index, 0) + sign * i_coeff * j_coeff
    return Form.build(a.chart, out)


def ext_d(a: Form) -> Form:
    """Exterior derivative."""
    out: Dict[MultiIndex, sympy.Expr] = {}
    for index, coeff in a.terms:
        for j in range(a.chart.dim):
            if j in index:
                continue
            derivative = diff_expr(coeff, j, a.chart)
            if derivative == 0:
                continue
            sign, sorted_index = sort_sign((j,) + index)
            out[sorted_index] = out.get(sorted_index, 0) + sign * derivative
    return Form.build(a.chart, out)


@dataclass(frozen=True)
class VectorField:
    chart: Chart
    components: Tuple[sympy.Expr, ...]

    def __post_init__(self) -> None:
        if len(self.components) != self.chart.dim:
            raise DimensionMismatch(
                f"Vector field has {len(self.components)} components, chart has {self.chart.dim}"
            )
        object.__setattr__(
            self, "components", tuple(sympy.sympify(c) for c in self.components)
        )

    @classmethod
    def coordinate(cls, chart: Chart, j: int) -> "VectorField":
        chart.check_index(j)
        return cls(chart, tuple(sympy.Integer(1 if k == j else 0) for k in range(chart.dim)))

    @classmethod
    def zero(cls, chart: Chart) -> "VectorField":
        return cls(chart, tuple(sympy.Integer(0) for _ in range(chart.dim)))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.components)

    def __add__(self, other: "VectorField") -> "VectorField":
        summed = tuple(a + b for a, b in zip(self.components, other.components))
        return VectorField(self.chart, summed)

    def __neg__(self) -> "VectorField":
        return VectorField(self.chart, tuple(-a for a in self.components))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def scale(self, factor: object) -> "VectorField":
        factor = sympy.sympify(factor)
        return VectorField(self.chart, tuple(factor * a for a in self.components))

    def apply(self, f: sympy.Expr) -> sympy.Expr:
        """Directional derivative of a function."""
        return sum(
            (a * diff_expr(f, j, self.chart) for j, a in enumerate(self.components) if a != 0),
            sympy.Integer(0),
        )

    def bracket(self, other: "VectorField") -> "VectorField":
        return VectorField(
            self.chart,
            tuple(
                self.apply(other.components[k]) - other.apply(self.components[k])
                for k in range(self.chart.dim)
            ),
        )

    def at(self, point: Sequence[float]) -> List[float]:
        return [eval_expr(c, point, self.chart) for c in self.components]


def interior(v: VectorField, a: Form) -> Form:
    """Interior product i_v; removing the index in position ``pos`` contributes (-1)^pos."""
    out: Dict[MultiIndex, sympy.Expr] = {}
    for index, coeff in a.terms:
        for pos, j in enumerate(index):
            component = v.components[j]
            if component == 0:
                continue
            rest = index[:pos] + index[pos + 1 :]
            sign = -1 if pos % 2 else 1
            out[rest] = out.get(rest, 0) + sign * component * coeff
    return Form.build(a.chart, out)


def lie_form(v: VectorField, a: Form) -> Form:
    """Lie derivative by the Cartan formula d i_v + i_v d."""
    return ext_d(interior(v, a)) + interior(v, ext_d(a))


# ── Literals ─────────────────────────────────────────────────────────────────

_WEDGE_RE = re.compile(r"^dx(\d+)(\^dx\d+)*$")


def split_terms(text: str) -> List[Tuple[int, str]]:
    """Split at top-level ``+``/``-``; unary minus after an operator is not a split point."""
    terms: List[Tuple[int, str]] = []
    depth = 0
    sign = 1
    current: List[str] = []
    previous = ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and ch in "+-" and previous not in ("", "*", "/", "^", "("):
            chunk = "".join(current).strip()
            if not chunk:
                raise ParseError(f"Empty term in {text!r}", text, len("".join(current)))
            terms.append((sign, chunk))
            sign = 1 if ch == "+" else -1
            current = []
            previous = ch
            continue
        if depth == 0 and ch in "+-" and previous == "" and not current:
            sign = -sign if ch == "-" else sign
            previous = ""
            continue
        current.append(ch)
        if not ch.isspace():
            previous = ch
    chunk = "".join(current).strip()
    if depth != 0:
        raise ParseError(f"Unbalanced parentheses in {text!r}", text, len(text), {")"})
    if not chunk:
        raise ParseError(f"Empty term in {text!r}", text, len(text))
    terms.append((sign, chunk))
    return terms


def split_factors(term: str) -> List[str]:
    factors: List[str] = []
    depth = 0
    current: List[str] = []
    for ch in term:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "*" and depth == 0:
            factors.append("".join(current).strip())
            current = []
            continue
        current.append(ch)
    factors.append("".join(current).strip())
    if any(not f for f in factors):
        raise ParseError(f"Empty factor in {term!r}", term, 0)
    return factors


def wedge_indices(factor: str, chart: Chart) -> MultiIndex:
    """Parse ``dx1^dx3`` into 0-based indices (unsorted, as written)."""
    indices = tuple(int(part[2:]) - 1 for part in factor.replace(" ", "").split("^"))
    for j in indices:
        if not 0 <= j < chart.dim:
            raise ParseError(f"dx{j + 1} outside chart of dimension {chart.dim}", factor, 0)
    return indices


def is_wedge_factor(factor: str) -> bool:
    return bool(_WEDGE_RE.match(factor.replace(" ", "")))


def parse_form(text: str, chart: Chart) -> Form:
    """Parse a form literal such as ``"x1 * dx2"`` or ``"sin(x1) * dx1^dx2"``."""
    total = Form.zero(chart)
    for sign, term in split_terms(text):
        scalars: List[str] = []
        wedge_part: MultiIndex = ()
        for factor in split_factors(term):
            if is_wedge_factor(factor):
                wedge_part = wedge_part + wedge_indices(factor, chart)
            else:
                scalars.append(f"({factor})")
        coeff = parse_expr("*".join(scalars), chart) if scalars else sympy.Integer(1)
        index_sign, index = sort_sign(wedge_part)
        if index_sign == 0:
            continue
        total = total + Form.build(chart, {index: sign * index_sign * coeff})
    return total


def print_form(form: Form) -> str:
    if form.is_zero():
        return "0"
    pieces = []
    for index, coeff in form.terms:
        text = print_expr(coeff)
        if not index:
            pieces.append(f"({text})")
        else:
            wedge_text = "^".join(f"dx{j + 1}" for j in index)
            pieces.append(f"({text}) * {wedge_text}")
    return " + ".join(pieces)


def forms_from(chart: Chart, values: Iterable[object]) -> Tuple[Form, ...]:
    return tuple(Form.scalar(chart, v) for v in values)
