"""Graded derivations of the form algebra in coordinate generators.

Every derivation is stored as ``sum_j a_j L_j + b_j i_j`` with ``L_j`` the Lie derivative
and ``i_j`` the interior product along the coordinate field ``j``; form coefficients sit
on the left. A derivation is determined by its values on the coordinates and their
differentials, so ``a_j = D(x_j)`` and ``b_j = D(dx_j)``.
"""

import logging
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import sympy

from gradedconn.exceptions import DimensionMismatch, NonHomogeneous, ParseError, UnknownIdentifier
from gradedconn.expr import Chart, print_expr
from gradedconn.forms import (
    Form,
    VectorField,
    ext_d,
    interior,
    parse_form,
    split_factors,
    split_terms,
    wedge,
)

logger = logging.getLogger(__name__)

L_KIND = "L"
I_KIND = "i"
KINDS = (L_KIND, I_KIND)


def _zeros(chart: Chart) -> Tuple[Form, ...]:
    return tuple(Form.zero(chart) for _ in range(chart.dim))


@dataclass(frozen=True)
class Derivation:
    chart: Chart
    lcoef: Tuple[Form, ...]
    icoef: Tuple[Form, ...]

    def __post_init__(self) -> None:
        if len(self.lcoef) != self.chart.dim or len(self.icoef) != self.chart.dim:
            raise DimensionMismatch("Derivation needs one L and one i coefficient per coordinate")

    @classmethod
    def zero(cls, chart: Chart) -> "Derivation":
        return cls(chart, _zeros(chart), _zeros(chart))

    @classmethod
    def generator(cls, chart: Chart, kind: str, j: int) -> "Derivation":
        """``L_j`` or ``i_j`` along the coordinate field ``j``."""
        chart.check_index(j)
        one = tuple(
            Form.scalar(chart, 1) if k == j else Form.zero(chart) for k in range(chart.dim)
        )
        if kind == L_KIND:
            return cls(chart, one, _zeros(chart))
        if kind == I_KIND:
            return cls(chart, _zeros(chart), one)
        raise ValueError(f"Unknown generator kind: {kind}")

    # ── structure ────────────────────────────────────────────────────────

    def is_zero(self) -> bool:
        return all(f.is_zero() for f in self.lcoef + self.icoef)

    def coefficients(self) -> Iterator[Tuple[str, int, Form]]:
        for j, f in enumerate(self.lcoef):
            yield L_KIND, j, f
        for j, f in enumerate(self.icoef):
            yield I_KIND, j, f

    def parity_part(self, parity: int) -> "Derivation":
        """Part of total parity ``parity``: ``L`` is even and ``i`` is odd."""
        return Derivation(
            self.chart,
            tuple(f.parity_part(parity) for f in self.lcoef),
            tuple(f.parity_part(1 - parity) for f in self.icoef),
        )

    @cached_property
    def _parts(self) -> Tuple[Tuple[int, "Derivation"], ...]:
        parts = ((parity, self.parity_part(parity)) for parity in (0, 1))
        return tuple((parity, part) for parity, part in parts if not part.is_zero())

    def parity_parts(self) -> Iterator[Tuple[int, "Derivation"]]:
        return iter(self._parts)

    @property
    def parity(self) -> int:
        parities = [p for p, _ in self.parity_parts()]
        if len(parities) > 1:
            raise NonHomogeneous(f"Derivation {self} mixes parities")
        return parities[0] if parities else 0

    def is_homogeneous(self) -> bool:
        return len(list(self.parity_parts())) <= 1

    def _check(self, other: "Derivation") -> None:
        if self.chart != other.chart:
            raise DimensionMismatch(f"Charts differ: {self.chart.names} vs {other.chart.names}")

    # ── module structure ─────────────────────────────────────────────────

    def __add__(self, other: "Derivation") -> "Derivation":
        self._check(other)
        return Derivation(
            self.chart,
            tuple(a + b for a, b in zip(self.lcoef, other.lcoef)),
            tuple(a + b for a, b in zip(self.icoef, other.icoef)),
        )

    def __neg__(self) -> "Derivation":
        return Derivation(self.chart, tuple(-a for a in self.lcoef), tuple(-a for a in self.icoef))

    def __sub__(self, other: "Derivation") -> "Derivation":
        return self + (-other)

    def signed(self, sign: int) -> "Derivation":
        return self if sign > 0 else -self

    def tidy(self) -> "Derivation":
        return Derivation(
            self.chart,
            tuple(f.tidy() for f in self.lcoef),
            tuple(f.tidy() for f in self.icoef),
        )

    def __rmul__(self, alpha: Form) -> "Derivation":
        return mul_left(alpha, self)

    # ── action ───────────────────────────────────────────────────────────

    def apply(self, alpha: Form) -> Form:
        out = Form.zero(self.chart)
        for j, a in enumerate(self.lcoef):
            if not a.is_zero():
                out = out + wedge(a, alpha.partial(j))
        for j, b in enumerate(self.icoef):
            if not b.is_zero():
                out = out + wedge(b, interior(VectorField.coordinate(self.chart, j), alpha))
        return out

    def __call__(self, alpha: Form) -> Form:
        return self.apply(alpha)

    def __str__(self) -> str:
        return print_derivation(self)


def mul_left(alpha: Form, w: Derivation) -> Derivation:
    """``alpha * W``."""
    return Derivation(
        w.chart,
        tuple(wedge(alpha, a) for a in w.lcoef),
        tuple(wedge(alpha, b) for b in w.icoef),
    )


def mul_right(w: Derivation, alpha: Form) -> Derivation:
    """``W * alpha := (-1)^{|alpha||W|} alpha * W``, split over parity parts."""
    out = Derivation.zero(w.chart)
    for w_parity, w_part in w.parity_parts():
        for a_parity, a_part in alpha.parity_parts():
            out = out + mul_left(a_part, w_part).signed(-1 if w_parity * a_parity else 1)
    return out


@lru_cache(maxsize=1 << 14)
def bracket(x: Derivation, y: Derivation) -> Derivation:
    """Graded commutator, bilinear over parity parts; coefficients come back tidied."""
    x._check(y)
    chart = x.chart
    lcoef: List[Form] = list(_zeros(chart))
    icoef: List[Form] = list(_zeros(chart))
    for x_parity, x_part in x.parity_parts():
        for y_parity, y_part in y.parity_parts():
            sign = -1 if x_parity * y_parity else 1
            for j in range(chart.dim):
                xj = Form.scalar(chart, chart.symbol(j))
                dxj = Form.dx(chart, j)
                lcoef[j] = lcoef[j] + _commute(x_part, y_part, sign, xj)
                icoef[j] = icoef[j] + _commute(x_part, y_part, sign, dxj)
    return Derivation(chart, tuple(lcoef), tuple(icoef)).tidy()


def _commute(x: Derivation, y: Derivation, sign: int, alpha: Form) -> Form:
    forward = x.apply(y.apply(alpha))
    backward = y.apply(x.apply(alpha))
    return forward - backward if sign > 0 else forward + backward


@lru_cache(maxsize=4096)
def lift_L(v: VectorField) -> Derivation:
    """``L_v = sum_j v^j L_j + d(v^j) i_j``."""
    chart = v.chart
    return Derivation(
        chart,
        tuple(Form.scalar(chart, c) for c in v.components),
        tuple(ext_d(Form.scalar(chart, c)) for c in v.components),
    )


@lru_cache(maxsize=4096)
def lift_i(v: VectorField) -> Derivation:
    chart = v.chart
    return Derivation(chart, _zeros(chart), tuple(Form.scalar(chart, c) for c in v.components))


def lift(kind: str, v: VectorField) -> Derivation:
    return lift_L(v) if kind == L_KIND else lift_i(v)


def generators(chart: Chart) -> List[Tuple[str, Derivation]]:
    """All coordinate generators labelled ``L1..Lm, i1..im``."""
    out = []
    for kind in KINDS:
        for j in range(chart.dim):
            out.append((f"{kind}{j + 1}", Derivation.generator(chart, kind, j)))
    return out


def sign_of(*parities: int) -> int:
    return -1 if sum(parities) % 2 else 1


# ── Literals ─────────────────────────────────────────────────────────────────

_GENERATOR_RE = re.compile(r"^(L|i)\(\s*([A-Za-z_][A-Za-z0-9_]*)\s*\)$")


def parse_derivation(
    text: str,
    chart: Chart,
    vectors: Mapping[str, VectorField],
    forms: Optional[Mapping[str, Form]] = None,
) -> Derivation:
    """Parse literals like ``"i(U)"`` or ``"x1 * dx2 * L(U) + i(E1)"``.

    Each term carries exactly one generator factor. The other factors are form literals or
    names from ``forms``, wedged left to right in the order written.
    """
    if text.strip() == "0":
        return Derivation.zero(chart)
    forms = forms or {}
    total = Derivation.zero(chart)
    for sign, term in split_terms(text):
        generator: Optional[Derivation] = None
        coefficient = Form.scalar(chart, sign)
        for factor in split_factors(term):
            match = _GENERATOR_RE.match(factor.replace(" ", ""))
            if match:
                if generator is not None:
                    raise ParseError(f"Two generators in term {term!r}", term, 0)
                name = match.group(2)
                if name not in vectors:
                    raise UnknownIdentifier(name)
                generator = lift(match.group(1), vectors[name])
            elif factor in forms:
                coefficient = wedge(coefficient, forms[factor])
            else:
                coefficient = wedge(coefficient, parse_form(factor, chart))
        if generator is None:
            raise ParseError(f"Term {term!r} has no generator", term, 0, {"L(", "i("})
        total = total + mul_left(coefficient, generator)
    return total


def print_derivation(w: Derivation) -> str:
    pieces = []
    for kind, j, coeff in w.coefficients():
        if coeff.is_zero():
            continue
        pieces.append(f"[{coeff}] {kind}{j + 1}")
    return " + ".join(pieces) if pieces else "0"


def coefficient_exprs(w: Derivation) -> Dict[Tuple[str, int, Tuple[int, ...]], sympy.Expr]:
    """Flat map ``(kind, j, multi-index) -> coefficient`` used for numeric evaluation."""
    out: Dict[Tuple[str, int, Tuple[int, ...]], sympy.Expr] = {}
    for kind, j, coeff in w.coefficients():
        for index, expr in coeff.terms:
            out[(kind, j, index)] = expr
    return out


def generator_labels(chart: Chart) -> Sequence[str]:
    return [label for label, _ in generators(chart)]
