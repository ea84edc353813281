"""Vector-field frames and the expansion of derivations in their lifts."""

import logging
import threading
from functools import cached_property
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from gradedconn.derivations import Derivation, lift, lift_i, lift_L, mul_left
from gradedconn.exceptions import DimensionMismatch, FrameNotOrthonormal, SingularMetric
from gradedconn.expr import Chart, eval_expr
from gradedconn.forms import Form, VectorField, ext_d, wedge

logger = logging.getLogger(__name__)


class Frame:
    """A frame ``X_1..X_m`` given by the rows of a component matrix."""

    def __init__(self, chart: Chart, rows: Sequence[VectorField], name: str = "frame") -> None:
        if len(rows) != chart.dim:
            raise DimensionMismatch(f"{name} has {len(rows)} fields, chart has {chart.dim}")
        self.chart = chart
        self.rows: Tuple[VectorField, ...] = tuple(rows)
        self.name = name
        self._expansions: Dict[Derivation, Tuple[Tuple[Form, ...], Tuple[Form, ...]]] = {}
        self._lock = threading.Lock()

    @classmethod
    def coordinate(cls, chart: Chart) -> "Frame":
        rows = [VectorField.coordinate(chart, j) for j in range(chart.dim)]
        return cls(chart, rows, "coordinate")

    @property
    def dim(self) -> int:
        return self.chart.dim

    @cached_property
    def matrix(self) -> sympy.Matrix:
        return sympy.Matrix([list(row.components) for row in self.rows])

    @cached_property
    def is_coordinate(self) -> bool:
        return self.matrix == sympy.eye(self.dim)

    @cached_property
    def inverse(self) -> sympy.Matrix:
        if self.is_coordinate:
            return sympy.eye(self.dim)
        inv = self.matrix.inv(method="ADJ")
        return inv.applyfunc(sympy.simplify)

    @cached_property
    def _row_differentials(self) -> List[List[Form]]:
        return [
            [ext_d(Form.scalar(self.chart, self.matrix[k, j])) for j in range(self.dim)]
            for k in range(self.dim)
        ]

    def check_points(self, points: np.ndarray) -> None:
        """The component matrix must be finite and invertible at every sample point."""
        for point in points:
            values = np.array(
                [[eval_expr(c, point, self.chart) for c in row.components] for row in self.rows]
            )
            if abs(np.linalg.det(values)) < 1e-12:
                raise SingularMetric(f"{self.name} is degenerate", point)

    def generator(self, kind: str, k: int) -> Derivation:
        return lift(kind, self.rows[k])

    def L(self, k: int) -> Derivation:
        return lift_L(self.rows[k])

    def i(self, k: int) -> Derivation:
        return lift_i(self.rows[k])

    def generators(self, indices: Optional[Sequence[int]] = None) -> List[Tuple[str, Derivation]]:
        indices = range(self.dim) if indices is None else indices
        out = [(f"L{k + 1}", self.L(k)) for k in indices]
        out += [(f"i{k + 1}", self.i(k)) for k in indices]
        return out

    def expand(self, w: Derivation) -> Tuple[List[Form], List[Form]]:
        """Coefficients ``(omega, omega')`` with ``W = sum omega_k L_{X_k} + omega'_k i_{X_k}``."""
        if self.is_coordinate:
            return list(w.lcoef), list(w.icoef)
        cached = self._expansions.get(w)
        if cached is None:
            cached = self._expand(w)
            with self._lock:
                self._expansions[w] = cached
        return list(cached[0]), list(cached[1])

    def _expand(self, w: Derivation) -> Tuple[Tuple[Form, ...], Tuple[Form, ...]]:
        zero = Form.zero(self.chart)
        inv = self.inverse
        omega = [
            _sum((a.scale(inv[j, k]) for j, a in enumerate(w.lcoef)), zero).tidy()
            for k in range(self.dim)
        ]
        d_rows = self._row_differentials
        residual = [
            w.icoef[j] - _sum((wedge(omega[l], d_rows[l][j]) for l in range(self.dim)), zero)
            for j in range(self.dim)
        ]
        omega_i = [
            _sum((b.scale(inv[j, k]) for j, b in enumerate(residual)), zero).tidy()
            for k in range(self.dim)
        ]
        return tuple(omega), tuple(omega_i)

    def combine(self, omega: Sequence[Form], omega_i: Sequence[Form]) -> Derivation:
        """``sum omega_k L_{X_k} + omega'_k i_{X_k}``; its expansion is remembered."""
        out = Derivation.zero(self.chart)
        for k in range(self.dim):
            if not omega[k].is_zero():
                out = out + mul_left(omega[k], self.L(k))
            if not omega_i[k].is_zero():
                out = out + mul_left(omega_i[k], self.i(k))
        out = out.tidy()
        if not self.is_coordinate and out not in self._expansions:
            expansion = (
                tuple(f.tidy() for f in omega),
                tuple(f.tidy() for f in omega_i),
            )
            with self._lock:
                self._expansions[out] = expansion
        return out

    def project(self, w: Derivation, indices: Sequence[int]) -> Derivation:
        """Keep only the frame components whose index is in ``indices``."""
        omega, omega_i = self.expand(w)
        zero = Form.zero(self.chart)
        kept = set(indices)
        return self.combine(
            [f if k in kept else zero for k, f in enumerate(omega)],
            [f if k in kept else zero for k, f in enumerate(omega_i)],
        )

    def frame_component(self, v: VectorField) -> List[sympy.Expr]:
        """Components of a vector field in this frame."""
        inv = self.inverse
        return [
            sum((v.components[j] * inv[j, k] for j in range(self.dim)), sympy.Integer(0))
            for k in range(self.dim)
        ]


def _sum(items: Iterable[Form], zero: Form) -> Form:
    total = zero
    for item in items:
        total = total + item
    return total


class OrthoFrame(Frame):
    """Frame expected to be orthonormal for a Riemannian metric."""

    def check_orthonormal(
        self,
        gram: Callable[[VectorField, VectorField], sympy.Expr],
        points: np.ndarray,
        tol: float = 1e-8,
    ) -> None:
        for point in points:
            for k, row_k in enumerate(self.rows):
                for l, row_l in enumerate(self.rows):
                    value = eval_expr(gram(row_k, row_l), point, self.chart)
                    expected = 1.0 if k == l else 0.0
                    if abs(value - expected) > tol:
                        raise FrameNotOrthonormal(
                            f"{self.name}: g(E{k + 1}, E{l + 1}) = {value:.6g} at {list(point)}"
                        )


class ParallelFrame(OrthoFrame):
    """Parallelization ``[X_k, X_l] = sum_mu C^mu_kl X_mu``."""

    def __init__(
        self,
        chart: Chart,
        rows: Sequence[VectorField],
        structure_constant: Optional[bool] = None,
        name: str = "parallel_frame",
    ) -> None:
        super().__init__(chart, rows, name)
        self.declared_constant = structure_constant

    @cached_property
    def structure(self) -> List[List[List[sympy.Expr]]]:
        """``structure[mu][k][l] = C^mu_kl``."""
        m = self.dim
        table = [[[sympy.Integer(0)] * m for _ in range(m)] for _ in range(m)]
        for k in range(m):
            for l in range(k + 1, m):
                components = self.frame_component(self.rows[k].bracket(self.rows[l]))
                for mu, c in enumerate(components):
                    c = sympy.simplify(c)
                    table[mu][k][l] = c
                    table[mu][l][k] = -c
        return table

    @cached_property
    def is_constant(self) -> bool:
        symbols = set(self.chart.symbols)
        return all(
            not (sympy.sympify(c).free_symbols & symbols)
            for plane in self.structure
            for row in plane
            for c in row
        )

    def bracket_field(self, k: int, l: int) -> VectorField:
        """``[X_k, X_l]`` rebuilt from the structure functions."""
        total = VectorField.zero(self.chart)
        for mu in range(self.dim):
            c = self.structure[mu][k][l]
            if c != 0:
                total = total + self.rows[mu].scale(c)
        return total

    def combination(self, coefficients: Sequence[sympy.Expr]) -> VectorField:
        total = VectorField.zero(self.chart)
        for mu, c in enumerate(coefficients):
            if c != 0:
                total = total + self.rows[mu].scale(c)
        return total


