"""Riemannian metric on a chart and the graded metric it induces on derivations."""

import logging
from functools import cached_property
from typing import List, Sequence

import numpy as np
import sympy

from gradedconn.derivations import Derivation
from gradedconn.exceptions import DimensionMismatch, ManifestValidationError, SingularMetric
from gradedconn.expr import Chart, diff_expr, eval_expr
from gradedconn.forms import Form, VectorField, ext_d, wedge
from gradedconn.frames import OrthoFrame

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12


class RiemannMetric:
    """Symmetric matrix ``g_ij`` with its inverse and Christoffel symbols."""

    def __init__(self, chart: Chart, matrix: Sequence[Sequence[object]]) -> None:
        g = sympy.Matrix(matrix)
        if g.shape != (chart.dim, chart.dim):
            raise DimensionMismatch(f"Metric has shape {g.shape}, chart has dimension {chart.dim}")
        for i in range(chart.dim):
            for j in range(i + 1, chart.dim):
                if sympy.expand(g[i, j] - g[j, i]) != 0:
                    raise ManifestValidationError(f"g[{i}][{j}] != g[{j}][{i}]", "metric")
        self.chart = chart
        self.g = g

    @property
    def dim(self) -> int:
        return self.chart.dim

    def entry(self, i: int, j: int) -> sympy.Expr:
        return self.g[i, j]

    @cached_property
    def inverse(self) -> sympy.Matrix:
        return self.g.inv(method="ADJ").applyfunc(sympy.simplify)

    @cached_property
    def christoffel(self) -> List[List[List[sympy.Expr]]]:
        """``christoffel[k][i][j] = Gamma^k_ij`` of the Levi-Civita connection."""
        m = self.dim
        ginv = self.inverse
        table = []
        for k in range(m):
            plane = []
            for i in range(m):
                row = []
                for j in range(m):
                    total = sum(
                        (
                            ginv[k, l]
                            * (
                                diff_expr(self.g[j, l], i, self.chart)
                                + diff_expr(self.g[i, l], j, self.chart)
                                - diff_expr(self.g[i, j], l, self.chart)
                            )
                            for l in range(m)
                        ),
                        sympy.Integer(0),
                    )
                    row.append(sympy.simplify(total / 2))
                plane.append(row)
            table.append(plane)
        logger.debug(f"Christoffel symbols ready for chart {self.chart.names}")
        return table

    def christoffel_field(self, i: int, j: int) -> VectorField:
        """``nabla_{d_i} d_j``."""
        return VectorField(self.chart, tuple(self.christoffel[k][i][j] for k in range(self.dim)))

    def inner(self, x: VectorField, y: VectorField) -> sympy.Expr:
        return sum(
            (
                self.g[i, j] * x.components[i] * y.components[j]
                for i in range(self.dim)
                for j in range(self.dim)
                if x.components[i] != 0 and y.components[j] != 0
            ),
            sympy.Integer(0),
        )

    def nabla(self, x: VectorField, y: VectorField) -> VectorField:
        components = []
        for k in range(self.dim):
            value = x.apply(y.components[k])
            for i in range(self.dim):
                for j in range(self.dim):
                    gamma = self.christoffel[k][i][j]
                    if gamma != 0:
                        value += gamma * x.components[i] * y.components[j]
            components.append(value)
        return VectorField(self.chart, tuple(components))

    def riemann(self, x: VectorField, y: VectorField, z: VectorField) -> VectorField:
        return (
            self.nabla(x, self.nabla(y, z))
            - self.nabla(y, self.nabla(x, z))
            - self.nabla(x.bracket(y), z)
        )

    def check_points(self, points: np.ndarray) -> None:
        """Raise :class:`SingularMetric` where ``g`` is degenerate or ill conditioned."""
        for point in points:
            values = np.array(
                [
                    [eval_expr(self.g[i, j], point, self.chart) for j in range(self.dim)]
                    for i in range(self.dim)
                ]
            )
            if np.linalg.cond(values) > CONDITION_LIMIT:
                raise SingularMetric(f"Metric is singular at {list(point)}", point)
            if np.linalg.eigvalsh(values).min() <= 0:
                logger.warning(f"Metric is not positive definite at {list(point)}")

    def orthonormal_frame(self) -> OrthoFrame:
        """Gram-Schmidt on the coordinate frame."""
        basis: List[VectorField] = []
        for k in range(self.dim):
            e = VectorField.coordinate(self.chart, k)
            for prior in basis:
                e = e - prior.scale(self.inner(e, prior))
            norm = sympy.powdenest(sympy.sqrt(sympy.simplify(self.inner(e, e))), force=True)
            basis.append(
                VectorField(self.chart, tuple(sympy.simplify(c / norm) for c in e.components))
            )
        return OrthoFrame(self.chart, basis, "orthonormal")


class GradedMetric:
    """The graded pairing ``G`` on derivations.

    ``G(L_j, L_k) = d g_jk``, ``G(L_j, i_k) = G(i_k, L_j) = g_jk`` and ``G(i_j, i_k) = 0``,
    extended by ``G(a T, c T') = a (-1)^{|T||c|} c G(T, T')``.
    """

    def __init__(self, metric: RiemannMetric) -> None:
        self.metric = metric
        self.chart = metric.chart
        self._dg = [
            [ext_d(Form.scalar(self.chart, metric.g[j, k])) for k in range(self.chart.dim)]
            for j in range(self.chart.dim)
        ]

    def pair(self, x: Derivation, y: Derivation) -> Form:
        m = self.chart.dim
        g = self.metric.g
        out = Form.zero(self.chart)
        for j in range(m):
            a, b = x.lcoef[j], x.icoef[j]
            if a.is_zero() and b.is_zero():
                continue
            for k in range(m):
                c, e = y.lcoef[k], y.icoef[k]
                if not a.is_zero():
                    if not c.is_zero() and not self._dg[j][k].is_zero():
                        out = out + wedge(wedge(a, c), self._dg[j][k])
                    if not e.is_zero() and g[j, k] != 0:
                        out = out + wedge(a, e).scale(g[j, k])
                if not b.is_zero() and not c.is_zero() and g[j, k] != 0:
                    out = out + wedge(b, c.involution()).scale(g[j, k])
        return out

    __call__ = pair

    def gram(self, x: VectorField, y: VectorField) -> sympy.Expr:
        return self.metric.inner(x, y)

    def determinant_at(self, point: Sequence[float]) -> float:
        values = np.array(
            [
                [eval_expr(self.metric.g[i, j], point, self.chart) for j in range(self.chart.dim)]
                for i in range(self.chart.dim)
            ]
        )
        return float(np.linalg.det(values))


