"""Tests for the Riemannian metric and the graded pairing it induces."""

import numpy as np
import pytest
import sympy

from gradedconn.derivations import Derivation, lift_L, mul_left
from gradedconn.exceptions import DimensionMismatch, ManifestValidationError, SingularMetric
from gradedconn.expr import Chart
from gradedconn.forms import Form, VectorField
from gradedconn.metric import GradedMetric, RiemannMetric

SPHERE = Chart(("th", "ph"))
TH, PH = SPHERE.symbols


def same(a, b):
    return sympy.simplify(a - b) == 0


@pytest.fixture
def round_metric():
    return RiemannMetric(SPHERE, [[1, 0], [0, sympy.sin(TH) ** 2]])


@pytest.fixture
def sphere_points():
    return np.array([[0.5, 0.1], [1.2, 2.0], [2.5, 4.0]])


class TestRiemannMetric:
    """Christoffel symbols, inverse and validation."""

    def test_shape_must_match_chart(self):
        with pytest.raises(DimensionMismatch):
            RiemannMetric(SPHERE, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])

    def test_must_be_symmetric(self):
        with pytest.raises(ManifestValidationError) as info:
            RiemannMetric(SPHERE, [[1, TH], [0, 1]])
        assert info.value.field_path == "metric"

    def test_inverse(self, round_metric):
        assert same(round_metric.inverse[1, 1], 1 / sympy.sin(TH) ** 2)
        assert round_metric.inverse[0, 1] == 0

    def test_christoffel_symbols(self, round_metric):
        gamma = round_metric.christoffel
        assert same(gamma[0][1][1], -sympy.sin(TH) * sympy.cos(TH))
        assert same(gamma[1][0][1], sympy.cos(TH) / sympy.sin(TH))
        assert same(gamma[1][1][0], gamma[1][0][1])
        assert gamma[0][0][0] == 0

    def test_flat_christoffel_vanish(self, plane):
        metric = RiemannMetric(plane, [[1, 0], [0, 1]])
        assert all(c == 0 for plane_k in metric.christoffel for row in plane_k for c in row)

    def test_levi_civita_is_torsion_free(self, round_metric):
        x = VectorField(SPHERE, (PH, 0))
        y = VectorField(SPHERE, (0, TH))
        torsion = round_metric.nabla(x, y) - round_metric.nabla(y, x) - x.bracket(y)
        assert all(same(c, 0) for c in torsion.components)

    def test_round_sphere_curvature(self, round_metric):
        """R(d_th, d_ph) d_ph = sin^2(th) d_th on the unit sphere."""
        e1 = VectorField.coordinate(SPHERE, 0)
        e2 = VectorField.coordinate(SPHERE, 1)
        r = round_metric.riemann(e1, e2, e2)
        assert same(r.components[0], sympy.sin(TH) ** 2)
        assert same(r.components[1], 0)

    def test_singular_point(self, plane):
        x1, _ = plane.symbols
        metric = RiemannMetric(plane, [[1, 0], [0, x1**2]])
        metric.check_points(np.array([[1.0, 0.0]]))
        with pytest.raises(SingularMetric):
            metric.check_points(np.array([[0.0, 0.0]]))

    def test_orthonormal_frame(self, round_metric, sphere_points):
        frame = round_metric.orthonormal_frame()
        assert frame.name == "orthonormal"
        frame.check_orthonormal(round_metric.inner, sphere_points)


class TestGradedMetric:
    """The pairing G on coordinate generators and its form linearity."""

    def test_generator_values(self, round_metric):
        graded = GradedMetric(round_metric)
        L = [Derivation.generator(SPHERE, "L", k) for k in range(2)]
        i = [Derivation.generator(SPHERE, "i", k) for k in range(2)]
        assert graded.pair(L[0], i[0]) == Form.scalar(SPHERE, 1)
        assert graded.pair(i[0], L[0]) == Form.scalar(SPHERE, 1)
        assert graded.pair(L[0], i[1]).is_zero()
        assert graded.pair(i[0], i[1]).is_zero()
        assert graded.pair(i[1], i[1]).is_zero()

    def test_lie_pairs_give_metric_differentials(self, round_metric):
        graded = GradedMetric(round_metric)
        L2 = Derivation.generator(SPHERE, "L", 1)
        value = graded.pair(L2, L2)
        assert same(value.coeff((0,)), 2 * sympy.sin(TH) * sympy.cos(TH))
        assert value.coeff((1,)) == 0

    def test_form_linear_in_first_slot(self, round_metric):
        graded = GradedMetric(round_metric)
        alpha = Form.dx(SPHERE, 1)
        L2 = Derivation.generator(SPHERE, "L", 1)
        i2 = Derivation.generator(SPHERE, "i", 1)
        assert graded.pair(mul_left(alpha, L2), i2) == alpha.scale(sympy.sin(TH) ** 2)

    def test_gram_matches_inner(self, round_metric):
        graded = GradedMetric(round_metric)
        v = VectorField(SPHERE, (1, 1))
        assert same(graded.gram(v, v), 1 + sympy.sin(TH) ** 2)

    def test_pair_of_lifts(self, round_metric):
        graded = GradedMetric(round_metric)
        v = VectorField(SPHERE, (0, 1))
        # G(L_v, i_v) = g(v, v)
        value = graded.pair(lift_L(v), Derivation.generator(SPHERE, "i", 1))
        assert same(value.coeff(()), sympy.sin(TH) ** 2)

    def test_determinant(self, round_metric):
        graded = GradedMetric(round_metric)
        assert graded.determinant_at([0.5, 0.0]) == pytest.approx(np.sin(0.5) ** 2)
