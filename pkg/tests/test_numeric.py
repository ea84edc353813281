"""Tests for vectorised residual evaluation."""

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from gradedconn.derivations import Derivation, mul_left
from gradedconn.exceptions import EvalSingularity
from gradedconn.expr import Chart, diff_expr, eval_expr
from gradedconn.forms import Form, VectorField
from gradedconn.numeric import (
    coefficients,
    finite_difference,
    max_abs,
    max_abs_many,
    relative_tolerance,
)

POINTS = np.array([[0.0, 1.0], [2.0, -1.0], [0.5, 0.5]])


class TestMaxAbs:
    def test_zero_residual_compiles_nothing(self, plane):
        assert np.array_equal(max_abs(Form.zero(plane), POINTS, plane), np.zeros(3))

    def test_form(self, plane):
        x1, x2 = plane.symbols
        form = Form.build(plane, {(): x1 * x2, (0,): 3})
        assert max_abs(form, POINTS, plane) == pytest.approx([3.0, 3.0, 3.0])

    def test_constant_broadcasts(self, plane):
        assert max_abs(sympy.Integer(2), POINTS, plane) == pytest.approx([2.0, 2.0, 2.0])

    def test_derivation(self, plane):
        x1, _ = plane.symbols
        w = mul_left(Form.scalar(plane, x1**2), Derivation.generator(plane, "L", 1))
        assert max_abs(w, POINTS, plane) == pytest.approx([0.0, 4.0, 0.25])

    def test_vector_field_and_sequences(self, plane):
        x1, x2 = plane.symbols
        v = VectorField(plane, (x1, -x2))
        assert max_abs([v, sympy.Integer(1)], POINTS, plane) == pytest.approx([1.0, 2.0, 1.0])
        assert len(coefficients([v, Form.scalar(plane, x1)])) == 3

    def test_singular(self, plane):
        x1, _ = plane.symbols
        with pytest.raises(EvalSingularity):
            max_abs(Form.scalar(plane, 1 / x1), POINTS, plane)


class TestMaxAbsMany:
    def test_one_column_per_residual(self, plane):
        x1, x2 = plane.symbols
        values = [
            Form.scalar(plane, x1),
            [Form.scalar(plane, x1), Form.scalar(plane, 2 * x2)],
            Form.zero(plane),
        ]
        first, second, zero = max_abs_many(values, POINTS, plane)
        assert first == pytest.approx([0.0, 2.0, 0.5])
        assert second == pytest.approx([2.0, 2.0, 1.0])
        assert np.array_equal(zero, np.zeros(3))

    def test_singular_member_does_not_raise(self, plane):
        x1, _ = plane.symbols
        bad, good = max_abs_many(
            [Form.scalar(plane, 1 / x1), Form.scalar(plane, x1)], POINTS, plane
        )
        assert not np.isfinite(bad[0])
        assert np.all(np.isfinite(good))

    def test_trig_cancellation_is_exact(self, plane):
        x1, _ = plane.symbols
        residual = Form.scalar(plane, sympy.sin(x1) ** 2 + sympy.cos(x1) ** 2 - 1)
        (values,) = max_abs_many([residual], POINTS, plane)
        assert np.array_equal(values, np.zeros(3))


def test_relative_tolerance():
    assert relative_tolerance(np.array([0.0, 9.0]), 1e-8) == pytest.approx([1e-8, 1e-7])


def test_finite_difference(plane):
    x1, x2 = plane.symbols
    assert finite_difference(sympy.sin(x1) * x2, 0, [0.3, 2.0], plane) == pytest.approx(
        2.0 * np.cos(0.3), rel=1e-6
    )


@settings(max_examples=40, deadline=None)
@given(
    a=st.integers(min_value=-5, max_value=5),
    b=st.integers(min_value=-5, max_value=5),
    point=st.tuples(
        st.floats(min_value=-2.0, max_value=2.0), st.floats(min_value=-2.0, max_value=2.0)
    ),
    j=st.sampled_from([0, 1]),
)
def test_symbolic_derivative_matches_finite_difference(a, b, point, j):
    plane = Chart(("x1", "x2"))
    x1, x2 = plane.symbols
    expr = a * sympy.sin(x1) * x2 + b * x1**3 - x2**2
    exact = eval_expr(diff_expr(expr, j, plane), list(point), plane)
    assert finite_difference(expr, j, list(point), plane) == pytest.approx(exact, abs=1e-6)
