"""Tests for exterior forms and vector fields."""

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from gradedconn.exceptions import NonHomogeneous, ParseError
from gradedconn.expr import Chart
from gradedconn.forms import (
    Form,
    VectorField,
    ext_d,
    interior,
    lie_form,
    parse_form,
    print_form,
    sort_sign,
    wedge,
)

CHART = Chart(("x1", "x2", "x3"))
X1, X2, X3 = CHART.symbols


def dx(j):
    return Form.dx(CHART, j)


def scalar(value):
    return Form.scalar(CHART, value)


@st.composite
def polynomials(draw):
    """Small integer polynomials in x1, x2, x3."""
    terms = draw(
        st.lists(
            st.tuples(
                st.integers(min_value=-5, max_value=5),
                st.integers(min_value=0, max_value=3),
                st.integers(min_value=0, max_value=3),
                st.integers(min_value=0, max_value=3),
            ),
            min_size=1,
            max_size=4,
        )
    )
    return sum((c * X1**a * X2**b * X3**e for c, a, b, e in terms), sympy.Integer(0))


@st.composite
def forms(draw, max_degree=3):
    degree = draw(st.integers(min_value=0, max_value=max_degree))
    index = tuple(sorted(draw(st.sets(st.integers(0, 2), min_size=degree, max_size=degree))))
    return Form.build(CHART, {index: draw(polynomials())})


class TestWedge:
    def test_sort_sign(self):
        assert sort_sign((1, 0)) == (-1, (0, 1))
        assert sort_sign((2, 0, 1)) == (1, (0, 1, 2))
        assert sort_sign((0, 0))[0] == 0

    def test_antisymmetry(self):
        assert wedge(dx(0), dx(1)) == Form.build(CHART, {(0, 1): 1})
        assert wedge(dx(1), dx(0)) == Form.build(CHART, {(0, 1): -1})
        assert wedge(dx(0), dx(0)).is_zero()

    def test_xor_operator(self):
        assert (dx(0) ^ dx(1) ^ dx(2)) == Form.build(CHART, {(0, 1, 2): 1})

    def test_scalar_multiplies(self):
        assert wedge(scalar(X1), dx(1)).coeff((1,)) == X1

    def test_parity(self):
        assert dx(0).parity == 1
        assert (dx(0) ^ dx(1)).parity == 0
        assert scalar(0).parity == 0
        with pytest.raises(NonHomogeneous):
            _ = (scalar(1) + dx(0)).parity

    def test_involution(self):
        mixed = scalar(X1) + dx(0) + (dx(0) ^ dx(1))
        flipped = mixed.involution()
        assert flipped.coeff(()) == X1
        assert flipped.coeff((0,)) == -1
        assert flipped.coeff((0, 1)) == 1


class TestExteriorDerivative:
    def test_function(self):
        df = ext_d(scalar(X1 * X2))
        assert df.coeff((0,)) == X2
        assert df.coeff((1,)) == X1
        assert df.coeff((2,)) == 0

    def test_one_form(self):
        # d(x1 dx2) = dx1 ^ dx2
        assert ext_d(parse_form("x1 * dx2", CHART)) == Form.build(CHART, {(0, 1): 1})

    def test_top_degree_is_closed(self):
        assert ext_d(Form.build(CHART, {(0, 1, 2): X1**2})).is_zero()


class TestInteriorAndLie:
    def test_interior_signs(self):
        e1 = VectorField.coordinate(CHART, 0)
        e2 = VectorField.coordinate(CHART, 1)
        area = dx(0) ^ dx(1)
        assert interior(e1, area) == dx(1)
        assert interior(e2, area) == -dx(0)

    def test_interior_on_functions_vanishes(self):
        assert interior(VectorField.coordinate(CHART, 0), scalar(X1)).is_zero()

    def test_vector_bracket(self):
        v = VectorField(CHART, (X2, 0, 0))
        w = VectorField.coordinate(CHART, 1)
        assert v.bracket(w) == VectorField(CHART, (-1, 0, 0))

    def test_lie_of_function(self):
        v = VectorField(CHART, (X2, 0, 0))
        assert lie_form(v, scalar(X1**2)) == scalar(2 * X1 * X2)


class TestLiterals:
    def test_parse_scaled_wedge(self):
        form = parse_form("sin(x1) * dx2^dx1", CHART)
        assert form == Form.build(CHART, {(0, 1): -sympy.sin(X1)})

    def test_parse_sum(self):
        form = parse_form("x1 * dx1 - 2 * dx3", CHART)
        assert form.coeff((0,)) == X1
        assert form.coeff((2,)) == -2

    def test_repeated_differential_vanishes(self):
        assert parse_form("dx1^dx1", CHART).is_zero()

    def test_out_of_chart(self):
        with pytest.raises(ParseError):
            parse_form("dx4", CHART)

    def test_empty_term(self):
        with pytest.raises(ParseError):
            parse_form("x1 + ", CHART)

    def test_print(self):
        assert print_form(Form.zero(CHART)) == "0"
        assert print_form(parse_form("x1 * dx2", CHART)) == "(x1) * dx2"


@settings(max_examples=40, deadline=None)
@given(forms(max_degree=1))
def test_d_squared_vanishes(form):
    assert ext_d(ext_d(form)).is_zero()


@settings(max_examples=40, deadline=None)
@given(forms(max_degree=2), forms(max_degree=2))
def test_graded_commutativity(a, b):
    sign = -1 if a.parity * b.parity else 1
    assert (wedge(a, b) - wedge(b, a).scale(sign)).map_coeffs(sympy.expand).is_zero()


@settings(max_examples=40, deadline=None)
@given(forms(max_degree=1), forms(max_degree=1))
def test_d_is_a_graded_derivation(a, b):
    lhs = ext_d(wedge(a, b))
    rhs = wedge(ext_d(a), b) + wedge(a.involution(), ext_d(b))
    assert (lhs - rhs).map_coeffs(sympy.expand).is_zero()


@settings(max_examples=30, deadline=None)
@given(polynomials(), polynomials())
def test_cartan_formula_on_exact_forms(f, component):
    v = VectorField(CHART, (component, 0, 1))
    lhs = lie_form(v, ext_d(Form.scalar(CHART, f)))
    rhs = ext_d(Form.scalar(CHART, v.apply(f)))
    assert (lhs - rhs).map_coeffs(sympy.expand).is_zero()
