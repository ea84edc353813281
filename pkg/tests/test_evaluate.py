"""Tests for point evaluation of derivation expressions."""

import pytest

from gradedconn.exceptions import DimensionMismatch, ManifestValidationError, ParseError
from gradedconn.evaluate import Evaluator, connection_for, evaluate, parse_point, split_args

POINT = [0.1, 0.2]


class TestHelpers:
    def test_split_args(self):
        assert split_args("L(e1), x1 * L(e2), i(U)") == ["L(e1)", "x1 * L(e2)", "i(U)"]
        assert split_args("nabla(L(e1), L(e2)), i(e1)") == ["nabla(L(e1), L(e2))", "i(e1)"]

    def test_split_args_unbalanced(self):
        with pytest.raises(ParseError):
            split_args("L(e1, i(e2)")
        with pytest.raises(ParseError):
            split_args("L(e1)), i(e2)")

    def test_parse_point(self):
        assert parse_point("1, -2.5", 2) == [1.0, -2.5]
        with pytest.raises(DimensionMismatch):
            parse_point("1", 2)
        with pytest.raises(ParseError):
            parse_point("a,b", 2)


class TestConnections:
    def test_named_connections(self, flat):
        assert connection_for(flat, "lc").kind == "levi-civita"
        assert connection_for(flat, "ss").kind == "semi-symmetric"
        assert connection_for(flat, "canonical").kind == "canonical"
        assert connection_for(flat, "dual").kind == "dual"
        assert connection_for(flat, "lambda=0.5").kind == "lambda=0.5"

    def test_parallel_frame_needed(self, sphere):
        with pytest.raises(ManifestValidationError) as info:
            connection_for(sphere, "dual")
        assert info.value.field_path == "parallel_frame"

    def test_bad_names(self, flat):
        with pytest.raises(ParseError):
            connection_for(flat, "lambda=half")
        with pytest.raises(ParseError):
            connection_for(flat, "schouten")


class TestEvaluate:
    """Values on the flat plane with P = i(d/dx1)."""

    def test_nabla(self, flat):
        result = evaluate(flat, "nabla(L(e1), L(e1))", POINT)
        assert result["type"] == "derivation"
        assert result["value"] == {"L1": {"1": 1.0}}
        assert result["connection"] == "ss"
        assert result["point"] == POINT

    def test_nabla_with_levi_civita(self, flat):
        result = evaluate(flat, "nabla(L(e1), L(e1))", POINT, "lc")
        assert result["value"] == {}

    def test_curvature(self, flat):
        result = evaluate(flat, "curvature(L(e1), L(e2), L(U))", POINT)
        assert result["value"] == {"L2": {"1": -1.0}}

    def test_torsion(self, flat):
        assert evaluate(flat, "torsion(L(e1), L(e2))", POINT)["value"] == {"L2": {"1": -1.0}}

    def test_pair_is_a_form(self, flat):
        result = evaluate(flat, "pair(L(e1), i(e1))", POINT)
        assert result["type"] == "form"
        assert result["value"] == {"1": 1.0}

    def test_bracket(self, flat):
        result = evaluate(flat, "bracket(L(e1), x1 * L(e2))", POINT)
        assert result["value"] == {"L2": {"1": 1.0}}

    def test_nested_calls(self, flat):
        result = evaluate(flat, "nabla(L(e2), nabla(L(e2), L(e1)))", POINT)
        # nabla_{L2} L1 = L2, nabla_{L2} L2 = 0
        assert result["value"] == {}

    def test_form_coefficients(self, flat):
        result = evaluate(flat, "x1 * dx2 * i(e1)", POINT)
        assert result["value"] == {"i1": {"dx2": pytest.approx(0.1)}}

    def test_ricci_is_a_form(self, flat):
        assert evaluate(flat, "ricci(L(e1), L(e1))", POINT)["type"] == "form"


class TestEvaluatorErrors:
    def test_wrong_arity(self, flat):
        with pytest.raises(ParseError):
            Evaluator(flat).value("nabla(L(e1))")

    def test_form_where_derivation_expected(self, flat):
        with pytest.raises(ParseError):
            Evaluator(flat).value("nabla(pair(L(e1), i(e1)), L(e1))")
