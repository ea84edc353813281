"""Tests for distribution splits and their fundamental equations."""

import pytest
import sympy

from gradedconn.connections import LeviCivitaLift, SemiSymmetric
from gradedconn.derivations import Derivation, mul_left
from gradedconn.distributions import D_SIDE, PERP_SIDE, Split
from gradedconn.exceptions import NotInDistribution, NotIntegrable, PreconditionViolated
from gradedconn.forms import Form, ext_d
from gradedconn.frames import Frame
from gradedconn.numeric import max_abs


def vanishes_on(manifest, value, tol=1e-9):
    return max_abs(value, manifest.points, manifest.chart).max() <= tol


class TestProjections:
    """The coordinate split D = span{L1, i1} of the plane."""

    def test_repr_shows_one_based_indices(self, flat, split_of):
        assert repr(split_of(flat)) == "Split(frame=coordinate, D=[1])"

    def test_generators(self, flat, split_of):
        split = split_of(flat)
        assert [label for label, _ in split.generators(D_SIDE)] == ["L1", "i1"]
        assert [label for label, _ in split.generators(PERP_SIDE)] == ["L2", "i2"]

    def test_projections_partition(self, flat, split_of):
        split = split_of(flat)
        w = flat.parse("x2 * L(e1) + dx1 * L(e2) + i(e2)")
        assert split.partition_residual(w).is_zero()
        assert split.idempotence_residual(w).is_zero()
        assert split.d(w) == flat.parse("x2 * L(e1)")

    def test_membership(self, flat, split_of):
        split = split_of(flat)
        split.require(flat.parse("L(e1)"), D_SIDE)
        split.require(flat.parse("i(e2)"), PERP_SIDE)
        with pytest.raises(NotInDistribution):
            split.require(flat.parse("L(e2)"), D_SIDE)

    def test_p_splits_into_d_part(self, flat, split_of):
        split = split_of(flat)
        assert split.u_d == flat.parse("i(U)")
        assert split.u_perp.is_zero()

    def test_orthogonal_and_integrable(self, flat, split_of):
        split = split_of(flat)
        assert split.orthogonality_defect(flat.points) == 0.0
        assert split.integrability_defect(flat.points) == 0.0
        split.require_integrable(flat.points)


class TestInducedConnections:
    def test_flat_second_fundamental_form_vanishes(self, flat, split_of):
        split = split_of(flat)
        for _, x in split.generators(D_SIDE):
            for _, y in split.generators(D_SIDE):
                assert split.second_fundamental(x, y).is_zero()

    def test_sphere_meridians_are_geodesic(self, sphere, split_of):
        """The th lines are great circles, so B(L_E1, L_E1) vanishes."""
        split = split_of(sphere)
        x = sphere.frame.L(0)
        assert vanishes_on(sphere, split.second_fundamental(x, x))

    def test_tilde_formulas(self, sphere, split_of):
        split = split_of(sphere)
        gens = [w for _, w in split.generators(D_SIDE)]
        for x in gens:
            for y in gens:
                assert vanishes_on(sphere, split.decomposition_residual(x, y))

    def test_partial_connection_rules(self, sphere, split_of):
        split = split_of(sphere)
        x, y = sphere.frame.L(0), sphere.frame.i(0)
        alpha = Form.dx(sphere.chart, 1)
        assert vanishes_on(sphere, split.dl_linearity_residual(alpha, x, y))
        assert vanishes_on(sphere, split.dl_leibniz_residual(x, alpha, y))
        assert vanishes_on(sphere, split.dl_metric_residual(x, x, y))
        assert vanishes_on(sphere, split.tilde_metric_residual(x, x, y))
        assert vanishes_on(sphere, split.dl_torsion_residual(x, y))
        assert vanishes_on(sphere, split.tilde_torsion_residual(x, y))
        assert vanishes_on(sphere, split.dl_koszul_residual(x, x, y))

    def test_second_fundamental_symmetry(self, sphere, split_of):
        split = split_of(sphere)
        x, y = sphere.frame.L(0), sphere.frame.i(0)
        assert vanishes_on(sphere, split.fundamental_symmetry_residual(x, y))
        assert vanishes_on(
            sphere, split.fundamental_linearity_residual(Form.dx(sphere.chart, 0), x, y)
        )


class TestShapeOperator:
    def test_adjoint_and_weingarten(self, sphere, split_of):
        split = split_of(sphere)
        x = sphere.frame.L(0)
        for _, xi in split.generators(PERP_SIDE):
            assert vanishes_on(sphere, split.shape_adjoint_residual(x, x, xi))
            assert vanishes_on(sphere, split.weingarten_residual(x, xi))

    def test_shape_linearity(self, sphere, split_of):
        split = split_of(sphere)
        x, xi = sphere.frame.L(0), sphere.frame.i(1)
        alpha = Form.dx(sphere.chart, 1)
        assert vanishes_on(sphere, split.shape_linearity_residual(alpha, x, xi))

    def test_swap(self, sphere, split_of):
        split = split_of(sphere)
        x, y = sphere.frame.L(0), sphere.frame.i(0)
        assert vanishes_on(sphere, split.swap_residual(x, y))


class TestShapeFromPairings:
    """Shape operator and normal connection rebuilt from graded pairings alone."""

    def test_hand_computed_shape(self, sphere_normal, split_of):
        """nabla_{E2} E1 = cot(th) E2, so A_{L_E2} L_E1 = -L_{cot(th) E2}."""
        split, frame = split_of(sphere_normal), sphere_normal.frame
        cot = Form.scalar(sphere_normal.chart, sympy.cot(sphere_normal.chart.symbols[0]))
        expected = -(mul_left(cot, frame.L(1)) + mul_left(ext_d(cot), frame.i(1)))
        x, xi = frame.L(1), frame.L(0)
        assert vanishes_on(sphere_normal, split.shape_by_pairing(x, xi) - expected)
        assert vanishes_on(sphere_normal, split.shape(x, xi) - expected)
        along_interior = split.shape_by_pairing(x, frame.i(0))
        assert vanishes_on(sphere_normal, along_interior + mul_left(cot, frame.i(1)))

    def test_pairings_agree_with_projections(self, sphere_normal, split_of):
        split = split_of(sphere_normal)
        for _, x in split.generators(D_SIDE):
            for _, xi in split.generators(PERP_SIDE):
                shape = split.shape_by_pairing(x, xi)
                normal = split.nabla_perp_by_pairing(x, xi)
                assert vanishes_on(sphere_normal, shape - split.shape(x, xi))
                assert vanishes_on(sphere_normal, normal - split.nabla_perp(x, xi))
                assert vanishes_on(
                    sphere_normal, split.weingarten_residual(x, xi, sphere_normal.points)
                )

    def test_weingarten_catches_a_wrong_shape(self, sphere_normal, split_of, monkeypatch):
        split, frame = split_of(sphere_normal), sphere_normal.frame
        monkeypatch.setattr(
            split, "shape_by_pairing", lambda x, xi: Derivation.zero(sphere_normal.chart)
        )
        assert not vanishes_on(sphere_normal, split.weingarten_residual(frame.L(1), frame.L(0)))

    def test_oblique_split_is_refused(self, so3):
        """g(d/dphi, d/dpsi) = cos(theta), so the coordinate split D = [1] is not orthogonal."""
        conn = SemiSymmetric(so3.graded, so3.p, LeviCivitaLift(so3.graded))
        split = Split(conn, Frame.coordinate(so3.chart), [0])
        assert split.orthogonality_defect(so3.points) > 0.01
        with pytest.raises(PreconditionViolated):
            split.weingarten_residual(split.frame.L(0), split.frame.i(2), so3.points)


class TestNormalPartOfU:
    """Latitude split of the sphere: U has parts on both sides and B does not vanish."""

    @pytest.fixture
    def d_gens(self, sphere_normal):
        return sphere_normal.frame.L(1), sphere_normal.frame.i(1)

    def test_u_has_both_parts(self, sphere_normal, split_of, d_gens):
        split, frame = split_of(sphere_normal), sphere_normal.frame
        assert not split.u_d.is_zero()
        assert not split.u_perp.is_zero()
        assert vanishes_on(sphere_normal, split.u_perp - frame.i(0))
        L2, _ = d_gens
        assert not vanishes_on(sphere_normal, split.second_fundamental(L2, L2))

    def test_gauss(self, sphere_normal, split_of, d_gens):
        split = split_of(sphere_normal)
        L2, i2 = d_gens
        for args in [(L2, L2, L2, i2), (L2, i2, L2, L2), (i2, L2, L2, L2), (L2, i2, i2, L2)]:
            assert vanishes_on(sphere_normal, split.gauss_residual(*args))
            assert vanishes_on(sphere_normal, split.gauss_lc_residual(*args))

    def test_codazzi(self, sphere_normal, split_of, d_gens):
        split = split_of(sphere_normal)
        L2, i2 = d_gens
        for args in [(L2, i2, L2), (i2, L2, L2), (L2, i2, i2)]:
            assert vanishes_on(sphere_normal, split.codazzi_residual(*args))
            assert vanishes_on(sphere_normal, split.codazzi_lc_residual(*args))

    def test_ricci_equation(self, sphere_normal, split_of, d_gens):
        split, frame = split_of(sphere_normal), sphere_normal.frame
        L2, i2 = d_gens
        for xi in (frame.L(0), frame.i(0)):
            assert vanishes_on(sphere_normal, split.ricci_equation_residual(L2, i2, xi))
            assert vanishes_on(sphere_normal, split.ricci_equation_lc_residual(L2, i2, xi))


class TestFundamentalEquations:
    """Gauss, Codazzi and Ricci equations on the meridian split of the sphere."""

    @pytest.fixture
    def d_gens(self, sphere):
        return sphere.frame.L(0), sphere.frame.i(0)

    def test_gauss(self, sphere, split_of, d_gens):
        split = split_of(sphere)
        L1, i1 = d_gens
        for args in [(L1, L1, L1, i1), (L1, i1, L1, L1), (i1, L1, L1, L1)]:
            assert vanishes_on(sphere, split.gauss_residual(*args))
            assert vanishes_on(sphere, split.gauss_lc_residual(*args))

    def test_codazzi(self, sphere, split_of, d_gens):
        split = split_of(sphere)
        L1, i1 = d_gens
        assert vanishes_on(sphere, split.codazzi_residual(L1, i1, L1))
        assert vanishes_on(sphere, split.codazzi_lc_residual(L1, i1, L1))

    def test_ricci_equation(self, sphere, split_of, d_gens):
        split = split_of(sphere)
        L1, i1 = d_gens
        xi = sphere.frame.L(1)
        assert vanishes_on(sphere, split.ricci_equation_residual(L1, i1, xi))
        assert vanishes_on(sphere, split.ricci_equation_lc_residual(L1, i1, xi))

    def test_arguments_must_lie_in_d(self, sphere, split_of):
        split = split_of(sphere)
        L1, L2 = sphere.frame.L(0), sphere.frame.L(1)
        with pytest.raises(NotInDistribution):
            split.gauss_residual(L1, L2, L1, L1)


def test_left_invariant_split_is_not_integrable(so3, split_of):
    """[X1, X2] = X3 leaves the span of the first two frame fields."""
    split = split_of(so3)
    assert split.integrability_defect(so3.points) > 0.5
    with pytest.raises(NotIntegrable):
        split.require_integrable(so3.points)


def test_projection_of_scaled_generator(flat, split_of):
    split = split_of(flat)
    w = mul_left(Form.dx(flat.chart, 1), Derivation.generator(flat.chart, "i", 0))
    assert split.perp(w).is_zero()
    assert split.d(w) == w
