"""Tests for the Levi-Civita lift and the semi-symmetric connection."""

import itertools
import math

import pytest

from gradedconn import closed_forms
from gradedconn.closed_forms import RULE_KINDS, ClosedForms, closed_rules
from gradedconn.connections import LeviCivitaLift, SemiSymmetric, koszul_rhs
from gradedconn.derivations import Derivation, generators, lift
from gradedconn.exceptions import ParityViolation
from gradedconn.forms import Form, VectorField
from gradedconn.numeric import max_abs
from gradedconn.suites import EQUATION_IDS


def vanishes_on(manifest, value, tol=1e-9):
    return max_abs(value, manifest.points, manifest.chart).max() <= tol


@pytest.fixture
def flat_conns(flat):
    lc = LeviCivitaLift(flat.graded)
    return lc, SemiSymmetric(flat.graded, flat.p, lc)


@pytest.fixture
def sphere_conns(sphere):
    lc = LeviCivitaLift(sphere.graded)
    return lc, SemiSymmetric(sphere.graded, sphere.p, lc)


class TestFlatSemiSymmetric:
    """P = i(U) with U = d/dx1 on the Euclidean plane."""

    def gens(self, flat):
        L = [Derivation.generator(flat.chart, "L", k) for k in range(2)]
        i = [Derivation.generator(flat.chart, "i", k) for k in range(2)]
        return L, i

    def test_lie_lie(self, flat, flat_conns):
        _, ss = flat_conns
        L, _ = self.gens(flat)
        for a, b in itertools.product(range(2), repeat=2):
            expected = L[a] if b == 0 else Derivation.zero(flat.chart)
            assert ss.nabla(L[a], L[b]) == expected

    def test_lie_interior(self, flat, flat_conns):
        _, ss = flat_conns
        L, i = self.gens(flat)
        assert ss.nabla(L[0], i[0]) == -i[0]
        assert ss.nabla(L[1], i[1]) == -i[0]
        assert ss.nabla(L[0], i[1]).is_zero()

    def test_interior_lie(self, flat, flat_conns):
        _, ss = flat_conns
        L, i = self.gens(flat)
        assert ss.nabla(i[0], L[0]).is_zero()
        assert ss.nabla(i[1], L[0]) == i[1]
        assert ss.nabla(i[1], L[1]) == -i[0]

    def test_interior_interior(self, flat, flat_conns):
        _, ss = flat_conns
        _, i = self.gens(flat)
        for a, b in itertools.product(range(2), repeat=2):
            assert ss.nabla(i[a], i[b]).is_zero()

    def test_curvature_value(self, flat, flat_conns):
        _, ss = flat_conns
        L, _ = self.gens(flat)
        assert ss.curvature(L[0], L[1], L[0]) == -L[1]

    def test_closed_curvature_agrees(self, flat, flat_conns):
        _, ss = flat_conns
        L, _ = self.gens(flat)
        residual = ss.curvature(L[0], L[1], L[0]) - ss.curvature_closed(L[0], L[1], L[0])
        assert vanishes_on(flat, residual)

    def test_torsion_matches_closed_form(self, flat, flat_conns):
        _, ss = flat_conns
        L, _ = self.gens(flat)
        assert ss.torsion(L[0], L[1]) == -L[1]
        assert ss.torsion_closed(L[0], L[1]) == -L[1]

    def test_levi_civita_lift_is_flat(self, flat, flat_conns):
        lc, _ = flat_conns
        for (_, x), (_, y) in itertools.product(generators(flat.chart), repeat=2):
            assert lc.nabla(x, y).is_zero()
        L, _ = self.gens(flat)
        assert lc.ricci(L[0], L[0], flat.frame).is_zero()


class TestSphere:
    """Identities on the round sphere, checked numerically at the sample points."""

    def test_lc_generator_value(self, sphere, sphere_conns):
        lc, _ = sphere_conns
        value = lc.generator_value("L", 1, "L", 1)
        point = sphere.points[0]
        coeff = value.lcoef[0].at(point)[()]
        assert coeff == pytest.approx(-0.5 * math.sin(2 * point[0]))

    def test_lc_is_torsion_free(self, sphere, sphere_conns):
        lc, _ = sphere_conns
        gens = [w for _, w in generators(sphere.chart)]
        for x, y in itertools.combinations(gens, 2):
            assert vanishes_on(sphere, lc.torsion(x, y))

    def test_koszul_formula(self, sphere, sphere_conns):
        lc, _ = sphere_conns
        gens = [w for _, w in generators(sphere.chart)]
        triples = [
            (gens[1], gens[1], gens[2]),
            (gens[1], gens[3], gens[1]),
            (gens[0], gens[1], gens[3]),
        ]
        for x, y, z in triples:
            residual = lc.pair(lc.nabla(x, y), z).scale(2) - koszul_rhs(lc, x, y, z)
            assert vanishes_on(sphere, residual)

    def test_semisymmetric_torsion(self, sphere, sphere_conns):
        _, ss = sphere_conns
        gens = [w for _, w in generators(sphere.chart)]
        for x, y in [(gens[0], gens[1]), (gens[1], gens[3]), (gens[2], gens[3])]:
            assert vanishes_on(sphere, ss.torsion(x, y) - ss.torsion_closed(x, y))

    @pytest.mark.parametrize("conn_index", [0, 1])
    def test_metric_compatibility(self, sphere, sphere_conns, conn_index):
        conn = sphere_conns[conn_index]
        gens = [w for _, w in generators(sphere.chart)]
        triples = [
            (gens[1], gens[1], gens[3]),
            (gens[3], gens[1], gens[1]),
            (gens[0], gens[2], gens[1]),
        ]
        for x, y, z in triples:
            assert vanishes_on(sphere, conn.metric_residual(x, y, z))

    def test_leibniz_and_linearity(self, sphere, sphere_conns):
        _, ss = sphere_conns
        L2 = Derivation.generator(sphere.chart, "L", 1)
        i1 = Derivation.generator(sphere.chart, "i", 0)
        alpha = Form.dx(sphere.chart, 1)
        assert vanishes_on(sphere, ss.leibniz_residual(L2, alpha, i1))
        assert vanishes_on(sphere, ss.linearity_residual(alpha, L2, i1))


def test_even_p_is_rejected(flat):
    with pytest.raises(ParityViolation):
        SemiSymmetric(flat.graded, Derivation.generator(flat.chart, "L", 0))


def test_nabla_is_memoized(flat, flat_conns):
    _, ss = flat_conns
    L1 = Derivation.generator(flat.chart, "L", 0)
    assert ss.nabla(L1, L1) is ss.nabla(L1, L1)


class TestClosedRules:
    """Closed forms are reached only through the family table the suites dispatch on."""

    def test_families_are_suite_equations(self, flat):
        table = closed_rules(ClosedForms(flat.metric, flat.u, flat.omega))
        ids = set(EQUATION_IDS["semisym"]) | set(EQUATION_IDS["curvature"])
        assert {f"closed-{family}" for family in table} <= ids
        assert {kind for kind, _ in table.values()} == set(RULE_KINDS)

    def test_no_argument_helpers(self):
        assert not hasattr(ClosedForms, "field")
        assert not hasattr(closed_forms, "rule_arguments")

    def test_rule_on_non_coordinate_field(self, flat, flat_conns):
        _, ss = flat_conns
        _, closed = closed_rules(ClosedForms(flat.metric, flat.u, flat.omega))["nabla-iU"]
        x1, x2 = flat.chart.symbols
        x = VectorField(flat.chart, (x2, 1))
        y = VectorField(flat.chart, (1, x1))
        for rule in RULE_KINDS["nabla"]:
            left = lift(rule[0], x)
            right = lift(rule[1], y)
            assert vanishes_on(flat, ss.nabla(left, right) - closed(rule, x, y))
