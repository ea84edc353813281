"""Frame-partition splits ``Der = D + D_perp`` and their fundamental equations.

``D`` is spanned over forms by ``L_{E_k}, i_{E_k}`` for ``k`` in the chosen index set and
``D_perp`` by the remaining generators. Inside a split the semi-symmetric derivation ``P``
plays the part of ``U``, so ``U^D`` and ``U^perp`` are its two projections.
"""

import logging
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from gradedconn.connections import Connection, SemiSymmetric
from gradedconn.derivations import Derivation, bracket, mul_left, mul_right, sign_of
from gradedconn.exceptions import NotInDistribution, NotIntegrable, PreconditionViolated
from gradedconn.expr import tidy_expr
from gradedconn.forms import Form, wedge
from gradedconn.frames import Frame

logger = logging.getLogger(__name__)

D_SIDE = "D"
PERP_SIDE = "perp"
INTEGRABILITY_TOL = 1e-10

Bilinear = Callable[[Derivation, Derivation], Derivation]


def _max_abs(w: Derivation, point: Sequence[float]) -> float:
    return max((f.max_abs(point) for _, _, f in w.coefficients()), default=0.0)


class Split:
    def __init__(self, conn: SemiSymmetric, frame: Frame, d_indices: Sequence[int]) -> None:
        for k in d_indices:
            frame.chart.check_index(k)
        self.conn = conn
        self.lc = conn.base
        self.graded = conn.graded
        self.chart = conn.chart
        self.frame = frame
        self.d_indices: Tuple[int, ...] = tuple(sorted(set(d_indices)))
        self.perp_indices: Tuple[int, ...] = tuple(
            k for k in range(frame.dim) if k not in self.d_indices
        )
        self._membership: Dict[Tuple[Derivation, str], bool] = {}
        self._projections: Dict[Tuple[Derivation, str], Derivation] = {}
        self._defects: Dict[Tuple[str, bytes], float] = {}
        self._side_gram: Dict[str, Tuple[sympy.Matrix, sympy.Matrix]] = {}

    def __repr__(self) -> str:
        shown = [k + 1 for k in self.d_indices]
        return f"Split(frame={self.frame.name}, D={shown})"

    # ── projections ──────────────────────────────────────────────────────

    def project(self, w: Derivation, side: str) -> Derivation:
        key = (w, side)
        if key not in self._projections:
            indices = self.d_indices if side == D_SIDE else self.perp_indices
            self._projections[key] = self.frame.project(w, indices)
        return self._projections[key]

    def d(self, w: Derivation) -> Derivation:
        return self.project(w, D_SIDE)

    def perp(self, w: Derivation) -> Derivation:
        return self.project(w, PERP_SIDE)

    def generators(self, side: str) -> List[Tuple[str, Derivation]]:
        indices = self.d_indices if side == D_SIDE else self.perp_indices
        return self.frame.generators(indices)

    def require(self, w: Derivation, side: str) -> None:
        """Raise :class:`NotInDistribution` unless ``w`` lies on ``side``."""
        key = (w, side)
        if key not in self._membership:
            other = self.perp(w) if side == D_SIDE else self.d(w)
            self._membership[key] = all(
                tidy_expr(expr) == 0 or sympy.simplify(expr) == 0
                for _, _, f in other.coefficients()
                for _, expr in f.terms
            )
        if not self._membership[key]:
            raise NotInDistribution(f"{w} is not in {side} of {self!r}")

    @cached_property
    def u(self) -> Derivation:
        return self.conn.p

    @cached_property
    def u_d(self) -> Derivation:
        return self.d(self.u)

    @cached_property
    def u_perp(self) -> Derivation:
        return self.perp(self.u)

    def bracket_d(self, x: Derivation, y: Derivation) -> Derivation:
        return self.d(bracket(x, y))

    def bracket_perp(self, x: Derivation, y: Derivation) -> Derivation:
        return self.perp(bracket(x, y))

    def pair(self, x: Derivation, y: Derivation) -> Form:
        return self.graded.pair(x, y)

    # ── structure checks ─────────────────────────────────────────────────

    def orthogonality_defect(self, points: np.ndarray) -> float:
        key = ("orthogonality", points.tobytes())
        if key in self._defects:
            return self._defects[key]
        worst = 0.0
        for _, x in self.generators(D_SIDE):
            for _, xi in self.generators(PERP_SIDE):
                value = self.pair(x, xi)
                for point in points:
                    worst = max(worst, value.max_abs(point))
        self._defects[key] = worst
        return worst

    def integrability_defect(self, points: np.ndarray) -> float:
        """Largest ``|[G_a, G_b]^perp|`` over pairs of ``D`` generators."""
        key = ("integrability", points.tobytes())
        if key in self._defects:
            return self._defects[key]
        generators = [w for _, w in self.generators(D_SIDE)]
        worst = 0.0
        for a, ga in enumerate(generators):
            for gb in generators[a:]:
                residual = self.bracket_perp(ga, gb)
                if residual.is_zero():
                    continue
                for point in points:
                    worst = max(worst, _max_abs(residual, point))
        self._defects[key] = worst
        return worst

    def require_integrable(self, points: np.ndarray) -> None:
        defect = self.integrability_defect(points)
        if defect > INTEGRABILITY_TOL:
            raise NotIntegrable(f"{self!r} is not integrable: |[D,D]^perp| = {defect:.3g}")

    def require_orthogonal(self, points: np.ndarray) -> None:
        defect = self.orthogonality_defect(points)
        if defect > INTEGRABILITY_TOL:
            raise PreconditionViolated(
                f"{self!r} is not orthogonal: |G(D, D_perp)| = {defect:.3g}"
            )

    # ── reconstruction from pairings ─────────────────────────────────────

    def _gram(self, side: str) -> Tuple[sympy.Matrix, sympy.Matrix]:
        """``h_kl = g(X_k, X_l)`` on one side's frame indices and its inverse."""
        if side not in self._side_gram:
            indices = self.d_indices if side == D_SIDE else self.perp_indices
            rows = self.frame.rows
            h = sympy.Matrix(
                [[self.graded.gram(rows[k], rows[l]) for l in indices] for k in indices]
            )
            self._side_gram[side] = (h, h.inv(method="ADJ").applyfunc(sympy.simplify))
        return self._side_gram[side]

    def from_pairings(self, side: str, against: Callable[[Derivation], Form]) -> Derivation:
        """The element ``W`` of ``side`` with ``G(W, T) = against(T)`` for its generators ``T``.

        ``G(W, i_l) = sum_k omega_k h_kl`` and
        ``G(W, L_l) = sum_k omega_k G(L_k, L_l) + omega'_k h_kl`` are solved in turn.
        """
        indices = self.d_indices if side == D_SIDE else self.perp_indices
        if not indices:
            return Derivation.zero(self.chart)
        frame, zero = self.frame, Form.zero(self.chart)
        _, h_inv = self._gram(side)
        n = len(indices)
        g_i = [against(frame.i(l)) for l in indices]
        omega = [_combine(g_i, [h_inv[k, a] for k in range(n)], zero) for a in range(n)]
        g_l = []
        for l in indices:
            value = against(frame.L(l))
            for a, m in enumerate(indices):
                value = value - wedge(omega[a], self.pair(frame.L(m), frame.L(l)))
            g_l.append(value)
        omega_i = [_combine(g_l, [h_inv[k, a] for k in range(n)], zero) for a in range(n)]
        full = [zero] * frame.dim
        full_i = [zero] * frame.dim
        for a, k in enumerate(indices):
            full[k], full_i[k] = omega[a], omega_i[a]
        return frame.combine(full, full_i)

    def shape_by_pairing(self, x: Derivation, xi: Derivation) -> Derivation:
        """``A_X xi`` from ``G(A_X xi, T) = (-1)^{|X||xi|} G(xi, B(X, T))`` for ``T`` in ``D``."""
        out = Derivation.zero(self.chart)
        for p, xp in x.parity_parts():
            for q, xq in xi.parity_parts():
                s = sign_of(p * q)
                out = out + self.from_pairings(
                    D_SIDE,
                    lambda t, xp=xp, xq=xq, s=s: self.pair(
                        xq, self.second_fundamental(xp, t)
                    ).scale(s),
                )
        return out

    def nabla_perp_by_pairing(self, x: Derivation, xi: Derivation) -> Derivation:
        """``nabla^perp_X xi`` from ``X G(xi, eta) - (-1)^{|X||xi|} G(xi, nabla^L_X eta)``."""
        out = Derivation.zero(self.chart)
        for p, xp in x.parity_parts():
            for q, xq in xi.parity_parts():
                s = sign_of(p * q)
                out = out + self.from_pairings(
                    PERP_SIDE,
                    lambda eta, xp=xp, xq=xq, s=s: xp.apply(self.pair(xq, eta))
                    - self.pair(xq, self.lc.nabla(xp, eta)).scale(s),
                )
        return out

    # ── induced connections ──────────────────────────────────────────────

    def nabla_dl(self, x: Derivation, y: Derivation) -> Derivation:
        return self.d(self.lc.nabla(x, y))

    def second_fundamental(self, x: Derivation, y: Derivation) -> Derivation:
        """``B(X,Y)``, the normal part of the Levi-Civita lift."""
        return self.perp(self.lc.nabla(x, y))

    def nabla_tilde(self, x: Derivation, y: Derivation) -> Derivation:
        return self.d(self.conn.nabla(x, y))

    def second_fundamental_tilde(self, x: Derivation, y: Derivation) -> Derivation:
        return self.perp(self.conn.nabla(x, y))

    def nabla_tilde_formula(self, x: Derivation, y: Derivation) -> Derivation:
        return (
            self.nabla_dl(x, y)
            + mul_right(x, self.pair(y, self.u))
            - mul_left(self.pair(x, y), self.u_d)
        )

    def second_fundamental_tilde_formula(self, x: Derivation, y: Derivation) -> Derivation:
        return self.second_fundamental(x, y) - mul_left(self.pair(x, y), self.u_perp)

    def shape(self, x: Derivation, xi: Derivation) -> Derivation:
        """``A_X xi = -pi^D nabla^L_X xi``."""
        return -self.d(self.lc.nabla(x, xi))

    def shape_along(self, xi: Derivation, x: Derivation) -> Derivation:
        """``A_xi X = (-1)^{|X||xi|} A_X xi``."""
        return self.shape(x, xi).signed(sign_of(x.parity * xi.parity))

    def shape_tilde(self, x: Derivation, xi: Derivation) -> Derivation:
        return self.shape(x, xi) - mul_right(x, self.pair(xi, self.u))

    def nabla_perp(self, x: Derivation, xi: Derivation) -> Derivation:
        return self.perp(self.lc.nabla(x, xi))

    # ── curvatures ───────────────────────────────────────────────────────

    def _partial_curvature(
        self,
        nabla: Bilinear,
        x1: Derivation,
        x2: Derivation,
        x3: Derivation,
        extra_term: bool = True,
    ) -> Derivation:
        s = sign_of(x1.parity * x2.parity)
        out = nabla(x1, nabla(x2, x3)) - nabla(x2, nabla(x1, x3)).signed(s)
        out = out - nabla(self.bracket_d(x1, x2), x3)
        if extra_term:
            out = out - self.d(bracket(self.bracket_perp(x1, x2), x3))
        return out

    def curvature_tilde_d(self, x1: Derivation, x2: Derivation, x3: Derivation) -> Derivation:
        return self._partial_curvature(self.nabla_tilde, x1, x2, x3)

    def curvature_dl(self, x1: Derivation, x2: Derivation, x3: Derivation) -> Derivation:
        return self._partial_curvature(self.nabla_dl, x1, x2, x3)

    def curvature_perp(
        self, x: Derivation, y: Derivation, xi: Derivation, base: Connection
    ) -> Derivation:
        s = sign_of(x.parity * y.parity)
        np_ = self.nabla_perp
        out = np_(x, np_(y, xi)) - np_(y, np_(x, xi)).signed(s)
        out = out - np_(self.bracket_d(x, y), xi)
        return out - self.perp(base.nabla(self.bracket_perp(x, y), xi))

    # ── fundamental equations ────────────────────────────────────────────

    def _check_d(self, *args: Derivation) -> None:
        for w in args:
            self.require(w, D_SIDE)

    def gauss_residual(
        self, x: Derivation, y: Derivation, z: Derivation, w: Derivation
    ) -> Form:
        self._check_d(x, y, z, w)
        xp, yp, zp, wp = x.parity, y.parity, z.parity, w.parity
        pair, b, u = self.pair, self.second_fundamental, self.u
        s_xy = sign_of(xp * yp)
        s1 = sign_of((yp + zp) * wp)
        s2 = s_xy * sign_of((xp + zp) * wp)
        s3 = sign_of(xp * (yp + zp))
        s4 = sign_of(yp * zp)
        g_uu = pair(self.u_perp, self.u_perp)
        rhs = pair(self.curvature_tilde_d(x, y, z), w)
        terms = [
            (-s1, pair(b(x, w), b(y, z))),
            (s2, pair(b(y, w), b(x, z))),
            (s1, pair(b(x, w), u) ^ pair(y, z)),
            (-s2, pair(b(y, w), u) ^ pair(x, z)),
            (s3, pair(b(y, z), u) ^ pair(x, w)),
            (-s4, pair(b(x, z), u) ^ pair(y, w)),
            (-s3, pair(y, z) ^ g_uu ^ pair(x, w)),
            (s4, pair(x, z) ^ g_uu ^ pair(y, w)),
            (1, pair(bracket(x, y), b(z, w))),
        ]
        for sign, value in terms:
            rhs = rhs + value if sign > 0 else rhs - value
        return pair(self.conn.curvature(x, y, z), w) - rhs

    def gauss_lc_residual(
        self, x: Derivation, y: Derivation, z: Derivation, w: Derivation
    ) -> Form:
        self._check_d(x, y, z, w)
        xp, yp, zp, wp = x.parity, y.parity, z.parity, w.parity
        pair, b = self.pair, self.second_fundamental
        s1 = sign_of((yp + zp) * wp)
        s2 = sign_of(xp * yp) * sign_of((xp + zp) * wp)
        rhs = pair(self.curvature_dl(x, y, z), w)
        first = pair(b(x, w), b(y, z))
        second = pair(b(y, w), b(x, z))
        rhs = rhs - first if s1 > 0 else rhs + first
        rhs = rhs + second if s2 > 0 else rhs - second
        rhs = rhs + pair(bracket(x, y), b(z, w))
        return pair(self.lc.curvature(x, y, z), w) - rhs

    def _nabla_perp_of(
        self,
        fundamental: Bilinear,
        nabla: Bilinear,
        x: Derivation,
        y: Derivation,
        z: Derivation,
    ) -> Derivation:
        """``(nabla_perp_X B)(Y,Z)`` for the given second fundamental form."""
        s = sign_of(x.parity * y.parity)
        return (
            self.nabla_perp(x, fundamental(y, z))
            - fundamental(nabla(x, y), z)
            - fundamental(y, nabla(x, z)).signed(s)
        )

    def codazzi_residual(self, x: Derivation, y: Derivation, z: Derivation) -> Derivation:
        self._check_d(x, y, z)
        xp, yp, zp = x.parity, y.parity, z.parity
        s_xy = sign_of(xp * yp)
        bt, nt, pair, u = self.second_fundamental_tilde, self.nabla_tilde, self.pair, self.u
        xy_perp = self.bracket_perp(x, y)
        rhs = (
            self._nabla_perp_of(bt, nt, x, y, z)
            - self._nabla_perp_of(bt, nt, y, x, z).signed(s_xy)
            - mul_left(pair(x, u), bt(y, z))
            + mul_left(pair(y, u), bt(x, z)).signed(s_xy)
            - self.perp(bracket(xy_perp, z))
            - self.nabla_perp(z, xy_perp).signed(sign_of((xp + yp) * zp))
            - mul_right(xy_perp, pair(z, u))
        )
        return self.perp(self.conn.curvature(x, y, z)) - rhs

    def codazzi_lc_residual(self, x: Derivation, y: Derivation, z: Derivation) -> Derivation:
        self._check_d(x, y, z)
        xp, yp, zp = x.parity, y.parity, z.parity
        b, ndl = self.second_fundamental, self.nabla_dl
        xy_perp = self.bracket_perp(x, y)
        rhs = (
            self._nabla_perp_of(b, ndl, x, y, z)
            - self._nabla_perp_of(b, ndl, y, x, z).signed(sign_of(xp * yp))
            - self.perp(bracket(xy_perp, z))
            - self.nabla_perp(z, xy_perp).signed(sign_of((xp + yp) * zp))
        )
        return self.perp(self.lc.curvature(x, y, z)) - rhs

    def ricci_equation_residual(
        self, x: Derivation, y: Derivation, xi: Derivation
    ) -> Derivation:
        self._check_d(x, y)
        self.require(xi, PERP_SIDE)
        s = sign_of(x.parity * y.parity)
        bt, at = self.second_fundamental_tilde, self.shape_tilde
        rhs = (
            -bt(x, at(y, xi))
            + bt(y, at(x, xi)).signed(s)
            + self.curvature_perp(x, y, xi, self.conn)
        )
        return self.perp(self.conn.curvature(x, y, xi)) - rhs

    def ricci_equation_lc_residual(
        self, x: Derivation, y: Derivation, xi: Derivation
    ) -> Derivation:
        self._check_d(x, y)
        self.require(xi, PERP_SIDE)
        s = sign_of(x.parity * y.parity)
        b = self.second_fundamental
        rhs = (
            -b(x, self.shape_along(xi, y))
            + b(y, self.shape_along(xi, x)).signed(s)
            + self.curvature_perp(x, y, xi, self.lc)
        )
        return self.perp(self.lc.curvature(x, y, xi)) - rhs

    # ── property residuals ───────────────────────────────────────────────

    def partition_residual(self, w: Derivation) -> Derivation:
        return self.d(w) + self.perp(w) - w

    def idempotence_residual(self, w: Derivation) -> Derivation:
        return self.d(self.d(w)) - self.d(w)

    def dl_linearity_residual(self, alpha: Form, x: Derivation, y: Derivation) -> Derivation:
        return self.nabla_dl(mul_left(alpha, x), y) - mul_left(alpha, self.nabla_dl(x, y))

    def dl_leibniz_residual(self, x: Derivation, alpha: Form, y: Derivation) -> Derivation:
        out = self.nabla_dl(x, mul_left(alpha, y)) - mul_left(x.apply(alpha), y)
        for a, part in alpha.parity_parts():
            out = out - mul_left(part, self.nabla_dl(x, y)).signed(sign_of(x.parity * a))
        return out

    def _metric_residual(
        self, nabla: Bilinear, x: Derivation, y: Derivation, z: Derivation
    ) -> Form:
        pair = self.pair
        term = pair(y, nabla(x, z))
        out = x.apply(pair(y, z)) - pair(nabla(x, y), z)
        return out - term if sign_of(x.parity * y.parity) > 0 else out + term

    def dl_metric_residual(self, x: Derivation, y: Derivation, z: Derivation) -> Form:
        return self._metric_residual(self.nabla_dl, x, y, z)

    def tilde_metric_residual(self, x: Derivation, y: Derivation, z: Derivation) -> Form:
        return self._metric_residual(self.nabla_tilde, x, y, z)

    def dl_torsion_residual(self, x: Derivation, y: Derivation) -> Derivation:
        s = sign_of(x.parity * y.parity)
        torsion = self.nabla_dl(x, y) - self.nabla_dl(y, x).signed(s) - bracket(x, y)
        return torsion + self.bracket_perp(x, y)

    def tilde_torsion_residual(self, x: Derivation, y: Derivation) -> Derivation:
        s = sign_of(x.parity * y.parity)
        torsion = self.nabla_tilde(x, y) - self.nabla_tilde(y, x).signed(s) - bracket(x, y)
        expected = (
            -self.bracket_perp(x, y)
            + mul_right(x, self.pair(y, self.u))
            - mul_right(y, self.pair(x, self.u)).signed(s)
        )
        return torsion - expected

    def dl_koszul_residual(self, x: Derivation, y: Derivation, z: Derivation) -> Form:
        xp, yp, zp = x.parity, y.parity, z.parity
        pair, bd = self.pair, self.bracket_d
        first = x.apply(pair(y, z)) + pair(bd(x, y), z)
        second = y.apply(pair(z, x)) - pair(bd(y, z), x)
        third = z.apply(pair(x, y)) - pair(bd(z, x), y)
        second = second if sign_of(xp * (yp + zp)) > 0 else -second
        third = third if sign_of(zp * (xp + yp)) > 0 else -third
        lhs = pair(self.nabla_dl(x, y), z)
        return lhs + lhs - (first + second - third)

    def fundamental_linearity_residual(
        self, alpha: Form, x: Derivation, y: Derivation
    ) -> Derivation:
        b = self.second_fundamental
        out = b(mul_left(alpha, x), y) - mul_left(alpha, b(x, y))
        out = out + b(x, mul_left(alpha, y))
        for a, part in alpha.parity_parts():
            out = out - mul_left(part, b(x, y)).signed(sign_of(x.parity * a))
        return out

    def fundamental_symmetry_residual(self, x: Derivation, y: Derivation) -> Derivation:
        b = self.second_fundamental
        s = sign_of(x.parity * y.parity)
        return b(x, y) - b(y, x).signed(s) - self.bracket_perp(x, y)

    def decomposition_residual(self, x: Derivation, y: Derivation) -> Derivation:
        """Both ``nabla = nabla~^D + B~`` and the explicit formulas for the two parts."""
        out = self.conn.nabla(x, y) - self.nabla_tilde(x, y) - self.second_fundamental_tilde(x, y)
        out = out + self.nabla_tilde(x, y) - self.nabla_tilde_formula(x, y)
        tilde = self.second_fundamental_tilde(x, y)
        return out + tilde - self.second_fundamental_tilde_formula(x, y)

    def shape_linearity_residual(self, alpha: Form, x: Derivation, xi: Derivation) -> Derivation:
        out = self.shape(mul_left(alpha, x), xi) - mul_left(alpha, self.shape(x, xi))
        out = out + self.shape(x, mul_left(alpha, xi))
        for a, part in alpha.parity_parts():
            out = out - mul_left(part, self.shape(x, xi)).signed(sign_of(x.parity * a))
        return out

    def shape_adjoint_residual(self, x: Derivation, y: Derivation, xi: Derivation) -> Form:
        s = sign_of(x.parity * y.parity)
        lhs = self.pair(self.second_fundamental(x, y), xi)
        rhs = self.pair(y, self.shape(x, xi))
        return lhs - rhs if s > 0 else lhs + rhs

    def weingarten_residual(
        self, x: Derivation, xi: Derivation, points: Optional[np.ndarray] = None
    ) -> List[Derivation]:
        """Both connections against ``-A_X xi + nabla^perp_X xi`` rebuilt from pairings."""
        if points is not None:
            self.require_orthogonal(points)
        shape = self.shape_by_pairing(x, xi)
        normal = self.nabla_perp_by_pairing(x, xi)
        shape_tilde = shape - mul_right(x, self.pair(xi, self.u))
        return [
            self.lc.nabla(x, xi) - (-shape + normal),
            self.conn.nabla(x, xi) - (-shape_tilde + normal),
        ]

    def swap_residual(self, x1: Derivation, x2: Derivation) -> Derivation:
        s = sign_of(x1.parity * x2.parity)
        nabla, pair, u = self.conn.nabla, self.pair, self.u
        expected = (
            nabla(x2, x1).signed(s)
            + bracket(x1, x2)
            + mul_right(x1, pair(x2, u))
            - mul_right(x2, pair(x1, u)).signed(s)
        )
        return nabla(x1, x2) - expected


def _combine(forms: Sequence[Form], weights: Sequence[sympy.Expr], zero: Form) -> Form:
    total = zero
    for form, weight in zip(forms, weights):
        if weight != 0 and not form.is_zero():
            total = total + form.scale(weight)
    return total.tidy()
