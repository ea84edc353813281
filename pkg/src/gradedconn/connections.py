"""Graded affine connections on derivations.

Connections are immutable; each memoizes its values on pairs of derivations. Signed rules
need homogeneous inputs, so the generic operations split every argument into parity parts
and sum the contributions.
"""

import logging
import threading
from typing import Callable, Dict, Optional, Tuple

from gradedconn.derivations import (
    I_KIND,
    L_KIND,
    Derivation,
    bracket,
    lift_i,
    lift_L,
    mul_left,
    mul_right,
    sign_of,
)
from gradedconn.exceptions import ParityViolation
from gradedconn.forms import Form, VectorField, interior, wedge
from gradedconn.frames import Frame
from gradedconn.metric import GradedMetric

logger = logging.getLogger(__name__)


class Connection:
    """Base class: subclasses implement ``_nabla`` for arbitrary derivations."""

    kind = "connection"

    def __init__(self, graded: GradedMetric) -> None:
        self.graded = graded
        self.chart = graded.chart
        self._memo: Dict[Tuple[Derivation, Derivation], Derivation] = {}
        self._lock = threading.Lock()

    def nabla(self, x: Derivation, y: Derivation) -> Derivation:
        """Memoized ``nabla_X Y`` with tidied coefficients."""
        key = (x, y)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        value = self._nabla(x, y).tidy()
        with self._lock:
            self._memo[key] = value
        return value

    __call__ = nabla

    def _nabla(self, x: Derivation, y: Derivation) -> Derivation:
        raise NotImplementedError

    def pair(self, x: Derivation, y: Derivation) -> Form:
        return self.graded.pair(x, y)

    # ── derived tensors ──────────────────────────────────────────────────

    def torsion(self, x: Derivation, y: Derivation) -> Derivation:
        out = Derivation.zero(self.chart)
        for p, xp in x.parity_parts():
            for q, yq in y.parity_parts():
                out = out + self.nabla(xp, yq) - self.nabla(yq, xp).signed(sign_of(p * q))
                out = out - bracket(xp, yq)
        return out

    def curvature(self, x: Derivation, y: Derivation, z: Derivation) -> Derivation:
        """``R(X,Y)Z = nabla_X nabla_Y Z - (-1)^{|X||Y|} nabla_Y nabla_X Z - nabla_[X,Y] Z``."""
        out = Derivation.zero(self.chart)
        for p, xp in x.parity_parts():
            for q, yq in y.parity_parts():
                out = out + self.nabla(xp, self.nabla(yq, z))
                out = out - self.nabla(yq, self.nabla(xp, z)).signed(sign_of(p * q))
                out = out - self.nabla(bracket(xp, yq), z)
        return out

    def ricci(self, x: Derivation, y: Derivation, frame: Frame) -> Form:
        """Trace of the curvature against an orthonormal frame."""
        out = Form.zero(self.chart)
        for p, xp in x.parity_parts():
            for q, yq in y.parity_parts():
                sign = sign_of(p + q)
                for k in range(frame.dim):
                    out = out + self.pair(self.curvature(frame.L(k), xp, yq), frame.i(k))
                    term = self.pair(self.curvature(frame.i(k), xp, yq), frame.L(k))
                    out = out - term if sign > 0 else out + term
        return out

    def metric_residual(self, x: Derivation, y: Derivation, z: Derivation) -> Form:
        """``X<Y,Z> - <nabla_X Y, Z> - (-1)^{|X||Y|} <Y, nabla_X Z>``."""
        out = Form.zero(self.chart)
        for p, xp in x.parity_parts():
            for q, yq in y.parity_parts():
                out = out + xp.apply(self.pair(yq, z)) - self.pair(self.nabla(xp, yq), z)
                term = self.pair(yq, self.nabla(xp, z))
                out = out - term if sign_of(p * q) > 0 else out + term
        return out

    def leibniz_residual(self, x: Derivation, alpha: Form, y: Derivation) -> Derivation:
        """``nabla_X(alpha Y) - X(alpha) Y - (-1)^{|X||alpha|} alpha nabla_X Y``."""
        out = self.nabla(x, mul_left(alpha, y))
        for p, xp in x.parity_parts():
            out = out - mul_left(xp.apply(alpha), y)
            for a, ap in alpha.parity_parts():
                out = out - mul_left(ap, self.nabla(xp, y)).signed(sign_of(p * a))
        return out

    def linearity_residual(self, alpha: Form, x: Derivation, y: Derivation) -> Derivation:
        return self.nabla(mul_left(alpha, x), y) - mul_left(alpha, self.nabla(x, y))


GeneratorRule = Callable[[str, int, str, int], Derivation]


class RuleConnection(Connection):
    """Connection fixed by its values on coordinate generator pairs.

    Extended by Omega-linearity in the first slot and the Leibniz rule in the second.
    """

    def __init__(self, graded: GradedMetric) -> None:
        super().__init__(graded)
        self._generator_memo: Dict[Tuple[str, int, str, int], Derivation] = {}

    def generator_value(self, kind_a: str, j: int, kind_b: str, k: int) -> Derivation:
        key = (kind_a, j, kind_b, k)
        if key not in self._generator_memo:
            self._generator_memo[key] = self._generator(kind_a, j, kind_b, k).tidy()
        return self._generator_memo[key]

    def _generator(self, kind_a: str, j: int, kind_b: str, k: int) -> Derivation:
        raise NotImplementedError

    def _act(self, kind: str, j: int, alpha: Form) -> Form:
        if kind == L_KIND:
            return alpha.partial(j)
        return interior(VectorField.coordinate(self.chart, j), alpha)

    def _nabla(self, x: Derivation, y: Derivation) -> Derivation:
        out = Derivation.zero(self.chart)
        for kind_a, j, a in x.coefficients():
            if a.is_zero():
                continue
            out = out + mul_left(a, self._nabla_generator(kind_a, j, y))
        return out

    def _nabla_generator(self, kind_a: str, j: int, y: Derivation) -> Derivation:
        parity_a = 0 if kind_a == L_KIND else 1
        out = Derivation.zero(self.chart)
        for kind_b, k, c in y.coefficients():
            if c.is_zero():
                continue
            generator = Derivation.generator(self.chart, kind_b, k)
            derivative = self._act(kind_a, j, c)
            if not derivative.is_zero():
                out = out + mul_left(derivative, generator)
            value = self.generator_value(kind_a, j, kind_b, k)
            if value.is_zero():
                continue
            for c_parity, c_part in c.parity_parts():
                out = out + mul_left(c_part, value).signed(sign_of(parity_a * c_parity))
        return out


class LeviCivitaLift(RuleConnection):
    """The graded Levi-Civita connection lifted from ``nabla^g``."""

    kind = "levi-civita"

    def _generator(self, kind_a: str, j: int, kind_b: str, k: int) -> Derivation:
        field = self.graded.metric.christoffel_field(j, k)
        if kind_a == I_KIND and kind_b == I_KIND:
            return Derivation.zero(self.chart)
        if kind_a == L_KIND and kind_b == L_KIND:
            return lift_L(field)
        return lift_i(field)


class SemiSymmetric(Connection):
    """``nabla_X Y = nabla^L_X Y + X <Y,P> - <X,Y> P`` for an odd derivation ``P``."""

    kind = "semi-symmetric"

    def __init__(
        self,
        graded: GradedMetric,
        p: Derivation,
        base: Optional[LeviCivitaLift] = None,
    ) -> None:
        super().__init__(graded)
        if not p.parity_part(0).is_zero():
            raise ParityViolation("P must be odd for a semi-symmetric metric connection")
        self.p = p
        self.base = base or LeviCivitaLift(graded)

    def _nabla(self, x: Derivation, y: Derivation) -> Derivation:
        return (
            self.base.nabla(x, y)
            + mul_right(x, self.pair(y, self.p))
            - mul_left(self.pair(x, y), self.p)
        )

    def torsion_closed(self, x: Derivation, y: Derivation) -> Derivation:
        """``X <Y,P> - (-1)^{|X||Y|} Y <X,P>``."""
        out = Derivation.zero(self.chart)
        for p, xp in x.parity_parts():
            for q, yq in y.parity_parts():
                out = out + mul_right(xp, self.pair(yq, self.p))
                out = out - mul_right(yq, self.pair(xp, self.p)).signed(sign_of(p * q))
        return out

    def curvature_closed(self, x: Derivation, y: Derivation, z: Derivation) -> Derivation:
        """Curvature of the semi-symmetric connection through the Levi-Civita lift."""
        xp, yp, zp = x.parity, y.parity, z.parity
        base, pair, p = self.base, self.pair, self.p
        g_yz, g_xz = pair(y, z), pair(x, z)
        g_pp = pair(p, p)
        g_xp, g_yp, g_zp = pair(x, p), pair(y, p), pair(z, p)
        nx_p, ny_p = base.nabla(x, p), base.nabla(y, p)
        s_xy = sign_of(xp * yp)
        s_xyz = sign_of((xp + yp) * zp)
        terms = [
            base.curvature(x, y, z),
            mul_left(pair(z, nx_p), y).signed(s_xyz),
            -mul_left(pair(z, ny_p), x).signed(s_xy * s_xyz),
            -mul_left(g_yz, nx_p).signed(sign_of(g_yz.parity * xp)),
            mul_left(g_xz, ny_p).signed(s_xy * sign_of(g_xz.parity * yp)),
            mul_left(wedge(g_zp, g_yp), x).signed(sign_of(xp * (yp + zp) + yp * zp)),
            -mul_left(wedge(g_yz, g_pp), x).signed(sign_of(xp * (yp + zp))),
            -mul_left(wedge(g_zp, g_xp), y).signed(s_xyz),
            mul_left(wedge(g_xz, g_pp), y).signed(sign_of(yp * zp)),
            mul_left(wedge(g_yz, g_xp), p).signed(sign_of(xp * g_yz.parity)),
            -mul_left(wedge(g_xz, g_yp), p).signed(s_xy * sign_of(yp * g_xz.parity)),
        ]
        out = Derivation.zero(self.chart)
        for term in terms:
            out = out + term
        return out


def koszul_rhs(conn: Connection, x: Derivation, y: Derivation, z: Derivation) -> Form:
    """Right side of the Koszul formula for homogeneous ``X, Y, Z``."""
    xp, yp, zp = x.parity, y.parity, z.parity
    pair = conn.pair
    first = x.apply(pair(y, z)) + pair(bracket(x, y), z)
    second = y.apply(pair(z, x)) - pair(bracket(y, z), x)
    third = z.apply(pair(x, y)) - pair(bracket(z, x), y)
    second = second if sign_of(xp * (yp + zp)) > 0 else -second
    third = third if sign_of(zp * (xp + yp)) > 0 else -third
    return first + second - third
