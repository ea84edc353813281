"""Connections on a parallelized chart: canonical, dual, blends, Schouten and Vranceanu."""

import logging
from typing import List, Sequence, Tuple

import sympy

from gradedconn.connections import Connection
from gradedconn.derivations import (
    I_KIND,
    L_KIND,
    Derivation,
    bracket,
    lift,
    lift_i,
    lift_L,
    mul_left,
    sign_of,
)
from gradedconn.exceptions import NonConstantStructure, ParityViolation, PreconditionViolated
from gradedconn.forms import Form, VectorField, interior, lie_form
from gradedconn.frames import Frame, ParallelFrame
from gradedconn.metric import GradedMetric

logger = logging.getLogger(__name__)


class Canonical(Connection):
    """The connection that kills every ``L_{X_k}`` and ``i_{X_k}`` of the frame."""

    kind = "canonical"

    def __init__(self, graded: GradedMetric, frame: ParallelFrame) -> None:
        super().__init__(graded)
        self.frame = frame

    def _nabla(self, x: Derivation, y: Derivation) -> Derivation:
        omega, omega_i = self.frame.expand(y)
        return self.frame.combine([x.apply(w) for w in omega], [x.apply(w) for w in omega_i])


class Dual(Connection):
    """``nabla~_X Y = (-1)^{|X||Y|} nabla^c_Y X + [X,Y]``."""

    kind = "dual"

    def __init__(self, canonical: Canonical) -> None:
        super().__init__(canonical.graded)
        self.canonical = canonical

    def _nabla(self, x: Derivation, y: Derivation) -> Derivation:
        out = bracket(x, y)
        for p, xp in x.parity_parts():
            for q, yq in y.parity_parts():
                out = out + self.canonical.nabla(yq, xp).signed(sign_of(p * q))
        return out


class Blend(Connection):
    """``(1 - w) nabla^c + w nabla~`` for an even form ``w``."""

    kind = "blend"

    def __init__(self, canonical: Canonical, dual: Dual, weight: Form) -> None:
        super().__init__(canonical.graded)
        if not weight.parity_part(1).is_zero():
            raise ParityViolation("Blend weight must be an even form")
        self.canonical = canonical
        self.dual = dual
        self.weight = weight

    @classmethod
    def constant(cls, canonical: Canonical, dual: Dual, value: float) -> "Blend":
        weight = Form.scalar(canonical.chart, sympy.Rational(repr(value)))
        blend = cls(canonical, dual, weight)
        blend.kind = f"lambda={value}"
        return blend

    def _nabla(self, x: Derivation, y: Derivation) -> Derivation:
        base = self.canonical.nabla(x, y)
        return base + mul_left(self.weight, self.dual.nabla(x, y) - base)


class Schouten(Connection):
    """``pi^D nabla_X pi^D Y + pi^perp nabla_X pi^perp Y``."""

    kind = "schouten"

    def __init__(self, base: Connection, frame: Frame, d_indices: Sequence[int]) -> None:
        super().__init__(base.graded)
        self.base = base
        self.frame = frame
        self.d_indices = tuple(d_indices)
        self.perp_indices = tuple(k for k in range(frame.dim) if k not in self.d_indices)

    def d(self, w: Derivation) -> Derivation:
        return self.frame.project(w, self.d_indices)

    def perp(self, w: Derivation) -> Derivation:
        return self.frame.project(w, self.perp_indices)

    def _nabla(self, x: Derivation, y: Derivation) -> Derivation:
        return self.d(self.base.nabla(x, self.d(y))) + self.perp(self.base.nabla(x, self.perp(y)))


class Vranceanu(Schouten):
    kind = "vranceanu"

    def _nabla(self, x: Derivation, y: Derivation) -> Derivation:
        d, perp, nabla = self.d, self.perp, self.base.nabla
        return (
            d(nabla(d(x), d(y)))
            + perp(nabla(perp(x), perp(y)))
            + d(bracket(perp(x), d(y)))
            + perp(bracket(d(x), perp(y)))
        )


def lie_of_connection(conn: Connection, x: Derivation, y: Derivation, z: Derivation) -> Derivation:
    """``(L_X nabla)(Y,Z)`` with full brackets."""
    return (
        bracket(x, conn.nabla(y, z))
        - conn.nabla(bracket(x, y), z)
        - conn.nabla(y, bracket(x, z)).signed(sign_of(x.parity * y.parity))
    )


class ParallelTables:
    """Closed generator tables for the connections of a parallel frame."""

    def __init__(self, frame: ParallelFrame, canonical: Canonical) -> None:
        self.frame = frame
        self.canonical = canonical
        self.chart = frame.chart
        self.zero = Derivation.zero(self.chart)

    def generator(self, kind: str, k: int) -> Derivation:
        return lift(kind, self.frame.rows[k])

    def field_bracket(self, j: int, l: int) -> VectorField:
        return self.frame.rows[j].bracket(self.frame.rows[l])

    def require_constant(self) -> None:
        if not self.frame.is_constant:
            raise NonConstantStructure(f"{self.frame.name} has non-constant structure functions")

    # ── canonical and dual ───────────────────────────────────────────────

    def canonical_torsion(self, kind_a: str, j: int, kind_b: str, l: int) -> Derivation:
        if kind_a == L_KIND and kind_b == L_KIND:
            return -lift_L(self.field_bracket(j, l))
        if kind_a == L_KIND and kind_b == I_KIND:
            return -lift_i(self.field_bracket(j, l))
        if kind_a == I_KIND and kind_b == L_KIND:
            return lift_i(self.field_bracket(l, j))
        return self.zero

    def lambda_nabla(self, lam: object, kind_a: str, j: int, kind_b: str, l: int) -> Derivation:
        if kind_a == I_KIND and kind_b == I_KIND:
            return self.zero
        value = Form.scalar(self.chart, lam)
        target = lift_L if (kind_a, kind_b) == (L_KIND, L_KIND) else lift_i
        return mul_left(value, target(self.field_bracket(j, l)))

    # ── curvature tables ─────────────────────────────────────────────────

    def _structure_derivative(self, j: int, k: int, l: int) -> Tuple[VectorField, VectorField]:
        """``sum_mu [X_j C^mu_kl - X_k C^mu_jl] X_mu`` and ``sum_mu X_l(C^mu_jk) X_mu``."""
        rows, c = self.frame.rows, self.frame.structure
        m = self.frame.dim
        first = [rows[j].apply(c[mu][k][l]) - rows[k].apply(c[mu][j][l]) for mu in range(m)]
        second = [rows[l].apply(c[mu][j][k]) for mu in range(m)]
        return self.frame.combination(first), self.frame.combination(second)

    def lambda_curvature(self, lam: object, rule: str, j: int, k: int, l: int) -> Derivation:
        if rule not in ("LLL", "LLi", "LiL"):
            return self.zero
        lam = sympy.sympify(lam)
        target = lift_L if rule == "LLL" else lift_i
        nested = self.field_bracket(j, k).bracket(self.frame.rows[l])
        derivative, along_l = self._structure_derivative(j, k, l)
        return (
            target(nested.scale(lam**2 - lam))
            + target(derivative.scale(lam - lam**2))
            - target(along_l.scale(lam))
        )

    def omega_curvature(self, omega: Form, rule: str, j: int, k: int, l: int) -> Derivation:
        self.require_constant()
        rows = self.frame.rows
        lw = lambda v: lie_form(v, omega)  # noqa: E731
        iw = lambda v: interior(v, omega)  # noqa: E731
        quad = (omega ^ omega) - omega
        nested = self.field_bracket(j, k).bracket(rows[l])
        kl, jl = self.field_bracket(k, l), self.field_bracket(j, l)
        if rule == "LLL":
            return (
                mul_left(lw(rows[j]), lift_L(kl))
                - mul_left(lw(rows[k]), lift_L(jl))
                + mul_left(quad, lift_L(nested))
            )
        if rule == "LLi":
            return (
                mul_left(lw(rows[j]), lift_i(kl))
                - mul_left(lw(rows[k]), lift_i(jl))
                + mul_left(quad, lift_i(nested))
            )
        if rule == "LiL":
            return (
                mul_left(lw(rows[j]), lift_i(kl))
                - mul_left(iw(rows[k]), lift_L(jl))
                + mul_left(quad, lift_i(nested))
            )
        if rule == "Lii":
            return -mul_left(iw(rows[k]), lift_i(jl))
        if rule == "iiL":
            return mul_left(iw(rows[j]), lift_i(kl)) + mul_left(iw(rows[k]), lift_i(jl))
        return self.zero

    def omega_ricci(self, omega: Form, kind_a: str, j: int, kind_b: str, l: int) -> Form:
        self.require_constant()
        jl = self.field_bracket(j, l)
        if kind_a == L_KIND and kind_b == L_KIND:
            return lie_form(jl, omega)
        if kind_a == I_KIND and kind_b == I_KIND:
            return Form.zero(self.chart)
        return interior(jl, omega)

    # ── Lie derivatives of the dual connection ───────────────────────────

    def dual_lie_symmetry(
        self, dual: Dual, x: Derivation, y: Derivation, z: Derivation, swapped: bool = True
    ) -> Derivation:
        """``(L_X nabla~)(Y,Z) - (-1)^{|Y||Z|} (L_X nabla^c)(Z,Y)``.

        With ``swapped=False`` the canonical side is taken at ``(Y,Z)`` instead.
        """
        s = sign_of(y.parity * z.parity)
        canonical_side = (
            lie_of_connection(self.canonical, x, z, y)
            if swapped
            else lie_of_connection(self.canonical, x, y, z)
        )
        return lie_of_connection(dual, x, y, z) - canonical_side.signed(s)

    def require_parallel(self, x: Derivation) -> None:
        for _, generator in self.frame.generators():
            if not self.canonical.nabla(generator, x).is_zero():
                raise PreconditionViolated("nabla^c X must vanish")

    def dual_lie_torsion(
        self, dual: Dual, x: Derivation, y: Derivation, z: Derivation
    ) -> Derivation:
        self.require_parallel(x)
        c = self.canonical
        xp, yp, zp = x.parity, y.parity, z.parity
        expected = -c.torsion(x, c.nabla(z, y)).signed(sign_of(yp * zp))
        expected = expected + c.nabla(z, c.torsion(x, y)).signed(sign_of((xp + yp) * zp))
        return lie_of_connection(dual, x, y, z) - expected


def parallel_defect(conn: Connection, frame: Frame, d_indices: Sequence[int]) -> List[Derivation]:
    """Per generator pair, the parts of ``nabla`` that leave ``D`` or ``D_perp``."""
    perp_indices = [k for k in range(frame.dim) if k not in d_indices]
    parts: List[Derivation] = []
    for _, x in frame.generators():
        for _, y in frame.generators(d_indices):
            parts.append(frame.project(conn.nabla(x, y), perp_indices))
        for _, y in frame.generators(perp_indices):
            parts.append(frame.project(conn.nabla(x, y), d_indices))
    return parts
