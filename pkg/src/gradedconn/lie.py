"""Lie derivatives of partial and normal connections along operators in ``D``."""

import logging
from typing import Callable

import numpy as np

from gradedconn.derivations import Derivation, bracket, mul_left, sign_of
from gradedconn.distributions import D_SIDE, PERP_SIDE, Bilinear, Split
from gradedconn.forms import Form

logger = logging.getLogger(__name__)

Trilinear = Callable[[Derivation, Derivation, Derivation], Derivation]


def _total(*terms: Derivation) -> Derivation:
    out = terms[0]
    for term in terms[1:]:
        out = out + term
    return out


def jacobi_residual(x: Derivation, y: Derivation, z: Derivation) -> Derivation:
    """``[X,[Y,Z]] - [[X,Y],Z] - (-1)^{|X||Y|}[Y,[X,Z]]``."""
    s = sign_of(x.parity * y.parity)
    return (
        bracket(x, bracket(y, z))
        - bracket(bracket(x, y), z)
        - bracket(y, bracket(x, z)).signed(s)
    )


class LieCalculus:
    """Lie derivatives of ``nabla^{D,L}``, ``nabla~^D`` and ``nabla_perp`` on one split.

    The operator ``L_X`` sends ``Y`` to ``[X,Y]^D`` on ``D`` and ``N`` to ``[X,N]^perp``
    on ``D_perp``; a bilinear map ``F`` of parity ``f`` is differentiated as
    ``(L_X F)(Z,W) = L_X(F(Z,W)) - (-1)^{|X|f} F(L_X Z, W) - (-1)^{|X|(f+|Z|)} F(Z, L_X W)``.
    """

    def __init__(self, split: Split) -> None:
        self.split = split

    # ── operators ────────────────────────────────────────────────────────

    def along(self, x: Derivation, w: Derivation, side: str = D_SIDE) -> Derivation:
        return self.split.project(bracket(x, w), side)

    def connection(self, which: str) -> Bilinear:
        if which == "dl":
            return self.split.nabla_dl
        if which == "tilde":
            return self.split.nabla_tilde
        if which == "perp":
            return self.split.nabla_perp
        raise KeyError(which)

    def lie_of(
        self,
        x: Derivation,
        f: Bilinear,
        f_parity: int = 0,
        w_side: str = D_SIDE,
    ) -> Bilinear:
        """``L_X F`` as a new bilinear map; the output lies on ``w_side``."""
        xp = x.parity

        def derived(z: Derivation, w: Derivation) -> Derivation:
            zp = z.parity
            return (
                self.along(x, f(z, w), w_side)
                - f(self.along(x, z), w).signed(sign_of(xp * f_parity))
                - f(z, self.along(x, w, w_side)).signed(sign_of(xp * (f_parity + zp)))
            )

        return derived

    def lie_conn(
        self, x: Derivation, y: Derivation, z: Derivation, which: str = "dl"
    ) -> Derivation:
        side = PERP_SIDE if which == "perp" else D_SIDE
        return self.lie_of(x, self.connection(which), 0, side)(y, z)

    def lie_commutator(self, x: Derivation, y: Derivation, which: str = "dl") -> Bilinear:
        """``[L_X, L_Y](F) = L_X(L_Y F) - (-1)^{|X||Y|} L_Y(L_X F)``."""
        side = PERP_SIDE if which == "perp" else D_SIDE
        f = self.connection(which)
        s = sign_of(x.parity * y.parity)
        xy = self.lie_of(x, self.lie_of(y, f, 0, side), y.parity, side)
        yx = self.lie_of(y, self.lie_of(x, f, 0, side), x.parity, side)
        return lambda z, w: xy(z, w) - yx(z, w).signed(s)

    # ── commutator identities ────────────────────────────────────────────

    def commutator_residual(
        self, x: Derivation, y: Derivation, z: Derivation, w: Derivation, which: str = "dl"
    ) -> Derivation:
        """Commutator of Lie derivatives against its expansion through nested brackets."""
        side = PERP_SIDE if which == "perp" else D_SIDE
        nabla = self.connection(which)
        xp, yp, zp = x.parity, y.parity, z.parity
        s_xy = sign_of(xp * yp)
        along = self.along
        inner = nabla(z, w)
        outer = along(x, along(y, inner, side), side)
        outer = outer - along(y, along(x, inner, side), side).signed(s_xy)
        rhs = _total(
            outer,
            nabla(along(y, along(x, z)), w).signed(s_xy),
            nabla(z, along(y, along(x, w, side), side)).signed(
                sign_of(xp * yp + xp * zp + yp * zp)
            ),
            -nabla(along(x, along(y, z)), w),
            -nabla(z, along(x, along(y, w, side), side)).signed(sign_of((xp + yp) * zp)),
        )
        return self.lie_commutator(x, y, which)(z, w) - rhs

    def bracket_residual(
        self,
        x: Derivation,
        y: Derivation,
        z: Derivation,
        w: Derivation,
        points: np.ndarray,
        which: str = "dl",
    ) -> Derivation:
        """``[L_X, L_Y](F) - L_[X,Y](F)`` for an integrable split."""
        self.split.require_integrable(points)
        side = PERP_SIDE if which == "perp" else D_SIDE
        xy = self.split.bracket_d(x, y)
        lie_xy = self.lie_of(xy, self.connection(which), 0, side)
        return self.lie_commutator(x, y, which)(z, w) - lie_xy(z, w)

    # ── curvature ────────────────────────────────────────────────────────

    def curvature(self, which: str) -> Trilinear:
        """Curvature of ``nabla^{D,L}`` or ``nabla_perp`` on an integrable split."""
        nabla = self.connection(which)
        bd = self.split.bracket_d

        def value(y: Derivation, z: Derivation, w: Derivation) -> Derivation:
            s = sign_of(y.parity * z.parity)
            return nabla(y, nabla(z, w)) - nabla(z, nabla(y, w)).signed(s) - nabla(bd(y, z), w)

        return value

    def lie_curvature(
        self, x: Derivation, y: Derivation, z: Derivation, w: Derivation, which: str = "dl"
    ) -> Derivation:
        side = PERP_SIDE if which == "perp" else D_SIDE
        r = self.curvature(which)
        along = self.along
        xp, yp, zp = x.parity, y.parity, z.parity
        return _total(
            along(x, r(y, z, w), side),
            -r(along(x, y), z, w),
            -r(y, along(x, z), w).signed(sign_of(xp * yp)),
            -r(y, z, along(x, w, side)).signed(sign_of(xp * (yp + zp))),
        )

    def lie_curvature_residual(
        self,
        x: Derivation,
        y: Derivation,
        z: Derivation,
        w: Derivation,
        points: np.ndarray,
        which: str = "dl",
    ) -> Derivation:
        """Lie derivative of the curvature against its five-term expansion."""
        self.split.require_integrable(points)
        side = PERP_SIDE if which == "perp" else D_SIDE
        nabla = self.connection(which)
        lx = self.lie_of(x, nabla, 0, side)
        xp, yp, zp = x.parity, y.parity, z.parity
        rhs = _total(
            -lx(self.split.bracket_d(y, z), w),
            lx(y, nabla(z, w)),
            nabla(y, lx(z, w)).signed(sign_of(xp * yp)),
            -lx(z, nabla(y, w)).signed(sign_of(yp * zp)),
            -nabla(z, lx(y, w)).signed(sign_of((xp + yp) * zp)),
        )
        return self.lie_curvature(x, y, z, w, which) - rhs

    # ── module rules of the normal Lie derivative ────────────────────────

    def normal_linearity_residual(
        self, x: Derivation, alpha: Form, y: Derivation, n: Derivation
    ) -> Derivation:
        lie = self.lie_of(x, self.split.nabla_perp, 0, PERP_SIDE)
        out = lie(mul_left(alpha, y), n)
        for a, part in alpha.parity_parts():
            out = out - mul_left(part, lie(y, n)).signed(sign_of(x.parity * a))
        return out

    def normal_leibniz_residual(
        self, x: Derivation, y: Derivation, alpha: Form, n: Derivation
    ) -> Derivation:
        lie = self.lie_of(x, self.split.nabla_perp, 0, PERP_SIDE)
        xy_perp = self.split.bracket_perp(x, y)
        out = lie(y, mul_left(alpha, n)) - mul_left(xy_perp.apply(alpha), n)
        for a, part in alpha.parity_parts():
            out = out - mul_left(part, lie(y, n)).signed(sign_of((x.parity + y.parity) * a))
        return out
