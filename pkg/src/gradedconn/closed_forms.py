"""Closed-form connection and curvature values on lifted vector fields.

Each rule is written out term by term, exactly as the identity reads. Suites subtract the
definitional value and report the difference as a residual.
"""

import logging
from typing import Callable, Dict, Optional, Tuple

from gradedconn.derivations import Derivation, lift_i, lift_L, mul_left
from gradedconn.forms import Form, VectorField, ext_d, interior, lie_form
from gradedconn.metric import RiemannMetric

logger = logging.getLogger(__name__)

RULE_KINDS = {
    "nabla": ("LL", "Li", "iL", "ii"),
    "curvature": ("LLL", "LLi", "LiL", "Lii", "iiL", "iii"),
}


class ClosedForms:
    """Closed forms for ``P = i_U`` and ``P = omega L_U`` on a Riemannian chart."""

    def __init__(
        self,
        metric: RiemannMetric,
        u: Optional[VectorField] = None,
        omega: Optional[Form] = None,
    ) -> None:
        self.metric = metric
        self.chart = metric.chart
        self.u = u if u is not None else VectorField.zero(self.chart)
        self.omega = omega if omega is not None else Form.zero(self.chart)
        self.zero = Derivation.zero(self.chart)

    # ── small vocabulary ─────────────────────────────────────────────────

    def g(self, x: VectorField, y: VectorField) -> Form:
        return Form.scalar(self.chart, self.metric.inner(x, y))

    def dg(self, x: VectorField, y: VectorField) -> Form:
        return ext_d(self.g(x, y))

    def nu(self, x: VectorField) -> VectorField:
        """``nabla^g_X U``."""
        return self.metric.nabla(x, self.u)

    def rg(self, x: VectorField, y: VectorField, z: VectorField) -> VectorField:
        return self.metric.riemann(x, y, z)

    def lw(self, x: VectorField) -> Form:
        """``L_X(omega)``."""
        return lie_form(x, self.omega)

    def iw(self, x: VectorField) -> Form:
        """``i_X(omega)``."""
        return interior(x, self.omega)

    @staticmethod
    def times(*factors: Form) -> Form:
        out = factors[0]
        for f in factors[1:]:
            out = out ^ f
        return out

    def term(self, coefficient: Form, target: Derivation) -> Derivation:
        return mul_left(coefficient, target)

    def total(self, *terms: Derivation) -> Derivation:
        out = self.zero
        for t in terms:
            out = out + t
        return out

    # ── P = i_U ──────────────────────────────────────────────────────────

    def nabla_iu(self, rule: str, x: VectorField, y: VectorField) -> Derivation:
        L, i, g, dg, t = lift_L, lift_i, self.g, self.dg, self.term
        u = self.u
        nxy = self.metric.nabla(x, y)
        if rule == "LL":
            return self.total(L(nxy), t(g(y, u), L(x)), -t(dg(x, y), i(u)))
        if rule == "Li":
            return self.total(i(nxy), -t(g(x, y), i(u)))
        if rule == "iL":
            return self.total(i(nxy), t(g(y, u), i(x)), -t(g(x, y), i(u)))
        if rule == "ii":
            return self.zero
        raise KeyError(rule)

    def curvature_iu(
        self, rule: str, x: VectorField, y: VectorField, z: VectorField
    ) -> Derivation:
        L, i, g, dg, t, m = lift_L, lift_i, self.g, self.dg, self.term, self.times
        u, nu, rg = self.u, self.nu, self.rg(x, y, z)
        if rule == "LLL":
            return self.total(
                L(rg),
                t(g(z, nu(x)), L(y)),
                -t(g(z, nu(y)), L(x)),
                -t(dg(y, z), i(nu(x))),
                t(dg(x, z), i(nu(y))),
                t(m(g(z, u), g(y, u)), L(x)),
                -t(m(g(z, u), g(x, u)), L(y)),
                t(m(dg(y, z), g(x, u)), i(u)),
                -t(m(dg(x, z), g(y, u)), i(u)),
            )
        if rule == "LLi":
            return self.total(
                i(rg),
                -t(g(y, z), i(nu(x))),
                t(g(x, z), i(nu(y))),
                t(m(g(y, z), g(x, u)), i(u)),
                -t(m(g(x, z), g(y, u)), i(u)),
            )
        if rule == "LiL":
            return self.total(
                i(rg),
                t(g(z, nu(x)), i(y)),
                -t(g(y, z), i(nu(x))),
                -t(m(g(z, u), g(x, u)), i(y)),
                t(m(g(y, z), g(x, u)), i(u)),
            )
        if rule in ("Lii", "iiL", "iii"):
            return self.zero
        raise KeyError(rule)

    # ── P = omega L_U ────────────────────────────────────────────────────

    def nabla_omega(self, rule: str, x: VectorField, y: VectorField) -> Derivation:
        L, i, g, dg, t, m = lift_L, lift_i, self.g, self.dg, self.term, self.times
        u, w = self.u, self.omega
        nxy = self.metric.nabla(x, y)
        if rule == "LL":
            return self.total(L(nxy), t(m(w, dg(y, u)), L(x)), -t(m(dg(x, y), w), L(u)))
        if rule == "Li":
            return self.total(i(nxy), -t(m(w, g(y, u)), L(x)), -t(m(g(x, y), w), L(u)))
        if rule == "iL":
            return self.total(i(nxy), t(m(w, dg(y, u)), i(x)), -t(m(g(x, y), w), L(u)))
        if rule == "ii":
            return t(m(w, g(y, u)), i(x))
        raise KeyError(rule)

    def curvature_omega(
        self, rule: str, x: VectorField, y: VectorField, z: VectorField
    ) -> Derivation:
        L, i, g, dg, t, m = lift_L, lift_i, self.g, self.dg, self.term, self.times
        u, w, nu, lw, iw = self.u, self.omega, self.nu, self.lw, self.iw
        rg = self.rg(x, y, z)
        if rule == "LLL":
            return self.total(
                L(rg),
                t(m(lw(x), dg(z, u)), L(y)),
                t(m(w, dg(z, nu(x))), L(y)),
                -t(m(lw(y), dg(z, u)), L(x)),
                -t(m(w, dg(z, nu(y))), L(x)),
                -t(m(dg(y, z), lw(x)), L(u)),
                -t(m(dg(y, z), w), L(nu(x))),
                t(m(dg(x, z), lw(y)), L(u)),
                t(m(dg(x, z), w), L(nu(y))),
            )
        if rule == "LLi":
            return self.total(
                i(rg),
                -t(m(lw(x), g(z, u)), L(y)),
                -t(m(w, g(z, nu(x))), L(y)),
                t(m(lw(y), g(z, u)), L(x)),
                t(m(w, g(z, nu(y))), L(x)),
                -t(m(g(y, z), lw(x)), L(u)),
                -t(m(g(y, z), w), L(nu(x))),
                t(m(g(x, z), lw(y)), L(u)),
                t(m(g(x, z), w), L(nu(y))),
            )
        if rule == "LiL":
            return self.total(
                i(rg),
                t(m(lw(x), dg(z, u)), i(y)),
                t(m(w, dg(z, nu(x))), i(y)),
                -t(m(iw(y), dg(z, u)), L(x)),
                t(m(w, g(z, nu(y))), L(x)),
                -t(m(g(y, z), lw(x)), L(u)),
                -t(m(g(y, z), w), L(nu(x))),
                -t(m(dg(x, z), iw(y)), L(u)),
                t(m(dg(x, z), w), i(nu(y))),
            )
        if rule == "Lii":
            return self.total(
                t(m(lw(x), g(z, u)), i(y)),
                t(m(w, g(z, nu(x))), i(y)),
                t(m(iw(y), g(z, u)), L(x)),
                t(m(g(x, z), iw(y)), L(u)),
                -t(m(g(x, z), w), i(nu(y))),
            )
        if rule == "iiL":
            return self.total(
                t(m(iw(x), dg(z, u)), i(y)),
                -t(m(w, g(z, nu(x))), i(y)),
                t(m(iw(y), dg(z, u)), i(x)),
                -t(m(w, g(z, nu(y))), i(x)),
                -t(m(g(y, z), iw(x)), L(u)),
                t(m(g(y, z), w), i(nu(x))),
                -t(m(g(x, z), iw(y)), L(u)),
                t(m(g(x, z), w), i(nu(y))),
            )
        if rule == "iii":
            return self.total(
                t(m(iw(x), g(z, u)), i(y)),
                t(m(iw(y), g(z, u)), i(x)),
            )
        raise KeyError(rule)

    # ── Levi-Civita lift ─────────────────────────────────────────────────

    def curvature_lc(
        self, rule: str, x: VectorField, y: VectorField, z: VectorField
    ) -> Derivation:
        rg = self.rg(x, y, z)
        if rule == "LLL":
            return lift_L(rg)
        if rule in ("LLi", "LiL"):
            return lift_i(rg)
        if rule in ("Lii", "iiL", "iii"):
            return self.zero
        raise KeyError(rule)


ClosedRule = Callable[..., Derivation]


def closed_rules(forms: ClosedForms) -> Dict[str, Tuple[str, ClosedRule]]:
    """Family name mapped to ``(rule kind, evaluator)``."""
    return {
        "nabla-iU": ("nabla", forms.nabla_iu),
        "nabla-omegaLU": ("nabla", forms.nabla_omega),
        "curvature-lc": ("curvature", forms.curvature_lc),
        "curvature-iU": ("curvature", forms.curvature_iu),
        "curvature-omegaLU": ("curvature", forms.curvature_omega),
    }
