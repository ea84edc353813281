"""Check suites.

A check computes one symbolic residual, which is then evaluated at every sample point in a
single vectorised pass. Checks fan out over a thread pool and rows are merged in a fixed
order, so a report depends only on the manifest and the engine version.
"""

import itertools
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property, partial
from typing import (
    Callable,
    Dict,
    Hashable,
    Iterator,
    List,
    Optional,
    Sequence,
    Tuple,
    TypeVar,
    Union,
    cast,
)

import numpy as np
import sympy

from gradedconn import __version__
from gradedconn.closed_forms import RULE_KINDS, ClosedForms, closed_rules
from gradedconn.config import EngineConfig
from gradedconn.connections import (
    Connection,
    LeviCivitaLift,
    SemiSymmetric,
    koszul_rhs,
)
from gradedconn.derivations import (
    Derivation,
    bracket,
    generators,
    lift,
    lift_i,
    lift_L,
    mul_left,
    print_derivation,
    sign_of,
)
from gradedconn.distributions import D_SIDE, PERP_SIDE, Split
from gradedconn.exceptions import REFUSALS, EvalSingularity, GconnError, PreconditionViolated
from gradedconn.forms import Form, VectorField, ext_d, lie_form, print_form
from gradedconn.lie import LieCalculus, jacobi_residual
from gradedconn.manifest import P_INTERIOR, P_OMEGA_LIE, Manifest
from gradedconn.numeric import Residual, max_abs, max_abs_many
from gradedconn.parallel import (
    Blend,
    Canonical,
    Dual,
    ParallelTables,
    Schouten,
    Vranceanu,
    parallel_defect,
)
from gradedconn.report import (
    STATUS_ERROR,
    STATUS_FAIL,
    STATUS_INFO,
    STATUS_PASS,
    CheckReport,
    CheckRow,
)

logger = logging.getLogger(__name__)

SUITE_ORDER = ("semisym", "curvature", "ricci", "dist", "lie", "pframe")
SUITES = SUITE_ORDER + ("all",)
SETUP_ID = "setup"

EQUATION_IDS: Dict[str, Tuple[str, ...]] = {
    "semisym": (
        "graded-metric-symmetry",
        "metric-nondegenerate",
        "koszul",
        "lc-torsion",
        "lc-metric",
        "connection-linearity",
        "connection-leibniz",
        "semisym-torsion",
        "semisym-metric",
        "closed-nabla-iU",
        "closed-nabla-omegaLU",
        "exterior-dd",
        "bracket-lift",
        "jacobi",
    ),
    "curvature": (
        "semisym-curvature-general",
        "closed-curvature-lc",
        "closed-curvature-iU",
        "closed-curvature-omegaLU",
        "curvature-tensorial",
        "curvature-antisymmetry",
    ),
    "ricci": ("ricci-flat-iU", "ricci-flat-lc", "einstein-omegaLU"),
    "dist": (
        "split-orthogonal",
        "projection-partition",
        "partial-lc-rules",
        "partial-lc-metric",
        "partial-lc-torsion",
        "partial-koszul",
        "second-fundamental-rules",
        "second-fundamental-symmetry",
        "semisym-decomposition",
        "partial-ss-metric",
        "partial-ss-torsion",
        "shape-rules",
        "shape-adjoint",
        "weingarten",
        "semisym-swap",
        "gauss",
        "gauss-lc",
        "codazzi",
        "codazzi-lc",
        "ricci-equation",
        "ricci-equation-lc",
    ),
    "lie": (
        "lie-partial-commutator",
        "lie-partial-ss-commutator",
        "lie-partial-bracket",
        "lie-curvature",
        "lie-normal-rules",
        "lie-normal-commutator",
        "lie-normal-bracket",
        "lie-normal-curvature",
    ),
    "pframe": (
        "structure-bracket",
        "canonical-kills-frame",
        "canonical-torsion-table",
        "canonical-flat",
        "canonical-metric",
        "dual-torsion",
        "lambda-table",
        "lambda-endpoints",
        "lambda-curvature-table",
        "lambda-ricci-flat",
        "omega-curvature-table",
        "omega-ricci-table",
        "dual-lie-symmetry",
        "dual-lie-symmetry-as-stated",
        "dual-lie-torsion",
        "schouten-parallel",
        "vranceanu-parallel",
        "schouten-equals-base",
        "vranceanu-symmetric",
        "schouten-torsion-nonintegrable",
    ),
}

REFERENCES: Dict[str, str] = {
    "graded-metric-symmetry": "graded symmetry of the graded metric G_g",
    "metric-nondegenerate": "G_g(L_X, i_Y) = g(X, Y) on coordinate fields",
    "koszul": "Koszul formula for the graded Levi-Civita connection",
    "lc-torsion": "the Levi-Civita lift is torsion free",
    "lc-metric": "the Levi-Civita lift is metric compatible",
    "connection-linearity": "Omega-linearity of a graded connection in its first slot",
    "connection-leibniz": "Leibniz rule of a graded connection in its second slot",
    "semisym-torsion": "torsion of the semi-symmetric connection",
    "semisym-metric": "the semi-symmetric connection is metric compatible",
    "closed-nabla-iU": "connection rules on lifts for P = i_U",
    "closed-nabla-omegaLU": "connection rules on lifts for P = omega L_U",
    "exterior-dd": "d o d = 0 on forms",
    "bracket-lift": "brackets of lifted vector fields",
    "jacobi": "graded Jacobi identity",
    "semisym-curvature-general": "semi-symmetric curvature through the Levi-Civita lift",
    "closed-curvature-lc": "curvature of the Levi-Civita lift on lifts",
    "closed-curvature-iU": "curvature on lifts for P = i_U",
    "closed-curvature-omegaLU": "curvature on lifts for P = omega L_U",
    "curvature-tensorial": "Omega-linearity of the curvature in every slot",
    "curvature-antisymmetry": "graded antisymmetry of the curvature in its first two slots",
    "ricci-flat-iU": "the connection for P = i_U is Ricci flat",
    "ricci-flat-lc": "the Levi-Civita lift is Ricci flat",
    "einstein-omegaLU": "the connection for P = omega L_U is Einstein with coefficient -L_U omega",
    "split-orthogonal": "G_g(D, D_perp) = 0",
    "projection-partition": "the two projections sum to the identity and are idempotent",
    "partial-lc-rules": "module rules of the partial Levi-Civita connection",
    "partial-lc-metric": "metricity of the partial Levi-Civita connection",
    "partial-lc-torsion": "torsion of the partial Levi-Civita connection is -[X, Y]^perp",
    "partial-koszul": "Koszul-type formula for the partial Levi-Civita connection",
    "second-fundamental-rules": "Omega-bilinearity of the second fundamental form",
    "second-fundamental-symmetry": "B(X, Y) - B(Y, X) = [X, Y]^perp up to sign",
    "semisym-decomposition": "nabla = tilde nabla^D + tilde B with both parts explicit",
    "partial-ss-metric": "metricity of the partial semi-symmetric connection",
    "partial-ss-torsion": "torsion of the partial semi-symmetric connection",
    "shape-rules": "module rules of the shape operator",
    "shape-adjoint": "G_g(B(X, Y), xi) against G_g(Y, A_X xi)",
    "weingarten": "Weingarten formula for both connections",
    "semisym-swap": "recombination of nabla_X Y and nabla_Y X",
    "gauss": "Gauss equation for D",
    "gauss-lc": "Gauss equation for D with U = 0",
    "codazzi": "Codazzi equation for D",
    "codazzi-lc": "Codazzi equation for D with U = 0",
    "ricci-equation": "Ricci equation for D",
    "ricci-equation-lc": "Ricci equation for D with U = 0",
    "lie-partial-commutator": "commutator of Lie derivatives of the partial connection",
    "lie-partial-ss-commutator": "the same commutator for the partial semi-symmetric connection",
    "lie-partial-bracket": "[L_X, L_Y] = L_[X, Y] on the partial connection of an integrable D",
    "lie-curvature": "Lie derivative of the partial curvature on an integrable D",
    "lie-normal-rules": "module rules of the Lie derivative of the normal connection",
    "lie-normal-commutator": "commutator of Lie derivatives of the normal connection",
    "lie-normal-bracket": "[L_X, L_Y] = L_[X, Y] on the normal connection of an integrable D",
    "lie-normal-curvature": "Lie derivative of the normal curvature on an integrable D",
    "structure-bracket": "[X_k, X_l] = C^mu_kl X_mu",
    "canonical-kills-frame": "the canonical connection kills the frame lifts",
    "canonical-torsion-table": "torsion table of the canonical connection",
    "canonical-flat": "the canonical connection is flat",
    "canonical-metric": "the canonical connection is metric compatible",
    "dual-torsion": "the dual connection has the opposite torsion",
    "lambda-table": "rules of the lambda-blend on frame lifts",
    "lambda-endpoints": "the lambda-blend at 0 and 1",
    "lambda-curvature-table": "curvature table of the lambda-blend",
    "lambda-ricci-flat": "Ricci flatness of the lambda-blend",
    "omega-curvature-table": "curvature table of the omega-blend",
    "omega-ricci-table": "Ricci table of the omega-blend",
    "dual-lie-symmetry": "symmetry of the Lie derivative of the dual connection",
    "dual-lie-symmetry-as-stated": "the same symmetry with the sign as first written",
    "dual-lie-torsion": "Lie derivative of the dual connection against its torsion",
    "schouten-parallel": "D is parallel for the Schouten connection",
    "vranceanu-parallel": "D and D_perp are parallel for the Vranceanu connection",
    "schouten-equals-base": "the Schouten connection equals its base when D is parallel",
    "vranceanu-symmetric": "the Vranceanu connection is torsion free when both sides integrate",
    "schouten-torsion-nonintegrable": "torsion of the Schouten connection on a non-integrable D",
}


MAX_CASES = 64
MAX_DEEP_CASES = 32
MAX_FRAME_TRIPLES = 9
NOTE_LIMIT = 240

Labelled = Tuple[str, Derivation]
Computed = Union[Residual, Dict[str, Residual]]


@dataclass
class Check:
    """One identity on one tuple of arguments."""

    suite: str
    equation: str
    case: str
    compute: Callable[[], Computed]
    scale: Optional[Callable[[], Residual]] = None
    exact: bool = False
    info: bool = False


T = TypeVar("T")


def _thin(items: Sequence[T], limit: Optional[int]) -> List[T]:
    """At most ``limit`` evenly spaced items, always keeping the first and last."""
    if limit is None or len(items) <= limit:
        return list(items)
    picks = sorted(set(np.linspace(0, len(items) - 1, limit).round().astype(int).tolist()))
    return [items[i] for i in picks]


def _cases(
    pools: Sequence[Sequence[Labelled]], limit: Optional[int] = MAX_CASES
) -> List[Tuple[str, Tuple[Derivation, ...]]]:
    """Cartesian product of labelled pools, thinned to ``limit`` evenly spaced tuples."""
    combos = _thin(list(itertools.product(*pools)), limit)
    return [(",".join(label for label, _ in combo), tuple(w for _, w in combo)) for combo in combos]


def _kind(label: str) -> Tuple[str, int]:
    return label[0], int(label[1:]) - 1


def _describe(value: Residual) -> str:
    if isinstance(value, Derivation):
        text = print_derivation(value)
    elif isinstance(value, Form):
        text = print_form(value)
    elif isinstance(value, (list, tuple)):
        text = "; ".join(_describe(v) for v in value)
    else:
        text = str(value)
    return text if len(text) <= NOTE_LIMIT else text[: NOTE_LIMIT - 3] + "..."


@dataclass
class Pending:
    """A check whose symbolic residual is computed but not yet evaluated."""

    check: Check
    value: Residual
    scale: Optional[Residual] = None
    residual: Optional[np.ndarray] = None
    note: Optional[str] = None


class SuiteContext:
    """Connections, splits and tables built once per run and shared by every check."""

    def __init__(self, manifest: Manifest, relative: float, absolute: float) -> None:
        self.manifest = manifest
        self.chart = manifest.chart
        self.points = manifest.points
        self.relative = relative
        self.absolute = absolute
        self._once: Dict[Hashable, Tuple[object, Optional[Exception]]] = {}
        self._lock = threading.Lock()

    @cached_property
    def lc(self) -> LeviCivitaLift:
        return LeviCivitaLift(self.manifest.graded)

    @cached_property
    def ss(self) -> SemiSymmetric:
        return SemiSymmetric(self.manifest.graded, self.manifest.p, self.lc)

    @cached_property
    def generators(self) -> List[Labelled]:
        return generators(self.chart)

    @cached_property
    def fields(self) -> List[VectorField]:
        return [VectorField.coordinate(self.chart, j) for j in range(self.chart.dim)]

    @cached_property
    def field_families(self) -> List[List[Tuple[str, VectorField]]]:
        """Coordinate fields ``e_k``, then the frame ``E_k`` and parallel frame ``X_k`` rows."""
        families = [[(f"e{k + 1}", v) for k, v in enumerate(self.fields)]]
        frame = self.manifest.frame
        if not frame.is_coordinate:
            families.append([(f"E{k + 1}", v) for k, v in enumerate(frame.rows)])
        parallel = self.manifest.parallel_frame
        if parallel is not None and not parallel.is_coordinate and parallel.rows != frame.rows:
            families.append([(f"X{k + 1}", v) for k, v in enumerate(parallel.rows)])
        return families

    @cached_property
    def alphas(self) -> List[Tuple[str, Form]]:
        name = self.chart.names[0]
        return [
            (name, Form.scalar(self.chart, self.chart.symbols[0])),
            (f"d{name}", Form.dx(self.chart, 0)),
        ]

    @cached_property
    def closed(self) -> ClosedForms:
        return ClosedForms(self.manifest.metric, self.manifest.u, self.manifest.omega)

    @cached_property
    def split(self) -> Optional[Split]:
        declared = self.manifest.distribution
        if declared is None:
            return None
        return Split(self.ss, self.manifest.frame_named(declared.frame), declared.indices)

    @cached_property
    def structural(self) -> bool:
        """Constant metric and constant split frame, so split identities cancel exactly."""
        symbols = set(self.chart.symbols)
        entries = list(self.manifest.metric.g)
        if self.split is not None:
            entries += list(self.split.frame.matrix)
        return all(not (sympy.sympify(e).free_symbols & symbols) for e in entries)

    @cached_property
    def canonical(self) -> Canonical:
        assert self.manifest.parallel_frame is not None
        return Canonical(self.manifest.graded, self.manifest.parallel_frame)

    @cached_property
    def dual(self) -> Dual:
        return Dual(self.canonical)

    @cached_property
    def tables(self) -> ParallelTables:
        assert self.manifest.parallel_frame is not None
        return ParallelTables(self.manifest.parallel_frame, self.canonical)

    def blend(self, value: float) -> Blend:
        return Blend.constant(self.canonical, self.dual, value)

    def once(self, key: Hashable, build: Callable[[], object]) -> object:
        """``build()`` run once per key and run; a refusal it raises is raised again."""
        if key not in self._once:
            try:
                outcome: Tuple[object, Optional[Exception]] = (build(), None)
            except REFUSALS as e:
                outcome = (None, e)
            with self._lock:
                self._once.setdefault(key, outcome)
        value, error = self._once[key]
        if error is not None:
            raise error
        return value

    # ── rows ─────────────────────────────────────────────────────────────

    def error_row(self, check: Check, status: str, error: GconnError) -> CheckRow:
        return CheckRow(
            suite=check.suite,
            equation=check.equation,
            case=check.case,
            point_index=-1,
            point=[],
            residual=None,
            tolerance=self.relative,
            status=status,
            error=error.tag,
            note=str(error)[:NOTE_LIMIT],
        )

    def _guarded(self, check: Check, step: Callable[[], Pending]) -> Union[Pending, List[CheckRow]]:
        try:
            return step()
        except REFUSALS as e:
            return [self.error_row(check, STATUS_INFO, e)]
        except GconnError as e:
            logger.debug(f"{check.equation} [{check.case}] raised {e.tag}: {e}")
            return [self.error_row(check, STATUS_ERROR, e)]
        except Exception as e:
            logger.exception(f"{check.equation} [{check.case}] crashed")
            crash = GconnError(f"{type(e).__name__}: {e}")
            crash.tag = "internal"
            return [self.error_row(check, STATUS_ERROR, crash)]

    def compute(self, check: Check) -> Union[Pending, List[CheckRow]]:
        """Symbolic half of a check; refusals and errors come back as finished rows."""

        def step() -> Pending:
            value = check.compute()
            if isinstance(value, dict):
                scored = [
                    (label, max_abs(v, self.points, self.chart), v) for label, v in value.items()
                ]
                label, residual, chosen = min(scored, key=lambda item: float(item[1].max()))
                return Pending(check, chosen, self._scale(check), residual, f"order={label}")
            return Pending(check, value, self._scale(check))

        return self._guarded(check, step)

    def _scale(self, check: Check) -> Optional[Residual]:
        if check.scale is None or check.exact:
            return None
        return check.scale()

    def score(self, batch: Sequence[Pending]) -> List[CheckRow]:
        """Numeric half for checks of one family, compiled together."""
        if not batch:
            return []
        started = time.perf_counter()
        n = len(self.points)
        wanted = [item.value for item in batch if item.residual is None]
        wanted += [item.scale for item in batch if item.scale is not None]
        try:
            found = iter(max_abs_many(wanted, self.points, self.chart))
        except Exception:
            logger.warning(f"{batch[0].check.equation}: batched evaluation failed, retrying singly")
            return [row for item in batch for row in self._score_alone(item)]
        residuals = [item.residual if item.residual is not None else next(found) for item in batch]
        scales = [next(found) if item.scale is not None else np.zeros(n) for item in batch]
        rows: List[CheckRow] = []
        for item, residual, scale in zip(batch, residuals, scales):
            rows.extend(self._rows(item, residual, scale))
        elapsed = time.perf_counter() - started
        logger.debug(f"{batch[0].check.equation}: {len(batch)} check(s) scored in {elapsed:.3f}s")
        return rows

    def _score_alone(self, item: Pending) -> List[CheckRow]:
        def step() -> Pending:
            if item.residual is None:
                item.residual = max_abs(item.value, self.points, self.chart)
            return item

        outcome = self._guarded(item.check, step)
        if isinstance(outcome, list):
            return outcome
        scale = np.zeros(len(self.points))
        if item.scale is not None:
            (scale,) = max_abs_many([item.scale], self.points, self.chart)
        return self._rows(outcome, cast(np.ndarray, outcome.residual), scale)

    def _rows(self, item: Pending, residual: np.ndarray, scale: np.ndarray) -> List[CheckRow]:
        check = item.check
        if not (np.all(np.isfinite(residual)) and np.all(np.isfinite(scale))):
            bad = int(np.argwhere(~(np.isfinite(residual) & np.isfinite(scale)))[0][0])
            error = EvalSingularity(f"residual is not finite at point {bad}")
            return [self.error_row(check, STATUS_ERROR, error)]
        if check.exact:
            tolerance = np.full(len(self.points), self.absolute)
        else:
            tolerance = self.relative * (1.0 + scale)
        rows = []
        described = False
        for k, point in enumerate(self.points):
            ok = bool(residual[k] <= tolerance[k])
            status = STATUS_INFO if check.info else (STATUS_PASS if ok else STATUS_FAIL)
            row_note = item.note
            if status == STATUS_FAIL and not described:
                row_note = f"residual: {_describe(item.value)}"
                described = True
            rows.append(
                CheckRow(
                    suite=check.suite,
                    equation=check.equation,
                    case=check.case,
                    point_index=k,
                    point=[float(x) for x in point],
                    residual=float(residual[k]),
                    tolerance=float(tolerance[k]),
                    status=status,
                    note=row_note,
                )
            )
        return rows

    def evaluate(self, check: Check) -> List[CheckRow]:
        outcome = self.compute(check)
        if isinstance(outcome, list):
            return outcome
        return self.score([outcome])


# ── semisym ──────────────────────────────────────────────────────────────────


def _semisym(ctx: SuiteContext) -> Iterator[Check]:
    suite = "semisym"
    gens, lc, ss = ctx.generators, ctx.lc, ctx.ss
    pair = ctx.manifest.graded.pair
    chart, metric = ctx.chart, ctx.manifest.metric

    for case, (x, y) in _cases([gens, gens]):
        s = sign_of(x.parity * y.parity)
        yield Check(
            suite,
            "graded-metric-symmetry",
            case,
            lambda x=x, y=y, s=s: pair(x, y) - (pair(y, x) if s > 0 else -pair(y, x)),
        )
        yield Check(suite, "lc-torsion", case, partial(lc.torsion, x, y))
        yield Check(
            suite,
            "semisym-torsion",
            case,
            lambda x=x, y=y: ss.torsion(x, y) - ss.torsion_closed(x, y),
        )
        for name, alpha in ctx.alphas:
            yield Check(
                suite, "connection-linearity", f"{name},{case}",
                partial(ss.linearity_residual, alpha, x, y),
            )
            yield Check(
                suite, "connection-leibniz", f"{case},{name}",
                lambda x=x, y=y, alpha=alpha: ss.leibniz_residual(x, alpha, y),
            )

    for j in range(chart.dim):
        for k in range(chart.dim):
            yield Check(
                suite,
                "metric-nondegenerate",
                f"L{j + 1},i{k + 1}",
                lambda j=j, k=k: pair(lift_L(ctx.fields[j]), lift_i(ctx.fields[k]))
                - Form.scalar(chart, metric.g[j, k]),
            )

    for case, (x, y, z) in _cases([gens, gens, gens]):
        yield Check(
            suite,
            "koszul",
            case,
            lambda x=x, y=y, z=z: pair(lc(x, y), z).scale(2) - koszul_rhs(lc, x, y, z),
            scale=partial(koszul_rhs, lc, x, y, z),
        )
        yield Check(suite, "lc-metric", case, partial(lc.metric_residual, x, y, z))
        yield Check(suite, "semisym-metric", case, partial(ss.metric_residual, x, y, z))

    family = {P_INTERIOR: "nabla-iU", P_OMEGA_LIE: "nabla-omegaLU"}.get(ctx.manifest.p_kind)
    if family is not None:
        kind, closed = closed_rules(ctx.closed)[family]
        for rule in RULE_KINDS[kind]:
            for fields in ctx.field_families:
                for (nj, fj), (nk, fk) in itertools.product(fields, repeat=2):
                    yield Check(
                        suite,
                        f"closed-{family}",
                        f"{rule[0]}({nj}),{rule[1]}({nk})",
                        lambda rule=rule, fj=fj, fk=fk: closed(rule, fj, fk)
                        - ss(lift(rule[0], fj), lift(rule[1], fk)),
                        scale=partial(closed, rule, fj, fk),
                    )

    scalars = [(f"forms.{name}", form) for name, form in ctx.manifest.forms.items()]
    scalars += [
        (f"g{i + 1}{j + 1}", Form.scalar(chart, metric.g[i, j]))
        for i in range(chart.dim)
        for j in range(i, chart.dim)
    ]
    for name, form in scalars:
        yield Check(suite, "exterior-dd", name, lambda form=form: ext_d(ext_d(form)), exact=True)

    named = [(f"E{k + 1}", row) for k, row in enumerate(ctx.manifest.frame.rows)]
    named += sorted(ctx.manifest.vectors.items())
    for (na, a), (nb, b) in itertools.product(named, named):
        yield Check(
            suite,
            "bracket-lift",
            f"{na},{nb}",
            lambda a=a, b=b: [
                bracket(lift_L(a), lift_L(b)) - lift_L(a.bracket(b)),
                bracket(lift_L(a), lift_i(b)) - lift_i(a.bracket(b)),
                bracket(lift_i(a), lift_i(b)),
            ],
        )

    frame_gens = ctx.manifest.frame.generators()
    for case, (x, y, z) in _cases([frame_gens] * 3):
        yield Check(suite, "jacobi", case, partial(jacobi_residual, x, y, z))


# ── curvature ────────────────────────────────────────────────────────────────


def _closed_curvature(ctx: SuiteContext, family: str, conn: Connection) -> Iterator[Check]:
    """Closed curvature on coordinate fields in full and on frame rows thinned."""
    kind, closed = closed_rules(ctx.closed)[family]
    for depth, fields in enumerate(ctx.field_families):
        triples = list(itertools.product(fields, repeat=3))
        for rule in RULE_KINDS[kind]:
            limit = None if depth == 0 else MAX_FRAME_TRIPLES
            for (nj, fj), (nk, fk), (nl, fl) in _thin(triples, limit):
                yield Check(
                    "curvature",
                    f"closed-{family}",
                    f"{rule[0]}({nj}),{rule[1]}({nk}),{rule[2]}({nl})",
                    lambda rule=rule, fj=fj, fk=fk, fl=fl: closed(rule, fj, fk, fl)
                    - conn.curvature(lift(rule[0], fj), lift(rule[1], fk), lift(rule[2], fl)),
                    scale=partial(closed, rule, fj, fk, fl),
                )


def _curvature_tensorial(
    conn: Connection, alpha: Form, x: Derivation, y: Derivation, z: Derivation
) -> List[Derivation]:
    a, xp, yp = alpha.parity, x.parity, y.parity
    r = conn.curvature(x, y, z)
    scaled = mul_left(alpha, r)
    return [
        conn.curvature(mul_left(alpha, x), y, z) - scaled,
        conn.curvature(x, mul_left(alpha, y), z) - scaled.signed(sign_of(xp * a)),
        conn.curvature(x, y, mul_left(alpha, z)) - scaled.signed(sign_of((xp + yp) * a)),
    ]


def _curvature(ctx: SuiteContext) -> Iterator[Check]:
    suite = "curvature"
    gens, ss = ctx.generators, ctx.ss
    for case, (x, y, z) in _cases([gens, gens, gens]):
        yield Check(
            suite,
            "semisym-curvature-general",
            case,
            lambda x=x, y=y, z=z: ss.curvature(x, y, z) - ss.curvature_closed(x, y, z),
            scale=partial(ctx.lc.curvature, x, y, z),
        )
        yield Check(
            suite,
            "curvature-antisymmetry",
            case,
            lambda x=x, y=y, z=z: ss.curvature(x, y, z)
            + ss.curvature(y, x, z).signed(sign_of(x.parity * y.parity)),
        )
    for case, (x, y, z) in _cases([gens, gens, gens], limit=16):
        for name, alpha in ctx.alphas:
            yield Check(
                suite,
                "curvature-tensorial",
                f"{name},{case}",
                partial(_curvature_tensorial, ss, alpha, x, y, z),
            )

    yield from _closed_curvature(ctx, "curvature-lc", ctx.lc)
    if ctx.manifest.p_kind == P_INTERIOR:
        yield from _closed_curvature(ctx, "curvature-iU", ss)
    elif ctx.manifest.p_kind == P_OMEGA_LIE:
        yield from _closed_curvature(ctx, "curvature-omegaLU", ss)


# ── ricci ────────────────────────────────────────────────────────────────────


def _einstein(ctx: SuiteContext, x: Derivation, y: Derivation) -> Dict[str, Residual]:
    ric = ctx.ss.ricci(x, y, ctx.manifest.frame)
    g_xy = ctx.manifest.graded.pair(x, y)
    lw = lie_form(ctx.manifest.u, ctx.manifest.omega)
    return {"G^LUomega": ric + (g_xy ^ lw), "LUomega^G": ric + (lw ^ g_xy)}


def _ricci(ctx: SuiteContext) -> Iterator[Check]:
    suite = "ricci"
    frame = ctx.manifest.frame
    for case, (x, y) in _cases([ctx.generators, ctx.generators]):
        yield Check(suite, "ricci-flat-lc", case, partial(ctx.lc.ricci, x, y, frame))
        if ctx.manifest.p_kind == P_INTERIOR:
            yield Check(suite, "ricci-flat-iU", case, partial(ctx.ss.ricci, x, y, frame))
        elif ctx.manifest.p_kind == P_OMEGA_LIE:
            yield Check(suite, "einstein-omegaLU", case, partial(_einstein, ctx, x, y))


# ── dist ─────────────────────────────────────────────────────────────────────


def _dist(ctx: SuiteContext) -> Iterator[Check]:
    suite = "dist"
    split = ctx.split
    if split is None:
        return
    gd, gp = split.generators(D_SIDE), split.generators(PERP_SIDE)
    alphas = ctx.alphas
    exact = ctx.structural

    for case, (x, xi) in _cases([gd, gp]):
        yield Check(suite, "split-orthogonal", case, partial(split.pair, x, xi), info=True)
        yield Check(
            suite, "weingarten", case, partial(split.weingarten_residual, x, xi, ctx.points)
        )
        for name, alpha in alphas:
            yield Check(
                suite, "shape-rules", f"{name},{case}",
                partial(split.shape_linearity_residual, alpha, x, xi),
            )

    everything = ctx.generators + [("P", ctx.manifest.p)]
    for label, w in everything:
        yield Check(
            suite,
            "projection-partition",
            label,
            lambda w=w: [split.partition_residual(w), split.idempotence_residual(w)],
            exact=split.frame.is_coordinate,
        )

    for case, (x, y) in _cases([gd, gd]):
        yield Check(suite, "partial-lc-torsion", case, partial(split.dl_torsion_residual, x, y))
        yield Check(suite, "partial-ss-torsion", case, partial(split.tilde_torsion_residual, x, y))
        yield Check(
            suite, "second-fundamental-symmetry", case,
            partial(split.fundamental_symmetry_residual, x, y),
        )
        yield Check(
            suite, "semisym-decomposition", case, partial(split.decomposition_residual, x, y)
        )
        yield Check(suite, "semisym-swap", case, partial(split.swap_residual, x, y))
        for name, alpha in alphas:
            yield Check(
                suite,
                "partial-lc-rules",
                f"{name},{case}",
                lambda x=x, y=y, alpha=alpha: [
                    split.dl_linearity_residual(alpha, x, y),
                    split.dl_leibniz_residual(x, alpha, y),
                ],
            )
            yield Check(
                suite, "second-fundamental-rules", f"{name},{case}",
                partial(split.fundamental_linearity_residual, alpha, x, y),
            )

    for case, (x, y, z) in _cases([gd, gd, gd]):
        yield Check(suite, "partial-lc-metric", case, partial(split.dl_metric_residual, x, y, z))
        yield Check(
            suite, "partial-ss-metric", case, partial(split.tilde_metric_residual, x, y, z)
        )
        yield Check(suite, "partial-koszul", case, partial(split.dl_koszul_residual, x, y, z))
        yield Check(
            suite, "codazzi", case, partial(split.codazzi_residual, x, y, z), exact=exact
        )
        yield Check(
            suite, "codazzi-lc", case, partial(split.codazzi_lc_residual, x, y, z), exact=exact
        )

    for case, (x, y, xi) in _cases([gd, gd, gp]):
        yield Check(suite, "shape-adjoint", case, partial(split.shape_adjoint_residual, x, y, xi))
        yield Check(
            suite, "ricci-equation", case,
            partial(split.ricci_equation_residual, x, y, xi), exact=exact,
        )
        yield Check(
            suite, "ricci-equation-lc", case,
            partial(split.ricci_equation_lc_residual, x, y, xi), exact=exact,
        )

    for case, (x, y, z, w) in _cases([gd, gd, gd, gd]):
        yield Check(
            suite, "gauss", case, partial(split.gauss_residual, x, y, z, w), exact=exact
        )
        yield Check(
            suite, "gauss-lc", case, partial(split.gauss_lc_residual, x, y, z, w), exact=exact
        )


# ── lie ──────────────────────────────────────────────────────────────────────


def _lie(ctx: SuiteContext) -> Iterator[Check]:
    suite = "lie"
    split = ctx.split
    if split is None:
        return
    lie = LieCalculus(split)
    gd, gp = split.generators(D_SIDE), split.generators(PERP_SIDE)
    points = ctx.points

    for case, (x, y, z, w) in _cases([gd, gd, gd, gd], limit=MAX_DEEP_CASES):
        yield Check(
            suite, "lie-partial-commutator", case,
            partial(lie.commutator_residual, x, y, z, w, "dl"),
        )
        yield Check(
            suite, "lie-partial-ss-commutator", case,
            partial(lie.commutator_residual, x, y, z, w, "tilde"),
        )
        yield Check(
            suite, "lie-partial-bracket", case,
            partial(lie.bracket_residual, x, y, z, w, points, "dl"),
        )
        yield Check(
            suite, "lie-curvature", case,
            partial(lie.lie_curvature_residual, x, y, z, w, points, "dl"),
        )

    for case, (x, y, z, n) in _cases([gd, gd, gd, gp], limit=MAX_DEEP_CASES):
        yield Check(
            suite, "lie-normal-commutator", case,
            partial(lie.commutator_residual, x, y, z, n, "perp"),
        )
        yield Check(
            suite, "lie-normal-bracket", case,
            partial(lie.bracket_residual, x, y, z, n, points, "perp"),
        )
        yield Check(
            suite, "lie-normal-curvature", case,
            partial(lie.lie_curvature_residual, x, y, z, n, points, "perp"),
        )

    for case, (x, y, n) in _cases([gd, gd, gp]):
        for name, alpha in ctx.alphas:
            yield Check(
                suite,
                "lie-normal-rules",
                f"{name},{case}",
                lambda x=x, y=y, n=n, alpha=alpha: [
                    lie.normal_linearity_residual(x, alpha, y, n),
                    lie.normal_leibniz_residual(x, y, alpha, n),
                ],
            )


# ── pframe ───────────────────────────────────────────────────────────────────


def _parallel_defect(ctx: SuiteContext, base: Connection, indices: Sequence[int]) -> float:
    frame = ctx.manifest.parallel_frame
    assert frame is not None
    parts = parallel_defect(base, frame, indices)
    values = max_abs_many(parts, ctx.points, ctx.chart)
    return max((float(v.max()) for v in values), default=0.0)


def _require_parallel_split(
    ctx: SuiteContext, base: Connection, indices: Sequence[int]
) -> None:
    key = ("parallel", base.kind, tuple(indices))
    worst = cast(float, ctx.once(key, partial(_parallel_defect, ctx, base, indices)))
    if not worst <= ctx.relative:
        raise PreconditionViolated(f"D is not parallel for {base.kind}: defect {worst:.3g}")


def _vranceanu_symmetric(
    ctx: SuiteContext, conn: Vranceanu, x: Derivation, y: Derivation
) -> Derivation:
    for indices in (conn.d_indices, conn.perp_indices):
        split = Split(ctx.ss, conn.frame, indices)
        ctx.once(("integrable", tuple(indices)), partial(split.require_integrable, ctx.points))
    return conn.torsion(x, y)


def _schouten_equals_base(
    ctx: SuiteContext, conn: Schouten, x: Derivation, y: Derivation
) -> Derivation:
    _require_parallel_split(ctx, conn.base, conn.d_indices)
    return conn.nabla(x, y) - conn.base.nabla(x, y)


def _pframe(ctx: SuiteContext) -> Iterator[Check]:
    suite = "pframe"
    frame = ctx.manifest.parallel_frame
    if frame is None:
        return
    canonical, dual, tables = ctx.canonical, ctx.dual, ctx.tables
    pgens = frame.generators()
    m = frame.dim

    for k, l in itertools.product(range(m), repeat=2):
        yield Check(
            suite,
            "structure-bracket",
            f"X{k + 1},X{l + 1}",
            lambda k=k, l=l: frame.rows[k].bracket(frame.rows[l]) - frame.bracket_field(k, l),
        )

    for case, (x, g) in _cases([ctx.generators, pgens]):
        yield Check(suite, "canonical-kills-frame", case, partial(canonical.nabla, x, g))

    for (la, a), (lb, b) in itertools.product(pgens, repeat=2):
        case = f"{la},{lb}"
        (ka, j), (kb, l) = _kind(la), _kind(lb)
        yield Check(
            suite,
            "canonical-torsion-table",
            case,
            lambda a=a, b=b, ka=ka, j=j, kb=kb, l=l: canonical.torsion(a, b)
            - tables.canonical_torsion(ka, j, kb, l),
        )
        yield Check(
            suite, "dual-torsion", case,
            lambda a=a, b=b: dual.torsion(a, b) + canonical.torsion(a, b),
        )
        for lam in ctx.manifest.lambdas:
            blend = ctx.blend(lam)
            exact = sympy.Rational(repr(lam))
            yield Check(
                suite,
                "lambda-table",
                f"lambda={lam},{case}",
                lambda a=a, b=b, blend=blend, exact=exact, ka=ka, j=j, kb=kb, l=l: blend.nabla(a, b)
                - tables.lambda_nabla(exact, ka, j, kb, l),
            )
            yield Check(
                suite,
                "lambda-ricci-flat",
                f"lambda={lam},{case}",
                partial(blend.ricci, a, b, frame),
            )
        yield Check(
            suite,
            "lambda-endpoints",
            case,
            lambda a=a, b=b: [
                ctx.blend(0.0).nabla(a, b) - canonical.nabla(a, b),
                ctx.blend(1.0).nabla(a, b) - dual.nabla(a, b),
            ],
        )

    omega = ctx.manifest.forms.get("omega")
    if omega is not None:
        omega_blend = Blend(canonical, dual, omega)
        omega_blend.kind = "omega"
        for (la, a), (lb, b) in itertools.product(pgens, repeat=2):
            (ka, j), (kb, l) = _kind(la), _kind(lb)
            yield Check(
                suite,
                "omega-ricci-table",
                f"{la},{lb}",
                lambda a=a, b=b, ka=ka, j=j, kb=kb, l=l: omega_blend.ricci(a, b, frame)
                - tables.omega_ricci(omega, ka, j, kb, l),
            )

    curvature_rules = set(RULE_KINDS["curvature"])
    first = ctx.manifest.lambdas[0] if ctx.manifest.lambdas else 0.5
    first_blend = ctx.blend(first)
    first_exact = sympy.Rational(repr(first))
    for (la, a), (lb, b), (lc, c) in itertools.product(pgens, repeat=3):
        rule = la[0] + lb[0] + lc[0]
        if rule not in curvature_rules:
            continue
        (_, j), (_, k), (_, l) = _kind(la), _kind(lb), _kind(lc)
        case = f"{la},{lb},{lc}"
        yield Check(
            suite,
            "lambda-curvature-table",
            f"lambda={first},{case}",
            lambda a=a, b=b, c=c, rule=rule, j=j, k=k, l=l: first_blend.curvature(a, b, c)
            - tables.lambda_curvature(first_exact, rule, j, k, l),
        )
        if omega is not None:
            yield Check(
                suite,
                "omega-curvature-table",
                case,
                lambda a=a, b=b, c=c, rule=rule, j=j, k=k, l=l: omega_blend.curvature(a, b, c)
                - tables.omega_curvature(omega, rule, j, k, l),
            )

    for case, (x, y, z) in _cases([pgens, pgens, pgens]):
        yield Check(suite, "canonical-flat", case, partial(canonical.curvature, x, y, z))
        yield Check(suite, "canonical-metric", case, partial(canonical.metric_residual, x, y, z))
        yield Check(
            suite, "dual-lie-symmetry", case,
            partial(tables.dual_lie_symmetry, dual, x, y, z, True),
        )
        yield Check(
            suite, "dual-lie-symmetry-as-stated", case,
            partial(tables.dual_lie_symmetry, dual, x, y, z, False),
            info=True,
        )
        yield Check(
            suite, "dual-lie-torsion", case, partial(tables.dual_lie_torsion, dual, x, y, z)
        )
    for case, (x, y, z) in _cases([ctx.generators[:1], pgens, pgens], limit=8):
        yield Check(
            suite, "dual-lie-torsion", f"coordinate:{case}",
            partial(tables.dual_lie_torsion, dual, x, y, z),
        )

    declared = ctx.manifest.distribution
    if declared is None:
        return
    indices = declared.indices
    schouten_lc = Schouten(ctx.lc, frame, indices)
    vranceanu_lc = Vranceanu(ctx.lc, frame, indices)
    schouten_c = Schouten(canonical, frame, indices)
    yield Check(
        suite, "schouten-parallel", "all", partial(parallel_defect, schouten_lc, frame, indices)
    )
    yield Check(
        suite, "vranceanu-parallel", "all", partial(parallel_defect, vranceanu_lc, frame, indices)
    )
    for case, (x, y) in _cases([pgens, pgens]):
        yield Check(
            suite, "schouten-equals-base", case,
            partial(_schouten_equals_base, ctx, schouten_c, x, y),
        )
        yield Check(
            suite, "vranceanu-symmetric", case,
            partial(_vranceanu_symmetric, ctx, vranceanu_lc, x, y),
        )
        yield Check(
            suite, "schouten-torsion-nonintegrable", case,
            partial(schouten_lc.torsion, x, y),
            info=True,
        )


BUILDERS: Dict[str, Callable[[SuiteContext], Iterator[Check]]] = {
    "semisym": _semisym,
    "curvature": _curvature,
    "ricci": _ricci,
    "dist": _dist,
    "lie": _lie,
    "pframe": _pframe,
}


def run_suite(
    manifest: Manifest,
    suite: str = "all",
    tol: Optional[float] = None,
    config: Optional[EngineConfig] = None,
    threads: Optional[int] = None,
) -> CheckReport:
    """Run one suite, or every suite for ``"all"``; never aborts on a failing check."""
    if suite not in SUITES:
        raise ValueError(f"Unknown suite {suite!r}; expected one of {', '.join(SUITES)}")
    config = config or EngineConfig()
    if tol is None:
        tol = manifest.tolerance
    if tol is None:
        tol = config.get_relative_tolerance()
    ctx = SuiteContext(manifest, float(tol), config.get_absolute_tolerance())
    workers = threads or config.get_threads()
    report = CheckReport(
        suite=suite,
        manifest_name=manifest.name,
        manifest_hash=manifest.manifest_hash,
        engine_version=__version__,
    )
    names = SUITE_ORDER if suite == "all" else (suite,)
    for name in names:
        logger.info(f"Suite {name} started on {manifest.name} with {workers} worker(s)")
        try:
            checks = list(BUILDERS[name](ctx))
        except GconnError as e:
            setup = Check(name, SETUP_ID, "-", lambda: 0)
            report.rows.append(ctx.error_row(setup, STATUS_ERROR, e))
            logger.error(f"Suite {name} could not be set up: {e}")
            continue
        families: Dict[str, List[Pending]] = {}
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for outcome in pool.map(ctx.compute, checks):
                if isinstance(outcome, list):
                    report.rows.extend(outcome)
                else:
                    families.setdefault(outcome.check.equation, []).append(outcome)
            for rows in pool.map(ctx.score, families.values()):
                report.rows.extend(rows)
        logger.info(f"Suite {name} finished: {len(checks)} check(s)")
    report.sort()
    return report


def coverage() -> Dict[str, Tuple[str, ...]]:
    """Equation ids each suite can emit."""
    return dict(EQUATION_IDS)