"""Manifest loading: chart, metric, frames, named objects and sample points."""

import hashlib
import json
import logging
import re
import sys
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import jsonschema
import numpy as np
import yaml

from gradedconn.config import EngineConfig, get_project_root
from gradedconn.derivations import Derivation, parse_derivation
from gradedconn.exceptions import (
    FrameNotOrthonormal,
    GconnError,
    ManifestValidationError,
    ParseError,
    UnknownIdentifier,
)
from gradedconn.expr import Chart, check_size, parse_expr
from gradedconn.forms import Form, VectorField, parse_form
from gradedconn.frames import Frame, OrthoFrame, ParallelFrame
from gradedconn.metric import GradedMetric, RiemannMetric

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

DEFAULT_LAMBDAS = (0.3, 0.5, 0.7)
FRAME_KINDS = ("coordinate", "orthonormal", "parallel")

P_INTERIOR = "iU"
P_OMEGA_LIE = "omegaLU"
P_GENERAL = "general"

_P_INTERIOR_RE = re.compile(r"^i\(([A-Za-z_]\w*)\)$")
_P_OMEGA_RE = re.compile(r"^([A-Za-z_]\w*)\*L\(([A-Za-z_]\w*)\)$")


@dataclass(frozen=True)
class DistributionSpec:
    """Frame-index partition; ``indices`` are 0-based."""

    indices: Tuple[int, ...]
    frame: str = "coordinate"


@dataclass
class Manifest:
    """A fully resolved manifest."""

    name: str
    path: Optional[Path]
    chart: Chart
    metric: RiemannMetric
    frame: OrthoFrame
    vectors: Dict[str, VectorField]
    forms: Dict[str, Form]
    p: Derivation
    p_text: str
    p_kind: str
    points: np.ndarray
    manifest_hash: str
    parallel_frame: Optional[ParallelFrame] = None
    distribution: Optional[DistributionSpec] = None
    lambdas: Tuple[float, ...] = DEFAULT_LAMBDAS
    u_name: Optional[str] = None
    omega_name: Optional[str] = None
    tolerance: Optional[float] = None
    raw: Dict[str, Any] = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.chart.dim

    @cached_property
    def graded(self) -> GradedMetric:
        return GradedMetric(self.metric)

    @cached_property
    def coordinate_frame(self) -> Frame:
        return Frame.coordinate(self.chart)

    @property
    def u(self) -> VectorField:
        if self.u_name is None:
            return VectorField.zero(self.chart)
        return self.names[self.u_name]

    @property
    def omega(self) -> Form:
        if self.omega_name is None:
            return Form.zero(self.chart)
        return self.forms[self.omega_name]

    def frame_named(self, kind: str) -> Frame:
        if kind == "coordinate":
            return self.coordinate_frame
        if kind == "orthonormal":
            return self.frame
        if self.parallel_frame is None:
            raise ManifestValidationError("No parallel_frame section", "distribution.frame")
        return self.parallel_frame

    @property
    def names(self) -> Dict[str, VectorField]:
        """Vector names visible to derivation literals."""
        table = {f"e{k + 1}": VectorField.coordinate(self.chart, k) for k in range(self.dim)}
        table.update({f"E{k + 1}": row for k, row in enumerate(self.frame.rows)})
        if self.parallel_frame is not None:
            table.update({f"X{k + 1}": row for k, row in enumerate(self.parallel_frame.rows)})
        table.update(self.vectors)
        return table

    def parse(self, text: str) -> Derivation:
        return parse_derivation(text, self.chart, self.names, self.forms)


# ── Reading and validation ──────────────────────────────────────────────────


def _read_raw(path: Path) -> Dict[str, Any]:
    text = path.read_bytes()
    try:
        if path.suffix == ".toml":
            data = tomllib.loads(text.decode("utf-8"))
        else:
            data = yaml.safe_load(text)
    except (yaml.YAMLError, tomllib.TOMLDecodeError) as e:
        raise ParseError(f"Cannot read manifest {path}: {e}", str(path)) from e
    if not isinstance(data, dict):
        raise ManifestValidationError(f"Expected a mapping, got {type(data).__name__}")
    return data


def _validate_schema(data: Dict[str, Any]) -> None:
    """Validate manifest data against the JSON schema."""
    schema_path = get_project_root() / "schemas" / "manifest-schema.json"

    if not schema_path.exists():
        logger.warning("Manifest schema not found, skipping validation")
        return

    with open(schema_path, encoding="utf-8") as f:
        schema = json.load(f)

    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as e:
        field_path = ".".join(str(p) for p in e.absolute_path)
        raise ManifestValidationError(e.message, field_path, e) from e


def _expr_rows(
    rows: Sequence[Sequence[Any]], chart: Chart, where: str
) -> List[Tuple[Any, ...]]:
    out = []
    for r, row in enumerate(rows):
        if len(row) != chart.dim:
            raise ManifestValidationError(
                f"expected {chart.dim} entries, got {len(row)}", f"{where}.{r}"
            )
        try:
            out.append(tuple(parse_expr(str(v), chart) for v in row))
        except GconnError as e:
            raise ManifestValidationError(str(e), f"{where}.{r}", e) from e
    return out


def _vector_fields(
    rows: Sequence[Sequence[Any]], chart: Chart, where: str
) -> List[VectorField]:
    return [VectorField(chart, comps) for comps in _expr_rows(rows, chart, where)]


def _sample(data: Dict[str, Any], dim: int, config: EngineConfig) -> np.ndarray:
    """Explicit points, or ``count`` uniform draws from the ``domain`` box."""
    sample = data.get("sample") or {}
    domain = sample.get("domain")
    bounds = None
    if domain is not None:
        bounds = np.array(domain, dtype=float)
        if bounds.shape != (dim, 2) or np.any(bounds[:, 0] > bounds[:, 1]):
            raise ManifestValidationError(
                "domain must be one [low, high] pair per coordinate", "sample.domain"
            )

    if "points" in sample:
        points = np.array(sample["points"], dtype=float)
        if points.ndim != 2 or points.shape[1] != dim:
            raise ManifestValidationError(f"points must have {dim} coordinates", "sample.points")
        if bounds is not None:
            inside = (points >= bounds[:, 0]) & (points <= bounds[:, 1])
            if not inside.all():
                raise ManifestValidationError("sample point outside the domain", "sample.points")
        return points

    if bounds is None:
        raise ManifestValidationError("either points or domain is required", "sample")
    count = int(sample.get("count", config.get_default_count()))
    seed = int(sample.get("seed", config.get_default_seed()))
    rng = np.random.default_rng(seed)
    return rng.uniform(bounds[:, 0], bounds[:, 1], size=(count, dim))


def _classify_p(text: str) -> Tuple[str, Optional[str], Optional[str]]:
    """``(kind, vector name, form name)`` for the two closed-form families."""
    compact = text.replace(" ", "")
    match = _P_INTERIOR_RE.match(compact)
    if match:
        return P_INTERIOR, match.group(1), None
    match = _P_OMEGA_RE.match(compact)
    if match:
        return P_OMEGA_LIE, match.group(2), match.group(1)
    return P_GENERAL, None, None


def load_manifest(
    path: Union[str, Path], config: Optional[EngineConfig] = None, validate: bool = True
) -> Manifest:
    """Load, validate and resolve a manifest file.

    Sample points are checked at load: a singular metric or a degenerate frame fails here
    instead of inside a suite.
    """
    path = Path(path)
    config = config or EngineConfig()
    raw_bytes = path.read_bytes()
    data = _read_raw(path)
    if validate:
        _validate_schema(data)
    manifest = build_manifest(data, config, path=path)
    manifest.manifest_hash = hashlib.sha256(raw_bytes).hexdigest()
    logger.info(
        f"Loaded manifest {manifest.name!r}: dim={manifest.dim}, points={len(manifest.points)}"
    )
    return manifest


def build_manifest(
    data: Dict[str, Any], config: Optional[EngineConfig] = None, path: Optional[Path] = None
) -> Manifest:
    config = config or EngineConfig()
    try:
        chart = Chart(tuple(str(c) for c in data["coordinates"]))
    except KeyError as e:
        raise ManifestValidationError("missing coordinates", "coordinates") from e
    except GconnError as e:
        raise ManifestValidationError(str(e), "coordinates", e) from e

    if "metric" not in data:
        raise ManifestValidationError("missing metric", "metric")
    metric = RiemannMetric(chart, _expr_rows(data["metric"], chart, "metric"))

    vectors: Dict[str, VectorField] = {}
    for name, comps in (data.get("vectors") or {}).items():
        vectors[name] = _vector_fields([comps], chart, f"vectors.{name}")[0]

    forms: Dict[str, Form] = {}
    for name, literal in (data.get("forms") or {}).items():
        try:
            forms[name] = parse_form(str(literal), chart)
        except GconnError as e:
            raise ManifestValidationError(str(e), f"forms.{name}", e) from e

    frame_section = data.get("frame")
    if frame_section:
        rows = frame_section
        if isinstance(frame_section, dict):
            rows = frame_section["rows"]
        frame = OrthoFrame(chart, _vector_fields(rows, chart, "frame"), "frame")
    else:
        frame = metric.orthonormal_frame()
        cap = config.get_max_expression_ops()
        for row in frame.rows:
            for component in row.components:
                check_size(component, cap, "orthonormal frame component")

    parallel_frame = None
    parallel_section = data.get("parallel_frame")
    if parallel_section:
        declared = parallel_section.get("structure_constant")
        parallel_frame = ParallelFrame(
            chart,
            _vector_fields(parallel_section["rows"], chart, "parallel_frame.rows"),
            structure_constant=declared,
            name="parallel_frame",
        )
        if declared and not parallel_frame.is_constant:
            raise ManifestValidationError(
                "structure functions are not constant", "parallel_frame.structure_constant"
            )

    p_text = str(data.get("P", "0"))
    p_kind, u_name, omega_name = _classify_p(p_text)
    if omega_name is not None and omega_name not in forms:
        raise ManifestValidationError(f"undefined form {omega_name!r}", f"forms.{omega_name}")

    distribution = None
    dist_section = data.get("distribution")
    if dist_section:
        indices = tuple(int(k) - 1 for k in dist_section["D"])
        if any(not 0 <= k < chart.dim for k in indices):
            raise ManifestValidationError(f"indices must lie in 1..{chart.dim}", "distribution.D")
        kind = dist_section.get("frame", "coordinate")
        if kind not in FRAME_KINDS:
            raise ManifestValidationError(f"unknown frame {kind!r}", "distribution.frame")
        if kind == "parallel" and parallel_frame is None:
            raise ManifestValidationError("no parallel_frame section", "distribution.frame")
        distribution = DistributionSpec(tuple(sorted(set(indices))), kind)

    points = _sample(data, chart.dim, config)

    manifest = Manifest(
        name=str(data.get("name", path.stem if path else "manifest")),
        path=path,
        chart=chart,
        metric=metric,
        frame=frame,
        vectors=vectors,
        forms=forms,
        p=Derivation.zero(chart),
        p_text=p_text,
        p_kind=p_kind,
        points=points,
        manifest_hash="",
        parallel_frame=parallel_frame,
        distribution=distribution,
        lambdas=tuple(float(v) for v in data.get("lambdas", DEFAULT_LAMBDAS)),
        u_name=u_name,
        omega_name=omega_name,
        tolerance=data.get("tolerance"),
        raw=data,
    )
    try:
        manifest.p = manifest.parse(p_text)
    except UnknownIdentifier as e:
        raise ManifestValidationError(f"undefined vector {e.name!r}", f"vectors.{e.name}", e) from e
    except ParseError as e:
        raise ManifestValidationError(str(e), "P", e) from e

    _check_sample(manifest)
    return manifest


def _check_sample(manifest: Manifest) -> None:
    """Metric invertibility and frame checks at every sample point."""
    points = manifest.points
    manifest.metric.check_points(points)
    manifest.frame.check_points(points)
    try:
        manifest.frame.check_orthonormal(manifest.graded.gram, points)
    except FrameNotOrthonormal as e:
        raise ManifestValidationError(str(e), "frame", e) from e
    if manifest.parallel_frame is not None:
        manifest.parallel_frame.check_points(points)
        try:
            manifest.parallel_frame.check_orthonormal(manifest.graded.gram, points)
        except FrameNotOrthonormal as e:
            raise ManifestValidationError(str(e), "parallel_frame.rows", e) from e
