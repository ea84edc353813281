"""
graded-connections: a coordinate-chart engine for graded differential geometry.

This package builds connections on the derivations of the algebra of differential forms
(the graded Levi-Civita lift, semi-symmetric metric connections, distribution and
parallel-frame connections) and verifies their identities numerically at sample points.
"""

__version__ = "0.1.0"

from gradedconn.config import EngineConfig
from gradedconn.connections import Connection, LeviCivitaLift, SemiSymmetric
from gradedconn.derivations import Derivation, bracket, lift_i, lift_L, parse_derivation
from gradedconn.distributions import Split
from gradedconn.exceptions import GconnError, ManifestValidationError
from gradedconn.expr import Chart, parse_expr
from gradedconn.forms import Form, VectorField, parse_form
from gradedconn.frames import Frame, OrthoFrame, ParallelFrame
from gradedconn.lie import LieCalculus
from gradedconn.manifest import Manifest, build_manifest, load_manifest
from gradedconn.metric import GradedMetric, RiemannMetric
from gradedconn.parallel import Blend, Canonical, Dual, Schouten, Vranceanu
from gradedconn.report import CheckReport, CheckRow
from gradedconn.suites import run_suite

__all__ = [
    "__version__",
    # Foundations
    "Chart",
    "parse_expr",
    "Form",
    "VectorField",
    "parse_form",
    "Derivation",
    "bracket",
    "lift_L",
    "lift_i",
    "parse_derivation",
    # Geometry
    "RiemannMetric",
    "GradedMetric",
    "Frame",
    "OrthoFrame",
    "ParallelFrame",
    "Connection",
    "LeviCivitaLift",
    "SemiSymmetric",
    "Split",
    "LieCalculus",
    "Canonical",
    "Dual",
    "Blend",
    "Schouten",
    "Vranceanu",
    # Manifests and checks
    "EngineConfig",
    "Manifest",
    "load_manifest",
    "build_manifest",
    "CheckReport",
    "CheckRow",
    "run_suite",
    "GconnError",
    "ManifestValidationError",
]
