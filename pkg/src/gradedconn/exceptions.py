"""Error taxonomy for the graded connection engine.

Every error carries a short ``tag`` that suites copy into report rows, so a failed
check can be grouped by cause without parsing messages.
"""

from typing import Any, FrozenSet, Iterable, Optional, Sequence


class GconnError(Exception):
    """Base class for all engine errors."""

    tag = "error"


class ParseError(GconnError):
    """Malformed expression, form or derivation literal."""

    tag = "parse"

    def __init__(
        self,
        message: str,
        text: str = "",
        offset: int = 0,
        expected: Iterable[str] = (),
    ) -> None:
        self.text = text
        self.offset = offset
        self.expected: FrozenSet[str] = frozenset(expected)
        detail = f" at offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(message + detail)


class UnknownIdentifier(GconnError):
    tag = "unknown-identifier"

    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"Unknown identifier: {name!r}")


class EvalSingularity(GconnError):
    """Evaluation produced NaN or Inf."""

    tag = "singular-eval"


class DimensionMismatch(GconnError):
    tag = "dimension"


class NonHomogeneous(GconnError):
    """A signed rule needed a single parity but got a mixture."""

    tag = "non-homogeneous"


class SingularMetric(GconnError):
    tag = "singular-metric"

    def __init__(self, message: str, point: Optional[Sequence[float]] = None) -> None:
        self.point = None if point is None else tuple(float(x) for x in point)
        super().__init__(message)


class ExpressionBlowup(GconnError):
    tag = "expression-blowup"


class FrameNotOrthonormal(GconnError):
    tag = "frame-not-orthonormal"


class ParityViolation(GconnError):
    tag = "parity"


class NotInDistribution(GconnError):
    tag = "not-in-distribution"


class NotIntegrable(GconnError):
    tag = "not-integrable"


class NonConstantStructure(GconnError):
    tag = "non-constant-structure"


class PreconditionViolated(GconnError):
    tag = "precondition"


class ManifestValidationError(GconnError, ValueError):
    """Manifest failed schema validation or name resolution."""

    tag = "manifest"

    def __init__(self, message: str, field_path: str = "", cause: Any = None) -> None:
        self.field_path = field_path
        self.cause = cause
        prefix = f"{field_path}: " if field_path else ""
        super().__init__(prefix + message)


# Refusals: the check does not apply to this input, which is not a failure.
REFUSALS = (NotIntegrable, NonConstantStructure, PreconditionViolated)
