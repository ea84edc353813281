"""Ad-hoc evaluation of derivation expressions at a single point."""

import logging
import re
from typing import Any, Dict, List, Sequence, Union

from gradedconn.connections import Connection, LeviCivitaLift, SemiSymmetric
from gradedconn.derivations import Derivation, bracket
from gradedconn.exceptions import DimensionMismatch, ManifestValidationError, ParseError
from gradedconn.forms import Form
from gradedconn.manifest import Manifest
from gradedconn.parallel import Blend, Canonical, Dual

logger = logging.getLogger(__name__)

CONNECTIONS = ("lc", "ss", "canonical", "dual", "lambda=<value>")

ARITY = {"nabla": 2, "torsion": 2, "curvature": 3, "ricci": 2, "pair": 2, "bracket": 2}
_CALL_RE = re.compile(r"^(" + "|".join(ARITY) + r")\s*\((.*)\)$", re.DOTALL)

Value = Union[Derivation, Form]


def split_args(text: str) -> List[str]:
    """Split on top-level commas; nested parentheses are kept whole."""
    args, depth, start = [], 0, 0
    for offset, char in enumerate(text):
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
            if depth < 0:
                raise ParseError("Unbalanced ')'", text, offset)
        elif char == "," and depth == 0:
            args.append(text[start:offset].strip())
            start = offset + 1
    if depth != 0:
        raise ParseError("Unbalanced '('", text, len(text))
    args.append(text[start:].strip())
    return args


def parse_point(text: str, dim: int) -> List[float]:
    try:
        point = [float(part) for part in text.split(",")]
    except ValueError as e:
        raise ParseError(f"Point must be comma-separated numbers: {e}", text, 0) from e
    if len(point) != dim:
        raise DimensionMismatch(f"Point has {len(point)} coordinates, chart has {dim}")
    return point


def connection_for(manifest: Manifest, name: str) -> Connection:
    lc = LeviCivitaLift(manifest.graded)
    if name == "lc":
        return lc
    if name == "ss":
        return SemiSymmetric(manifest.graded, manifest.p, lc)
    if manifest.parallel_frame is None:
        raise ManifestValidationError(
            f"connection {name!r} needs a parallel frame", "parallel_frame"
        )
    canonical = Canonical(manifest.graded, manifest.parallel_frame)
    if name == "canonical":
        return canonical
    if name == "dual":
        return Dual(canonical)
    if name.startswith("lambda="):
        try:
            value = float(name.split("=", 1)[1])
        except ValueError as e:
            raise ParseError(f"Bad lambda in {name!r}", name, 7) from e
        return Blend.constant(canonical, Dual(canonical), value)
    raise ParseError(f"Unknown connection {name!r}", name, 0, CONNECTIONS)


class Evaluator:
    """Evaluates nested calls such as ``curvature(L(e1), L(e2), i(U))``."""

    def __init__(self, manifest: Manifest, connection: str = "ss") -> None:
        self.manifest = manifest
        self.connection_name = connection
        self.conn = connection_for(manifest, connection)

    def derivation(self, text: str) -> Derivation:
        value = self.value(text)
        if not isinstance(value, Derivation):
            raise ParseError(f"{text!r} is a form, expected a derivation", text, 0)
        return value

    def value(self, text: str) -> Value:
        text = text.strip()
        match = _CALL_RE.match(text)
        if match is None:
            return self.manifest.parse(text)
        name, inner = match.group(1), match.group(2)
        args = split_args(inner)
        if len(args) != ARITY[name]:
            raise ParseError(f"{name} takes {ARITY[name]} arguments, got {len(args)}", text, 0)
        ws = [self.derivation(arg) for arg in args]
        logger.debug(f"Evaluating {name} with {self.conn.kind}")
        if name == "nabla":
            return self.conn.nabla(ws[0], ws[1])
        if name == "torsion":
            return self.conn.torsion(ws[0], ws[1])
        if name == "curvature":
            return self.conn.curvature(ws[0], ws[1], ws[2])
        if name == "ricci":
            return self.conn.ricci(ws[0], ws[1], self.manifest.frame)
        if name == "pair":
            return self.manifest.graded.pair(ws[0], ws[1])
        return bracket(ws[0], ws[1])


def _index_label(index: Sequence[int]) -> str:
    return "^".join(f"dx{j + 1}" for j in index) if index else "1"


def form_at(form: Form, point: Sequence[float]) -> Dict[str, float]:
    return {_index_label(index): value for index, value in form.at(point).items() if value != 0.0}


def value_at(value: Value, point: Sequence[float]) -> Dict[str, Any]:
    """JSON-ready numbers: generator label to form coefficients, or form coefficients."""
    if isinstance(value, Form):
        return {"type": "form", "value": form_at(value, point)}
    out: Dict[str, Dict[str, float]] = {}
    for kind, j, coeff in value.coefficients():
        numbers = form_at(coeff, point)
        if numbers:
            out[f"{kind}{j + 1}"] = numbers
    return {"type": "derivation", "value": out}


def evaluate(
    manifest: Manifest, text: str, point: Sequence[float], connection: str = "ss"
) -> Dict[str, Any]:
    evaluator = Evaluator(manifest, connection)
    result = value_at(evaluator.value(text), point)
    result.update({"expr": text, "connection": connection, "point": [float(x) for x in point]})
    return result
