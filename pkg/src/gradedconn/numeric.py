"""Vectorised evaluation of symbolic residuals over all sample points at once."""

import logging
from typing import Dict, Iterable, List, Sequence, Union

import numpy as np
import sympy

from gradedconn.derivations import Derivation, coefficient_exprs
from gradedconn.exceptions import EvalSingularity
from gradedconn.expr import Chart, tidy_expr
from gradedconn.forms import Form, VectorField

logger = logging.getLogger(__name__)

Residual = Union[Derivation, Form, VectorField, sympy.Expr, Sequence["Residual"]]


def coefficients(value: Residual) -> List[sympy.Expr]:
    """Every scalar coefficient of a residual, flattened."""
    if isinstance(value, Derivation):
        return list(coefficient_exprs(value).values())
    if isinstance(value, Form):
        return [expr for _, expr in value.terms]
    if isinstance(value, VectorField):
        return list(value.components)
    if isinstance(value, (list, tuple)):
        out: List[sympy.Expr] = []
        for item in value:
            out.extend(coefficients(item))
        return out
    return [sympy.sympify(value)]


def _nonzero(exprs: Iterable[sympy.Expr]) -> List[sympy.Expr]:
    tidied = (tidy_expr(sympy.sympify(e)) for e in exprs)
    return [e for e in tidied if e != 0]


def _columns(exprs: Sequence[sympy.Expr], points: np.ndarray, chart: Chart) -> np.ndarray:
    """``|expr|`` at every point, shape ``(len(points), len(exprs))``."""
    n = len(points)
    fn = sympy.lambdify(chart.symbols, list(exprs), modules="numpy", cse=False)
    with np.errstate(all="ignore"):
        raw = fn(*[points[:, j] for j in range(chart.dim)])
    columns = [np.broadcast_to(np.asarray(v, dtype=complex), (n,)) for v in raw]
    return np.abs(np.stack(columns, axis=1))


def max_abs_many(values: Sequence[Residual], points: np.ndarray, chart: Chart) -> List[np.ndarray]:
    """:func:`max_abs` for a family of residuals compiled into one numeric function.

    Coefficients shared between residuals are evaluated once. A residual that is singular
    somewhere on the sample comes back with non-finite entries instead of raising.
    """
    n = len(points)
    slots: Dict[sympy.Expr, int] = {}
    layout: List[List[int]] = []
    for value in values:
        layout.append([slots.setdefault(e, len(slots)) for e in _nonzero(coefficients(value))])
    if not slots:
        return [np.zeros(n) for _ in values]
    exprs = list(slots)
    try:
        table = _columns(exprs, points, chart)
    except ZeroDivisionError:
        table = np.stack([_column_or_inf(e, points, chart) for e in exprs], axis=1)
    return [table[:, cols].max(axis=1) if cols else np.zeros(n) for cols in layout]


def _column_or_inf(expr: sympy.Expr, points: np.ndarray, chart: Chart) -> np.ndarray:
    try:
        return _columns([expr], points, chart)[:, 0]
    except ZeroDivisionError:
        return np.full(len(points), np.inf)


def max_abs(value: Residual, points: np.ndarray, chart: Chart) -> np.ndarray:
    """``max |coefficient|`` at each point, shape ``(len(points),)``.

    A residual whose coefficients all cancel symbolically evaluates to exact zeros without
    compiling anything.
    """
    (values,) = max_abs_many([value], points, chart)
    if not np.all(np.isfinite(values)):
        bad = int(np.argwhere(~np.isfinite(values))[0][0])
        raise EvalSingularity(f"residual is not finite at point {bad}")
    return values


def relative_tolerance(scale: np.ndarray, relative: float) -> np.ndarray:
    """``relative * (1 + scale)`` per point."""
    return relative * (1.0 + scale)


def finite_difference(
    expr: sympy.Expr, j: int, point: Sequence[float], chart: Chart, h: float = 1e-6
) -> float:
    """Central difference of ``expr`` along coordinate ``j``."""
    fn = sympy.lambdify(chart.symbols, expr, modules="numpy")
    forward = np.array(point, dtype=float)
    backward = np.array(point, dtype=float)
    forward[j] += h
    backward[j] -= h
    return float((fn(*forward) - fn(*backward)) / (2 * h))
