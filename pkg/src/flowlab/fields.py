"""Analytic scalar fields with exact value, gradient and Hessian evaluation.

Fields are defined by an infix expression over variables ``x1..xn`` (with
``x``, ``y``, ``z`` accepted as aliases for the first three), the operators
``+ - * ^`` and the analytic primitives ``exp``, ``sin``, ``cos``.  Powers
must be non-negative integer constants so that every field is real-analytic
on a ball around the origin.

Derivatives are propagated by forward-mode automatic differentiation over
the parsed expression tree: each node carries a truncated second-order jet
(value, gradient, Hessian), so results are exact up to floating-point
rounding, with no symbolic expression swell.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError, ExpressionError

_FUNCTION_NAMES = ("exp", "sin", "cos")

_BINOPS = {ast.Add: "add", ast.Sub: "sub", ast.Mult: "mul", ast.Pow: "pow"}


def _variable_map(dim: int) -> dict[str, int]:
    names = {f"x{i + 1}": i for i in range(dim)}
    for alias, idx in (("x", 0), ("y", 1), ("z", 2)):
        if idx < dim:
            names.setdefault(alias, idx)
    return names


def _parse(expression: str, dim: int) -> ast.expr:
    """Parse and validate an expression, returning the AST root."""
    source = expression.replace("^", "**")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse field expression {expression!r}: {exc}") from exc

    variables = _variable_map(dim)

    def check(node: ast.expr) -> None:
        if isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                raise ExpressionError(
                    f"unsupported operator {type(node.op).__name__!r} in {expression!r}"
                )
            if isinstance(node.op, ast.Pow):
                exponent = node.right
                if isinstance(exponent, ast.UnaryOp):
                    raise ExpressionError(f"powers must be non-negative integers: {ast.unparse(node)!r}")
                if not (isinstance(exponent, ast.Constant) and isinstance(exponent.value, int)):
                    raise ExpressionError(f"powers must be integer constants: {ast.unparse(node)!r}")
                if exponent.value < 0:
                    raise ExpressionError(f"powers must be non-negative: {ast.unparse(node)!r}")
                check(node.left)
                return
            check(node.left)
            check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.USub, ast.UAdd)):
                raise ExpressionError(f"unsupported unary operator in {expression!r}")
            check(node.operand)
        elif isinstance(node, ast.Call):
            if not (isinstance(node.func, ast.Name) and node.func.id in _FUNCTION_NAMES):
                raise ExpressionError(f"unknown function in {ast.unparse(node)!r}")
            if len(node.args) != 1 or node.keywords:
                raise ExpressionError(f"functions take one argument: {ast.unparse(node)!r}")
            check(node.args[0])
        elif isinstance(node, ast.Name):
            if node.id not in variables:
                raise ExpressionError(
                    f"unknown variable {node.id!r} for dimension {dim} in {expression!r}"
                )
        elif isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)):
                raise ExpressionError(f"unsupported constant {node.value!r}")
        else:
            raise ExpressionError(
                f"unsupported syntax {type(node).__name__!r} in {expression!r}"
            )

    check(tree.body)
    return tree.body


@dataclass(frozen=True)
class Jet2:
    """Second-order jet of a scalar function at a point.

    The Hessian is symmetrized on construction so that
    ``hessian[i, j] == hessian[j, i]`` holds exactly.
    """

    value: float
    gradient: np.ndarray
    hessian: np.ndarray

    @staticmethod
    def make(value: float, gradient: np.ndarray, hessian: np.ndarray) -> "Jet2":
        hessian = np.asarray(hessian, dtype=float)
        return Jet2(float(value), np.asarray(gradient, dtype=float),
                    0.5 * (hessian + hessian.T))

    @property
    def grad_norm(self) -> float:
        return float(np.linalg.norm(self.gradient))


@dataclass(frozen=True)
class RadialSplit:
    """Gradient split into radial and angular parts at a point u != 0.

    ``e_r`` is the derivative along the unit radial direction and
    ``e_theta`` the remaining (orthogonal) component, so that
    ``gradient = e_theta + e_r * u / r``.
    """

    e_r: float
    e_theta: np.ndarray
    r: float

    @property
    def e_theta_norm(self) -> float:
        return float(np.linalg.norm(self.e_theta))


def _chain1(fv, fd, v, g):
    return fv, fd * g


def _chain2(fv, fd, fdd, v, g, h):
    return fv, fd * g, fd * h + fdd * np.outer(g, g)


class AnalyticField:
    """An analytic scalar function of n real variables.

    Evaluation is deterministic: identical inputs give bit-identical
    outputs.  Instances are immutable and safe to share across threads.
    """

    def __init__(self, expression: str, dim: int):
        if dim < 1:
            raise ExpressionError("dimension must be a positive integer")
        self.expression = expression
        self.dim = int(dim)
        self._tree = _parse(expression, dim)
        self._vars = _variable_map(dim)

    def __repr__(self):
        return f"AnalyticField({self.expression!r}, dim={self.dim})"

    def _point(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.dim,):
            raise ValueError(f"expected point of shape ({self.dim},), got {u.shape}")
        if not np.all(np.isfinite(u)):
            raise ValueError("point has non-finite coordinates")
        return u

    # -- evaluation engines ------------------------------------------------

    def value(self, u) -> float:
        u = self._point(u)
        return self._value(self._tree, u)

    def grad(self, u) -> np.ndarray:
        return self.jet1(u)[1]

    def jet1(self, u) -> tuple[float, np.ndarray]:
        """Value and gradient only; cheaper than a full second-order jet."""
        u = self._point(u)
        v, g = self._jet1(self._tree, u)
        return v, g

    def jet2(self, u) -> Jet2:
        u = self._point(u)
        v, g, h = self._jet2(self._tree, u)
        return Jet2.make(v, g, h)

    def _fail(self, node) -> EvaluationError:
        frag = ast.unparse(node)
        return EvaluationError(
            f"non-finite value while evaluating {frag!r} of field {self.expression!r}",
            subexpression=frag,
        )

    def _value(self, node, u) -> float:
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return float(u[self._vars[node.id]])
        if isinstance(node, ast.UnaryOp):
            v = self._value(node.operand, u)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Call):
            v = getattr(math, node.func.id)(self._value(node.args[0], u))
            if not math.isfinite(v):
                raise self._fail(node)
            return v
        # binary op
        a = self._value(node.left, u)
        if isinstance(node.op, ast.Pow):
            v = a ** node.right.value
        else:
            b = self._value(node.right, u)
            if isinstance(node.op, ast.Add):
                v = a + b
            elif isinstance(node.op, ast.Sub):
                v = a - b
            else:
                v = a * b
        if not math.isfinite(v):
            raise self._fail(node)
        return v

    def _jet1(self, node, u):
        if isinstance(node, ast.Constant):
            return float(node.value), np.zeros(self.dim)
        if isinstance(node, ast.Name):
            g = np.zeros(self.dim)
            g[self._vars[node.id]] = 1.0
            return float(u[self._vars[node.id]]), g
        if isinstance(node, ast.UnaryOp):
            v, g = self._jet1(node.operand, u)
            return (-v, -g) if isinstance(node.op, ast.USub) else (v, g)
        if isinstance(node, ast.Call):
            v, g = self._jet1(node.args[0], u)
            fv, fd = _SCALAR1[node.func.id](v)
            if not math.isfinite(fv):
                raise self._fail(node)
            return _chain1(fv, fd, v, g)
        va, ga = self._jet1(node.left, u)
        if isinstance(node.op, ast.Pow):
            k = node.right.value
            if k == 0:
                return 1.0, np.zeros(self.dim)
            if k == 1:
                return va, ga
            fv = va ** k
            if not math.isfinite(fv):
                raise self._fail(node)
            return fv, (k * va ** (k - 1)) * ga
        vb, gb = self._jet1(node.right, u)
        if isinstance(node.op, ast.Add):
            return va + vb, ga + gb
        if isinstance(node.op, ast.Sub):
            return va - vb, ga - gb
        v = va * vb
        if not math.isfinite(v):
            raise self._fail(node)
        return v, va * gb + vb * ga

    def _jet2(self, node, u):
        n = self.dim
        if isinstance(node, ast.Constant):
            return float(node.value), np.zeros(n), np.zeros((n, n))
        if isinstance(node, ast.Name):
            g = np.zeros(n)
            g[self._vars[node.id]] = 1.0
            return float(u[self._vars[node.id]]), g, np.zeros((n, n))
        if isinstance(node, ast.UnaryOp):
            v, g, h = self._jet2(node.operand, u)
            return (-v, -g, -h) if isinstance(node.op, ast.USub) else (v, g, h)
        if isinstance(node, ast.Call):
            v, g, h = self._jet2(node.args[0], u)
            fv, fd, fdd = _SCALAR2[node.func.id](v)
            if not math.isfinite(fv):
                raise self._fail(node)
            return _chain2(fv, fd, fdd, v, g, h)
        va, ga, ha = self._jet2(node.left, u)
        if isinstance(node.op, ast.Pow):
            k = node.right.value
            if k == 0:
                return 1.0, np.zeros(n), np.zeros((n, n))
            if k == 1:
                return va, ga, ha
            fv = va ** k
            if not math.isfinite(fv):
                raise self._fail(node)
            fd = k * va ** (k - 1)
            fdd = k * (k - 1) * va ** (k - 2)
            return _chain2(fv, fd, fdd, va, ga, ha)
        vb, gb, hb = self._jet2(node.right, u)
        if isinstance(node.op, ast.Add):
            return va + vb, ga + gb, ha + hb
        if isinstance(node.op, ast.Sub):
            return va - vb, ga - gb, ha - hb
        v = va * vb
        if not math.isfinite(v):
            raise self._fail(node)
        cross = np.outer(ga, gb)
        return v, va * gb + vb * ga, va * hb + vb * ha + cross + cross.T


_SCALAR1 = {
    "exp": lambda v: (math.exp(v), math.exp(v)),
    "sin": lambda v: (math.sin(v), math.cos(v)),
    "cos": lambda v: (math.cos(v), -math.sin(v)),
}

_SCALAR2 = {
    "exp": lambda v: (math.exp(v),) * 3,
    "sin": lambda v: (math.sin(v), math.cos(v), -math.sin(v)),
    "cos": lambda v: (math.cos(v), -math.sin(v), -math.cos(v)),
}


def eval_jet2(field: AnalyticField, point) -> Jet2:
    """Exact second-order jet of the field at a point."""
    return field.jet2(point)


def radial_angular(jet: Jet2, point) -> RadialSplit:
    """Split a gradient into radial and angular components at ``point`` != 0."""
    u = np.asarray(point, dtype=float)
    r = float(np.linalg.norm(u))
    if r == 0.0:
        raise ValueError("radial direction undefined at the origin")
    unit = u / r
    e_r = float(np.dot(jet.gradient, unit))
    e_theta = jet.gradient - e_r * unit
    return RadialSplit(e_r=e_r, e_theta=e_theta, r=r)
