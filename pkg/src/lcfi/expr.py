"""Scalar gauge functions chi(x, y) given as small arithmetic expressions.

Grammar (a strict subset of Python expression syntax)::

    expr   := expr ('+' | '-' | '*' | '/') expr | ('+' | '-') expr
            | number | 'x' | 'y' | 'pi' | call | '(' expr ')'
    call   := ('sin' | 'cos' | 'sqrt') '(' expr ')'
            | ('atan2' | 'pow') '(' expr ',' expr ')'

Expressions are evaluated together with their exact gradient by forward-mode
differentiation, so no finite differences are involved anywhere a gauge
gradient is needed.  ``atan2`` marks the function as multivalued; such
functions may only enter through line integrals of their gradient.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

_UNARY = {"sin", "cos", "sqrt"}
_BINARY = {"atan2", "pow"}


class _Dual:
    """Value with partial derivatives in x and y (numpy arrays or floats)."""

    __slots__ = ("v", "dx", "dy")

    def __init__(self, v, dx, dy):
        self.v, self.dx, self.dy = v, dx, dy

    def __add__(self, o):
        return _Dual(self.v + o.v, self.dx + o.dx, self.dy + o.dy)

    def __sub__(self, o):
        return _Dual(self.v - o.v, self.dx - o.dx, self.dy - o.dy)

    def __mul__(self, o):
        return _Dual(self.v * o.v, self.dx * o.v + self.v * o.dx, self.dy * o.v + self.v * o.dy)

    def __truediv__(self, o):
        inv = 1.0 / o.v
        q = self.v * inv
        return _Dual(q, (self.dx - q * o.dx) * inv, (self.dy - q * o.dy) * inv)

    def __neg__(self):
        return _Dual(-self.v, -self.dx, -self.dy)

    def chain(self, value, slope):
        return _Dual(value, slope * self.dx, slope * self.dy)


def _const(c):
    return _Dual(c, 0.0, 0.0)


def _pow(a: _Dual, b: _Dual, b_const: bool) -> _Dual:
    if b_const:
        return a.chain(np.power(a.v, b.v), b.v * np.power(a.v, b.v - 1.0))
    val = np.power(a.v, b.v)
    loga = np.log(a.v)
    return _Dual(val, val * (b.dx * loga + b.v * a.dx / a.v), val * (b.dy * loga + b.v * a.dy / a.v))


def _atan2(u: _Dual, w: _Dual) -> _Dual:
    r2 = u.v * u.v + w.v * w.v
    return _Dual(np.arctan2(u.v, w.v), (w.v * u.dx - u.v * w.dx) / r2, (w.v * u.dy - u.v * w.dy) / r2)


def _validate(node, source):
    if isinstance(node, ast.Expression):
        return _validate(node.body, source)
    if isinstance(node, ast.BinOp):
        if not isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)):
            raise ValueError(f"operator {type(node.op).__name__} not allowed in {source!r}")
        _validate(node.left, source)
        _validate(node.right, source)
        return
    if isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, (ast.USub, ast.UAdd)):
            raise ValueError(f"unary operator not allowed in {source!r}")
        return _validate(node.operand, source)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ValueError(f"constant {node.value!r} not allowed in {source!r}")
        return
    if isinstance(node, ast.Name):
        if node.id not in ("x", "y", "pi"):
            raise ValueError(f"unknown identifier {node.id!r} in {source!r}")
        return
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.keywords:
            raise ValueError(f"malformed call in {source!r}")
        name = node.func.id
        arity = 1 if name in _UNARY else 2 if name in _BINARY else None
        if arity is None:
            raise ValueError(f"unknown function {name!r} in {source!r}")
        if len(node.args) != arity:
            raise ValueError(f"{name} takes {arity} argument(s) in {source!r}")
        for a in node.args:
            _validate(a, source)
        return
    raise ValueError(f"syntax {type(node).__name__} not allowed in {source!r}")


def _is_constant(node) -> bool:
    if isinstance(node, ast.Constant):
        return True
    if isinstance(node, ast.Name):
        return node.id == "pi"
    if isinstance(node, ast.UnaryOp):
        return _is_constant(node.operand)
    if isinstance(node, ast.BinOp):
        return _is_constant(node.left) and _is_constant(node.right)
    if isinstance(node, ast.Call):
        return all(_is_constant(a) for a in node.args)
    return False


def _eval(node, x: _Dual, y: _Dual) -> _Dual:
    if isinstance(node, ast.BinOp):
        a, b = _eval(node.left, x, y), _eval(node.right, x, y)
        if isinstance(node.op, ast.Add):
            return a + b
        if isinstance(node.op, ast.Sub):
            return a - b
        if isinstance(node.op, ast.Mult):
            return a * b
        return a / b
    if isinstance(node, ast.UnaryOp):
        a = _eval(node.operand, x, y)
        return -a if isinstance(node.op, ast.USub) else a
    if isinstance(node, ast.Constant):
        return _const(float(node.value))
    if isinstance(node, ast.Name):
        return x if node.id == "x" else y if node.id == "y" else _const(math.pi)
    name = node.func.id
    args = [_eval(a, x, y) for a in node.args]
    if name == "sin":
        return args[0].chain(np.sin(args[0].v), np.cos(args[0].v))
    if name == "cos":
        return args[0].chain(np.cos(args[0].v), -np.sin(args[0].v))
    if name == "sqrt":
        s = np.sqrt(args[0].v)
        return args[0].chain(s, 0.5 / s)
    if name == "atan2":
        return _atan2(args[0], args[1])
    return _pow(args[0], args[1], _is_constant(node.args[1]))


def _uses_atan2(node) -> bool:
    return any(isinstance(n, ast.Call) and n.func.id == "atan2" for n in ast.walk(node))


@dataclass(frozen=True)
class ScalarField:
    """A gauge function chi with an exact gradient.

    Build from an expression with :meth:`parse`, or from a pair of callables
    with :meth:`from_callables`.
    """

    label: str
    multivalued: bool = False
    _value: Callable = field(default=None, repr=False, compare=False)
    _grad: Callable = field(default=None, repr=False, compare=False)

    @classmethod
    def parse(cls, source: str) -> "ScalarField":
        try:
            tree = ast.parse(source.strip(), mode="eval")
        except SyntaxError as exc:
            raise ValueError(f"cannot parse gauge expression {source!r}: {exc.msg}") from None
        _validate(tree, source)
        body = tree.body

        def evaluate(points):
            p = np.asarray(points, dtype=float)
            zero = np.zeros(p.shape[:-1])
            one = np.ones(p.shape[:-1])
            return _eval(body, _Dual(p[..., 0], one, zero), _Dual(p[..., 1], zero, one))

        def value(points):
            d = evaluate(points)
            return np.broadcast_to(d.v, np.shape(points)[:-1]) * 1.0

        def grad(points):
            d = evaluate(points)
            shape = np.shape(points)[:-1]
            return np.stack([np.broadcast_to(d.dx, shape), np.broadcast_to(d.dy, shape)], axis=-1) * 1.0

        return cls(label=source.strip(), multivalued=_uses_atan2(body), _value=value, _grad=grad)

    @classmethod
    def from_callables(cls, value, grad, label="chi", multivalued=False) -> "ScalarField":
        return cls(label=label, multivalued=multivalued, _value=value, _grad=grad)

    def value(self, points) -> np.ndarray:
        if self.multivalued:
            raise ValueError(
                f"gauge function {self.label!r} is multivalued; integrate its gradient instead"
            )
        return self._value(points)

    def gradient(self, points) -> np.ndarray:
        return self._grad(points)

    def scaled(self, factor: float) -> "ScalarField":
        v, g = self._value, self._grad
        return ScalarField(
            label=f"{factor!r}*({self.label})",
            multivalued=self.multivalued,
            _value=lambda p: factor * v(p),
            _grad=lambda p: factor * g(p),
        )
