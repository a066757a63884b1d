"""Objectives from expression strings and JSON configs.

Grammar: numbers, variables ``x1 .. xd``, constants ``pi`` and ``e``, the
operators ``+ - * / ^`` and the functions ``sin cos exp log norm2``.
``norm2()`` is ‖x‖²; ``norm2(a, b, ...)`` is a² + b² + ....
Gradients and Laplacians come from finite differences.
"""

from __future__ import annotations

import ast
import json
import re
from pathlib import Path

import numpy as np

from ..errors import ExpressionError
from .core import ObjectiveSpec

_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "log": np.log}
_CONSTS = {"pi": np.pi, "e": np.e}
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
           ast.Div: np.divide, ast.Pow: np.power}
_VAR = re.compile(r"x([1-9][0-9]*)$")


def compile_expression(text: str, dim: int):
    """Compile ``text`` into a batched callable ``(N, dim) -> (N,)``."""
    if "**" in text:
        raise ExpressionError("use '^' for powers")
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None

    def build(node):
        if isinstance(node, ast.Expression):
            return build(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            v = float(node.value)
            return lambda X: np.full(X.shape[0], v)
        if isinstance(node, ast.Name):
            if node.id in _CONSTS:
                v = _CONSTS[node.id]
                return lambda X: np.full(X.shape[0], v)
            m = _VAR.match(node.id)
            if m and int(m.group(1)) <= dim:
                j = int(m.group(1)) - 1
                return lambda X: X[:, j]
            raise ExpressionError(f"unknown name {node.id!r} (variables are x1..x{dim})")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = build(node.operand)
            return (lambda X: -inner(X)) if isinstance(node.op, ast.USub) else inner
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            op, lhs, rhs = _BINOPS[type(node.op)], build(node.left), build(node.right)
            return lambda X: op(lhs(X), rhs(X))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
            name = node.func.id
            args = [build(a) for a in node.args]
            if name == "norm2":
                if not args:
                    return lambda X: np.sum(X * X, axis=1)
                return lambda X: sum(a(X) ** 2 for a in args)
            if name in _FUNCS and len(args) == 1:
                fn, arg = _FUNCS[name], args[0]
                return lambda X: fn(arg(X))
            raise ExpressionError(f"unsupported call {name}() with {len(args)} argument(s)")
        raise ExpressionError(f"unsupported syntax: {ast.dump(node)[:60]}")

    return build(tree)


def spec_from_expression(name: str, dim: int, box, expression: str, minimizer=None) -> ObjectiveSpec:
    fn = compile_expression(expression, dim)
    box = np.asarray(box, dtype=float)
    if box.shape == (2,):
        box = np.tile(box, (dim, 1))

    def value(X):
        with np.errstate(all="ignore"):
            return np.asarray(fn(np.asarray(X, dtype=float)), dtype=float)

    return ObjectiveSpec(name, dim, box, value, minimizer=minimizer, meta={"expression": expression})


def load_function_config(path_or_dict) -> ObjectiveSpec:
    """Load ``{"name", "dim", "box", "expression"[, "minimizer"]}`` from JSON."""
    if isinstance(path_or_dict, dict):
        cfg = path_or_dict
    else:
        cfg = json.loads(Path(path_or_dict).read_text())
    missing = {"name", "dim", "box", "expression"} - set(cfg)
    if missing:
        raise ExpressionError(f"function config missing keys: {sorted(missing)}")
    return spec_from_expression(cfg["name"], int(cfg["dim"]), cfg["box"], cfg["expression"],
                                cfg.get("minimizer"))
