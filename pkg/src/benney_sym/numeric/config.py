"""Simulation config files.

Example::

    {"N": 3, "M": 256, "L": 1.0, "T": 0.05,
     "profiles": [{"i": 0, "expr": "1+0.01*sin"}, {"i": 2, "expr": "-0.05"}]}

Profile expressions use numbers, ``+ - * / **``, parentheses and the
vocabulary ``const``, ``sin``, ``cos``, ``gaussian``: a bare ``sin`` is
``sin(2 pi x / L)``, ``sin(k)`` is the k-th harmonic, ``gaussian`` is
``exp(-((x - L/2) / (L/10))**2)`` and ``gaussian(w)`` uses width ``w L``.

Instead of ``profiles`` a config may give ``streams``, a list of
``{"rho": expr, "u": expr}``; moments are then ``sum rho u^i``.
"""
from __future__ import annotations

import ast
import json
import math
import operator
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from ..errors import MalformedInput
from .verifier import GridState, SimParams, characteristic_speed

_BINOPS = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow,
}


def profile(expr: Union[str, float, int], x: np.ndarray, L: float) -> np.ndarray:
    """Evaluate a profile expression on the grid ``x``."""
    if isinstance(expr, (int, float)):
        return np.full_like(x, float(expr))
    try:
        tree = ast.parse(str(expr), mode="eval")
    except SyntaxError as exc:
        raise MalformedInput(f"bad profile expression {expr!r}") from exc
    phase = 2 * np.pi * x / L

    def named(name: str, arg: Optional[float] = None):
        if name == "const":
            return np.full_like(x, 1.0 if arg is None else arg)
        if name == "sin":
            return np.sin((1 if arg is None else arg) * phase)
        if name == "cos":
            return np.cos((1 if arg is None else arg) * phase)
        if name == "gaussian":
            w = 0.1 if arg is None else arg
            return np.exp(-((x - L / 2) / (w * L)) ** 2)
        if name == "pi" and arg is None:
            return math.pi
        raise MalformedInput(f"unknown name {name!r} in {expr!r}")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Name):
            return named(node.id)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and len(node.args) == 1 \
                and not node.keywords:
            arg = ev(node.args[0])
            if not isinstance(arg, float):
                raise MalformedInput(f"function arguments must be numbers in {expr!r}")
            return named(node.func.id, arg)
        raise MalformedInput(f"unsupported syntax in profile expression {expr!r}")

    value = ev(tree)
    return np.broadcast_to(np.asarray(value, dtype=float), x.shape).copy()


def load_config(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        cfg = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise MalformedInput(f"{path}: config must be a JSON object")
    for key in ("N", "M"):
        if key not in cfg:
            raise MalformedInput(f"{path}: missing required key {key!r}")
    return cfg


def initial_state(cfg: Dict[str, Any], M: Optional[int] = None) -> GridState:
    N, L = int(cfg["N"]), float(cfg.get("L", 1.0))
    M = int(cfg["M"] if M is None else M)
    x = np.arange(M) * (L / M)
    A = np.zeros((N + 1, M))
    if "streams" in cfg:
        for s in cfg["streams"]:
            rho, u = profile(s["rho"], x, L), profile(s["u"], x, L)
            for i in range(N + 1):
                A[i] += rho * u ** i
    for item in cfg.get("profiles", []):
        try:
            i = int(item["i"])
            expr = item["expr"]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad profile entry {item!r}") from exc
        if not 0 <= i <= N:
            raise MalformedInput(f"profile index {i} outside 0..{N}")
        A[i] = profile(expr, x, L)
    return GridState(A, L)


def sim_params(cfg: Dict[str, Any], state: GridState, v_max: Optional[float] = None) -> SimParams:
    closure = cfg.get("closure", "streams")
    if v_max is None:
        v_max = float(cfg.get("v_max", 0) or 1.1 * characteristic_speed(state, closure))
    # short-time default: a tenth of the domain crossing time
    T = float(cfg.get("T", 0.1 * state.L / v_max))
    kw = dict(closure=closure, bound=float(cfg.get("bound", 1e6)))
    if "dt" in cfg:
        return SimParams(state.N, state.M, state.L, float(cfg["dt"]), T, v_max, **kw)
    return SimParams.auto(state.N, state.M, state.L, T, v_max, **kw)
