"""JSON form of expression trees (plain dicts; the lab layer writes the file)."""

from __future__ import annotations

import numpy as np

from . import expr as E
from .grid import GridField
from .trigpoly import TrigPoly


def _F(F):
    return [list(map(int, row)) for row in F]


def to_json(node) -> dict:
    if isinstance(node, (TrigPoly, GridField)):
        return node.to_json()
    if isinstance(node, E.Wrapped):
        return to_json(node.inner)
    if isinstance(node, E.Const):
        return {"node": "pi"} if node.name == "pi" else {"node": "const", "value": node.value}
    if isinstance(node, E.Coord):
        return {"node": "coord", "index": node.index + 1}
    if isinstance(node, E.BinOp):
        return {"node": "binop", "op": node.op, "args": [to_json(node.left), to_json(node.right)]}
    if isinstance(node, E.Neg):
        return {"node": "neg", "args": [to_json(node.arg)]}
    if isinstance(node, E.Func):
        return {"node": node.name, "args": [to_json(node.arg)]}
    if isinstance(node, E.Compose):
        return {"node": "compose", "F": _F(node.F), "args": [to_json(node.arg)]}
    if isinstance(node, E.MatrixLiteral):
        return {"node": "matrix", "args": [to_json(E.as_expr(e)) for e in node.entries]}
    if isinstance(node, E.Rotation):
        return {"node": "R", "args": [to_json(node.theta)]}
    if isinstance(node, E.Reflection):
        return {"node": "Q", "args": [to_json(node.theta)]}
    if isinstance(node, E.Diagonal):
        return {"node": "diag", "args": [to_json(node.a), to_json(node.b)]}
    if isinstance(node, E.ScalarMatrix):
        return {"node": "scalar", "args": [to_json(node.k)]}
    if isinstance(node, E.Product):
        return {"node": "product", "args": [to_json(f) for f in node.factors]}
    if isinstance(node, E.MatrixSum):
        return {"node": "sum", "signs": list(node.signs), "args": [to_json(t) for t in node.terms]}
    if isinstance(node, E.ConjugateBy):
        return {"node": "conj", "F": _F(node.F), "args": [to_json(node.C), to_json(node.B)]}
    raise E.FieldError(f"cannot serialise {type(node).__name__}")


def from_json(d: dict):
    kind = d["node"]
    args = [from_json(a) for a in d.get("args", [])]
    if kind == "trigpoly":
        return TrigPoly({(k1, k2): complex(re, im) for k1, k2, re, im in d["coeffs"]}, tuple(d["cover"]))
    if kind == "grid":
        vals = np.asarray(d["values"], dtype=float).reshape(d["shape"])
        return GridField(vals, tuple(d["cover"]), d.get("order", 3))
    if kind == "pi":
        return E.PI
    if kind == "const":
        return E.Const(float(d["value"]))
    if kind == "coord":
        return E.Coord(int(d["index"]) - 1)
    if kind == "binop":
        return E.BinOp(d["op"], E.as_expr(args[0]), E.as_expr(args[1]))
    if kind == "neg":
        return E.Neg(args[0])
    if kind in E.FUNCS:
        return E.Func(kind, E.as_expr(args[0]))
    if kind == "compose":
        return E.Compose(args[0], tuple(map(tuple, d["F"])))
    if kind == "matrix":
        return E.MatrixLiteral(tuple(E.as_expr(a) for a in args))
    if kind == "R":
        return E.Rotation(E.as_expr(args[0]))
    if kind == "Q":
        return E.Reflection(E.as_expr(args[0]))
    if kind == "diag":
        return E.Diagonal(E.as_expr(args[0]), E.as_expr(args[1]))
    if kind == "scalar":
        return E.ScalarMatrix(E.as_expr(args[0]))
    if kind == "product":
        return E.Product(tuple(args))
    if kind == "sum":
        return E.MatrixSum(tuple(args), tuple(d["signs"]))
    if kind == "conj":
        return E.ConjugateBy(args[0], args[1], tuple(map(tuple, d["F"])))
    raise E.FieldError(f"unknown node {kind!r}")
