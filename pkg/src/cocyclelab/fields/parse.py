"""Text DSL for scalar and matrix fields.

The grammar is a small subset of Python expression syntax, so ``ast`` does the
tokenising and precedence; this module only whitelists and converts nodes.

    R(pi*x1)                        rotation
    Q(theta)                        reflection [[cos, sin], [sin, -cos]]
    diag(a, b), scalar(k)           diagonal and scalar matrices
    [[a, b], [c, d]]                explicit matrix
    M * N                           product; k * M scales
    M + N, M - N                    matrix sums
    conj(C, B)                      C(Fx) B(x) C(x)^{-1}, needs the base map
    sin, cos, exp, log, sqrt        scalar functions
    compose(e)  or  e @ F           precomposition with the base map

Several lines may be given; ``name = expr`` binds a name and the value of the
last line is returned.  ``#`` starts a comment.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass

import numpy as np

from . import expr as E


class DSLSyntaxError(E.FieldError):
    def __init__(self, msg: str, line: int | None = None, col: int | None = None):
        self.line, self.col = line, col
        where = f" (line {line}, column {col})" if line is not None else ""
        super().__init__(msg + where)


@dataclass(frozen=True)
class ParseContext:
    cover: tuple = (1, 1)
    F: tuple | None = None  # base map matrix; needed for conj and compose


def _err(node, msg):
    return DSLSyntaxError(msg, getattr(node, "lineno", None), getattr(node, "col_offset", -1) + 1)


class _Converter:
    def __init__(self, ctx: ParseContext):
        self.ctx = ctx
        self.names: dict[str, object] = {"pi": E.PI, "x1": E.X1, "x2": E.X2}

    def scalar(self, node):
        v = self.convert(node)
        if isinstance(v, E.MatrixExpr):
            raise _err(node, "expected a scalar expression, got a matrix")
        return v

    def matrix(self, node):
        v = self.convert(node)
        if not isinstance(v, E.MatrixExpr):
            raise _err(node, "expected a matrix expression, got a scalar")
        return v

    def need_map(self, node, what):
        if self.ctx.F is None:
            raise _err(node, f"{what} needs the base automorphism")
        return self.ctx.F

    def convert(self, node):
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                raise _err(node, f"unsupported literal {node.value!r}")
            return E.Const(float(node.value))
        if isinstance(node, ast.Name):
            if node.id not in self.names:
                raise _err(node, f"unknown name {node.id!r}")
            return self.names[node.id]
        if isinstance(node, ast.UnaryOp):
            if isinstance(node.op, ast.USub):
                v = self.convert(node.operand)
                return E.ScalarMatrix(E.Const(-1.0)) * v if isinstance(v, E.MatrixExpr) else E.Neg(v)
            if isinstance(node.op, ast.UAdd):
                return self.convert(node.operand)
            raise _err(node, "unsupported unary operator")
        if isinstance(node, ast.BinOp):
            return self.binop(node)
        if isinstance(node, ast.Call):
            return self.call(node)
        if isinstance(node, ast.List):
            return self.literal(node)
        raise _err(node, f"unsupported syntax {type(node).__name__}")

    def binop(self, node):
        if isinstance(node.op, ast.MatMult):
            F = self.need_map(node, "precomposition")
            if not (isinstance(node.right, ast.Name) and node.right.id == "F"):
                raise _err(node.right, "only '@ F' precomposition is supported")
            return E.Compose(self.scalar(node.left), F)
        a, b = self.convert(node.left), self.convert(node.right)
        am, bm = isinstance(a, E.MatrixExpr), isinstance(b, E.MatrixExpr)
        if isinstance(node.op, ast.Mult):
            if am and bm:
                return E.Product((a, b))
            if am:
                return E.Product((a, E.ScalarMatrix(b)))
            if bm:
                return E.Product((E.ScalarMatrix(a), b))
            return E.BinOp("*", a, b)
        if am and bm and isinstance(node.op, (ast.Add, ast.Sub)):
            return E.MatrixSum((a, b), (1, 1 if isinstance(node.op, ast.Add) else -1))
        if am or bm:
            raise _err(node, "matrices support '*' and matrix '+'/'-' only")
        ops = {ast.Add: "+", ast.Sub: "-", ast.Div: "/", ast.Pow: "**"}
        op = ops.get(type(node.op))
        if op is None:
            raise _err(node, "unsupported operator")
        if op == "**" and not (b.is_constant() and float(b.evaluate(0.0, 0.0)).is_integer()):
            raise _err(node.right, "exponent must be an integer constant")
        return E.BinOp(op, a, b)

    def call(self, node):
        if not isinstance(node.func, ast.Name):
            raise _err(node, "unsupported call")
        name, args = node.func.id, node.args
        if node.keywords:
            raise _err(node, "keyword arguments are not supported")
        arity = {"R": 1, "Q": 1, "diag": 2, "scalar": 1, "conj": 2, "compose": 1}
        arity.update({f: 1 for f in E.FUNCS})
        if name not in arity:
            raise _err(node, f"unknown function {name!r}")
        if len(args) != arity[name]:
            raise _err(node, f"{name} takes {arity[name]} argument(s), got {len(args)}")
        if name in E.FUNCS:
            return E.Func(name, self.scalar(args[0]))
        if name == "R":
            return E.Rotation(self.scalar(args[0]))
        if name == "Q":
            return E.Reflection(self.scalar(args[0]))
        if name == "diag":
            return E.Diagonal(self.scalar(args[0]), self.scalar(args[1]))
        if name == "scalar":
            return E.ScalarMatrix(self.scalar(args[0]))
        if name == "compose":
            return E.Compose(self.scalar(args[0]), self.need_map(node, "compose"))
        F = self.need_map(node, "conj")
        return E.ConjugateBy(self.matrix(args[0]), self.matrix(args[1]), F)

    def literal(self, node):
        rows = node.elts
        if len(rows) != 2 or not all(isinstance(r, ast.List) and len(r.elts) == 2 for r in rows):
            raise _err(node, "matrix literal must be [[a, b], [c, d]]")
        entries = tuple(self.scalar(e) for r in rows for e in r.elts)
        return E.MatrixLiteral(entries)


def parse(
    text: str,
    cover=(1, 1),
    F=None,
    holder: float = 1.0,
    check: bool = True,
):
    """Parse DSL text into an expression tree.

    With ``check`` the result is verified periodic on the ``cover`` lattice and
    every division is certified nonvanishing on a sample grid.
    """
    ctx = ParseContext(tuple(int(q) for q in cover), None if F is None else tuple(map(tuple, F)))
    try:
        module = ast.parse(text, mode="exec")
    except SyntaxError as exc:
        raise DSLSyntaxError(exc.msg, exc.lineno, exc.offset) from None
    conv = _Converter(ctx)
    result = None
    for stmt in module.body:
        if isinstance(stmt, ast.Assign):
            if len(stmt.targets) != 1 or not isinstance(stmt.targets[0], ast.Name):
                raise _err(stmt, "only 'name = expr' assignments are allowed")
            name = stmt.targets[0].id
            if name in ("x1", "x2", "pi", "F"):
                raise _err(stmt, f"cannot rebind {name!r}")
            result = conv.convert(stmt.value)
            conv.names[name] = result
        elif isinstance(stmt, ast.Expr):
            result = conv.convert(stmt.value)
        else:
            raise _err(stmt, f"unsupported statement {type(stmt).__name__}")
    if result is None:
        raise DSLSyntaxError("empty expression", 1, 1)
    if check:
        E.certify_divisions(result, ctx.cover)
        E.check_periodic(result, ctx.cover)
    if isinstance(result, E.ScalarExpr) and holder != 1.0:
        object.__setattr__(result, "holder_exponent", float(holder))
    return result


def evaluate_at(expr, x):
    """Evaluate at a single point; matrices come back with cached det and trace."""
    v = expr.evaluate(float(x[0]), float(x[1]))
    if getattr(expr, "is_matrix", False):
        return MatrixValue(v)
    return float(v)


class MatrixValue:
    __slots__ = ("M", "det", "tr")

    def __init__(self, M):
        self.M = np.asarray(M, dtype=float)
        self.det = float(self.M[0, 0] * self.M[1, 1] - self.M[0, 1] * self.M[1, 0])
        self.tr = float(self.M[0, 0] + self.M[1, 1])

    def __array__(self, dtype=None, copy=None):
        return self.M if dtype is None else self.M.astype(dtype)

    def __repr__(self):
        return f"MatrixValue({self.M.tolist()}, det={self.det:.6g}, tr={self.tr:.6g})"

