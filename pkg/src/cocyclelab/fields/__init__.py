"""Scalar and matrix fields on the torus: expression trees, trig polynomials, grids."""

from .expr import (
    PI,
    X1,
    X2,
    BinOp,
    Compose,
    ConjugateBy,
    Const,
    Coord,
    Diagonal,
    FieldError,
    Func,
    MatrixExpr,
    MatrixFunction,
    MatrixLiteral,
    MatrixSum,
    Neg,
    NotRepresentableError,
    PeriodicityError,
    Product,
    Reflection,
    Rotation,
    ScalarExpr,
    ScalarMatrix,
    SingularEvaluationError,
    Wrapped,
    as_expr,
    check_periodic,
    constant_matrix,
    cos,
    exp,
    log,
    orientation_sign,
    reflection,
    rotation,
    sin,
)
from .grid import GridField, grid_points
from .parse import DSLSyntaxError, MatrixValue, evaluate_at, parse
from .serialize import from_json, to_json
from .trigpoly import TrigPoly, linear_form, to_trigpoly

__all__ = [name for name in dir() if not name.startswith("_")]
