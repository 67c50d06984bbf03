"""Exact symbolic expressions: arithmetic, calculus, evaluation, parsing."""

from ._kernels import BACKEND
from .parser import ExprSyntaxError, UnknownIdentifierError, parse_expr
from .expr import (
    ONE,
    ZERO,
    EvalDomainError,
    Expr,
    MissingAssignmentError,
    Rational,
    apply_function,
    canonicalize,
    const,
    cos,
    diff,
    evaluate,
    evaluate_points,
    exp,
    log,
    sin,
    sqrt,
    substitute,
    sum_products,
    symbol,
    tan,
)

__all__ = [
    "BACKEND",
    "ONE",
    "ZERO",
    "EvalDomainError",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "parse_expr",
    "Expr",
    "MissingAssignmentError",
    "Rational",
    "apply_function",
    "canonicalize",
    "const",
    "cos",
    "diff",
    "evaluate",
    "evaluate_points",
    "exp",
    "log",
    "sin",
    "sqrt",
    "substitute",
    "sum_products",
    "symbol",
    "tan",
]
