"""Field-definition language: parsing, evaluation and local asymptotics."""
from .ast import (
    BinOp,
    Call,
    Const,
    DenseSegment,
    Expr,
    FieldSpec,
    Neg,
    Override,
    Piece,
    Span,
    Var,
)
from .asymptotics import LocalForm, SeriesUnknown, expand, local_form, one_sided_limit
from .evaluate import DomainError, compile_expr, eval_expr, eval_interval, is_continuous_on
from .parser import ParseError, parse_expr, parse_field, render, render_expr

__all__ = [
    "BinOp", "Call", "Const", "DenseSegment", "Expr", "FieldSpec", "Neg", "Override",
    "Piece", "Span", "Var", "LocalForm", "SeriesUnknown", "expand", "local_form",
    "one_sided_limit", "DomainError", "compile_expr", "eval_expr", "eval_interval",
    "is_continuous_on", "ParseError", "parse_expr", "parse_field", "render", "render_expr",
]
