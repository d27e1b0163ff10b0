"""Expression language for defining functions, map families and experiments."""

from .ast import Binary, Expr, Num, Unary, Var, free_vars, is_holomorphic, node_count
from .config import (
    DEFAULT_TOLERANCES,
    DefiningFunction,
    Domain,
    ExperimentConfig,
    MapFamily,
    format_config,
    parse,
    parse_config,
)
from .dual import Dual
from .evaluate import evaluate, evaluate_scalar
from .parser import parse_expr
from .printer import fmt

__all__ = [
    "Binary", "Expr", "Num", "Unary", "Var", "free_vars", "is_holomorphic", "node_count",
    "DEFAULT_TOLERANCES", "DefiningFunction", "Domain", "ExperimentConfig", "MapFamily",
    "format_config", "parse", "parse_config", "Dual", "evaluate", "evaluate_scalar",
    "parse_expr", "fmt",
]
