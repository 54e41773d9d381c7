"""A small differential linear logic: syntax, linear typechecker, evaluator."""

from .check import Checked, TypeCheckError, free_vars, typecheck
from .evaluate import EvalError, LinFun, evaluate
from .program import decode_value, encode_value, load_env, parse_env, parse_program, run_program
from .syntax import ParseError, Span, parse, parse_term, parse_type, show
from .types import Bang, Lolli, RealT, TensorT, Unit, With, show_type, to_space

__all__ = [
    "Checked", "TypeCheckError", "free_vars", "typecheck", "EvalError", "LinFun", "evaluate",
    "decode_value", "encode_value", "load_env", "parse_env", "parse_program", "run_program",
    "ParseError", "Span", "parse", "parse_term", "parse_type", "show",
    "Bang", "Lolli", "RealT", "TensorT", "Unit", "With", "show_type", "to_space",
]
