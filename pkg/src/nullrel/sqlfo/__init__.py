"""The first-order SQL fragment: parsing, reference evaluation, 2VL rewriting
and compilation to the null-aware algebra."""
from .ast import *  # noqa: F401,F403
from .ast import __all__ as _ast_all
from .compile import compile_to_nra, dup_column
from .parser import parse_condition, parse_query, parse_script, parse_sql
from .rewrite import is_annf, qualify, rewrite_2vl, rewrite_condition_2vl, to_annf
from .semantics import (Catalog, ResolutionError, TableInfo, Truth3, as_catalog, check_holds, check_violations,
                        eval_2vl, eval_3vl, exec_sql, output_names, resolve)

__all__ = list(_ast_all) + [
    "compile_to_nra", "dup_column", "parse_condition", "parse_query", "parse_script", "parse_sql", "is_annf",
    "qualify", "rewrite_2vl", "rewrite_condition_2vl", "to_annf", "Catalog", "ResolutionError", "TableInfo",
    "Truth3", "as_catalog", "check_holds", "check_violations", "eval_2vl", "eval_3vl", "exec_sql",
    "output_names", "resolve",
]
