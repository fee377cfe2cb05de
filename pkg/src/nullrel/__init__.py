"""SQL null values in three formalisms.

Instances can be held as total tuples with a null marker, as sets of partial
tuples, or horizontally decomposed into null-free slots.  Queries can be
written in the first-order SQL fragment, in a relational algebra whose
selections fail on null, or in a domain calculus with a null term, and
translated between them.
"""
from .constraints import (Check, ConstraintError, ForeignKey, NotNull, PrimaryKey, Unique, check,
                          check_foreign_key_simple, check_not_null, check_primary_key, check_unique,
                          constraint_to_fole, cross_check, denials, nullify, parse_constraint)
from .decomposed import eval_fol_decomposed, omega_f, omega_f_inv
from .fole import (FormulaError, NotSafeRange, answer_set, is_safe_range, no_info_rewrite, parse_fole,
                   range_restriction, satisfies, to_srnf)
from .instance import (InstanceDecomposed, InstanceError, InstanceN, InstancePartial, PartialTuple, Schema,
                       active_domain, decompose, from_partial, load_instance, recompose, to_partial)
from .lexer import ParseError
from .nra import ArityError, eval_nra, expand_derived, parse_nra
from .sqlfo import compile_to_nra, eval_3vl, exec_sql, parse_sql, rewrite_2vl, to_annf
from .translate import TranslationTooLarge, fole_query_to_nra, fole_to_nra, omega
from .values import NULL

__all__ = [
    "Check", "ConstraintError", "ForeignKey", "NotNull", "PrimaryKey", "Unique", "check",
    "check_foreign_key_simple", "check_not_null", "check_primary_key", "check_unique", "constraint_to_fole",
    "cross_check", "denials", "nullify", "parse_constraint", "eval_fol_decomposed", "omega_f", "omega_f_inv",
    "FormulaError", "NotSafeRange", "answer_set", "is_safe_range", "no_info_rewrite", "parse_fole",
    "range_restriction", "satisfies", "to_srnf", "InstanceDecomposed", "InstanceError", "InstanceN",
    "InstancePartial", "PartialTuple", "Schema", "active_domain", "decompose", "from_partial", "load_instance",
    "recompose", "to_partial", "ParseError", "ArityError", "eval_nra", "expand_derived", "parse_nra",
    "compile_to_nra", "eval_3vl", "exec_sql", "parse_sql", "rewrite_2vl", "to_annf", "TranslationTooLarge",
    "fole_query_to_nra", "fole_to_nra", "omega", "NULL",
]
