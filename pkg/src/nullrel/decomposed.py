"""Classical FOL over the decomposed signature and the bijection with the null calculus.

An atom ``R(t1..tn)`` corresponds to ``R~A(t_A)`` where ``A`` is the ascending
list of positions whose term is not the null term.
"""
from __future__ import annotations

from typing import Iterable, Mapping, Optional

from .fole import (And, Assignment, Atom, Bool, DAtom, Eq, Exists, Forall, Formula, FormulaError, N, Not, Or,
                   _check_assignment, _Evaluator, evaluation_domain)
from .instance import InstanceDecomposed
from .values import NULL, Value


def _map_atoms(f: Formula, fn) -> Formula:
    if isinstance(f, (Atom, DAtom)):
        return fn(f)
    if isinstance(f, Not):
        return Not(_map_atoms(f.arg, fn))
    if isinstance(f, (And, Or)):
        return type(f)(_map_atoms(f.left, fn), _map_atoms(f.right, fn))
    if isinstance(f, (Exists, Forall)):
        return type(f)(f.var, _map_atoms(f.body, fn))
    if isinstance(f, (Eq, Bool)):
        return f
    raise TypeError(f"not a formula: {f!r}")


def omega_f(f: Formula) -> Formula:
    """Map a calculus-with-nulls formula to decomposed FOL."""
    def atom(a: Formula) -> Formula:
        if isinstance(a, DAtom):
            raise FormulaError("formula is already over the decomposed signature")
        positions = tuple(k + 1 for k, t in enumerate(a.terms) if t is not N)
        return DAtom(a.pred, positions, tuple(t for t in a.terms if t is not N))
    return _map_atoms(f, atom)


def omega_f_inv(f: Formula, arities: Mapping[str, int]) -> Formula:
    """Inverse of :func:`omega_f`; ``arities`` gives the arity of each base relation."""
    def atom(a: Formula) -> Formula:
        if isinstance(a, Atom):
            raise FormulaError("formula is not over the decomposed signature")
        try:
            n = arities[a.pred]
        except KeyError:
            raise FormulaError(f"unknown predicate {a.pred!r}") from None
        if any(not 1 <= p <= n for p in a.positions):
            raise FormulaError(f"positions {a.positions} outside 1..{n} for {a.pred!r}")
        cells = dict(zip(a.positions, a.terms))
        return Atom(a.pred, tuple(cells.get(k, N) for k in range(1, n + 1)))
    return _map_atoms(f, atom)


def _decomposed_holds(inst: InstanceDecomposed):
    def holds(atom: Formula, vals: tuple) -> bool:
        if not isinstance(atom, DAtom):
            raise TypeError("null-calculus atoms need a partial instance")
        if any(v is None for v in vals):
            return False
        return tuple(vals) in inst.slot(atom.pred, atom.positions)
    return holds


def _decomposed_tuples(inst: InstanceDecomposed):
    def tuples_of(atom: DAtom):
        return inst.slot(atom.pred, atom.positions)
    return tuples_of


def eval_fol_decomposed(f: Formula, inst: InstanceDecomposed, assignment: Optional[Assignment] = None,
                        domain: Optional[Iterable[Value]] = None) -> bool:
    """Classical satisfaction over a decomposed instance."""
    env = _check_assignment(f, assignment or {})
    dom = evaluation_domain(inst, f, env) if domain is None else frozenset(domain)
    if NULL in dom:
        raise FormulaError("the evaluation domain cannot contain null")
    return _Evaluator(_decomposed_holds(inst), dom, _decomposed_tuples(inst)).sat(f, env)
