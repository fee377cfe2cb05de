"""Translations between the algebra with nulls and the calculus with nulls.

``omega(e, t, schema)`` produces a closed formula that holds exactly when the
ground tuple ``t`` belongs to the answer of ``e``.  In the other direction,
``fole_to_nra`` takes a closed safe-range formula through the decomposed
signature: calculus with nulls -> decomposed FOL -> algebra over decomposed
relations -> algebra with nulls.
"""
from __future__ import annotations

import itertools
import os
from typing import Iterable, Mapping, Optional, Sequence

from . import fole as F
from .decomposed import omega_f
from .fole import N, Const, Formula, NotSafeRange, Var
from .instance import Schema
from .nra import (CIsNotNull, CIsNull, DecompRelation, Diff, NraExpr, Product, Project, Relation, Select,
                  SelectEqCols, SelectEqConst, Singleton, Union, check_arity, expand_derived, is_core)
from .values import NULL, Value

DEFAULT_NODE_BUDGET = 10 ** 6


class TranslationTooLarge(RuntimeError):
    pass


def node_budget() -> int:
    raw = os.environ.get("NULLREL_NODE_BUDGET")
    if raw:
        try:
            return int(raw)
        except ValueError:
            raise ValueError(f"NULLREL_NODE_BUDGET must be an integer, got {raw!r}") from None
    return DEFAULT_NODE_BUDGET


def _cell(x) -> F.Term:
    if isinstance(x, (Const, Var)) or x is N:
        return x
    if x is NULL or x is None:
        return N
    return Const(x)


class _Omega:
    def __init__(self, schema: Schema, simplify: bool, budget: int, taken: set):
        self.schema = schema
        self.simplify = simplify
        self.budget = budget
        self.nodes = 0
        self.fresh = F._Fresh(taken, prefix="x")

    def tick(self, k: int = 1) -> None:
        self.nodes += k
        if self.nodes > self.budget:
            raise TranslationTooLarge(f"translation exceeds the node budget of {self.budget}")

    # simplifying constructors
    def and_(self, a: Formula, b: Formula) -> Formula:
        self.tick()
        if self.simplify:
            if a == F.FALSE or b == F.FALSE:
                return F.FALSE
            if a == F.TRUE:
                return b
            if b == F.TRUE:
                return a
        return F.And(a, b)

    def or_(self, a: Formula, b: Formula) -> Formula:
        self.tick()
        if self.simplify:
            if a == F.TRUE or b == F.TRUE:
                return F.TRUE
            if a == F.FALSE:
                return b
            if b == F.FALSE:
                return a
        return F.Or(a, b)

    def not_(self, a: Formula) -> Formula:
        self.tick()
        if self.simplify and isinstance(a, F.Bool):
            return F.Bool(not a.value)
        return F.Not(a)

    def eq(self, a: F.Term, b: F.Term) -> Formula:
        self.tick()
        if self.simplify and isinstance(a, Const) and isinstance(b, Const):
            return F.Bool(a.value == b.value)
        return F.Eq(a, b)

    def exists(self, names: Sequence[str], body: Formula) -> Formula:
        self.tick(len(names))
        if self.simplify and body == F.FALSE:
            return F.FALSE
        return F.exists(names, body)

    def arity(self, e: NraExpr) -> int:
        return check_arity(e, self.schema)

    def run(self, e: NraExpr, t: tuple) -> Formula:
        if isinstance(e, Relation):
            self.tick(1 + len(t))
            return F.Atom(e.name, t)
        if isinstance(e, Singleton):
            if e.value is NULL:
                return F.TRUE if t[0] is N else F.FALSE
            return F.FALSE if t[0] is N else self.eq(t[0], Const(e.value))
        if isinstance(e, SelectEqConst):
            if t[e.index - 1] is N:
                return F.FALSE
            return self.and_(self.run(e.child, t), self.eq(t[e.index - 1], Const(e.value)))
        if isinstance(e, SelectEqCols):
            a, b = t[e.i - 1], t[e.j - 1]
            if a is N or b is N:
                return F.FALSE
            return self.and_(self.run(e.child, t), self.eq(a, b))
        if isinstance(e, Project):
            return self.project(e, t)
        if isinstance(e, Product):
            n1 = self.arity(e.left)
            return self.and_(self.run(e.left, t[:n1]), self.run(e.right, t[n1:]))
        if isinstance(e, Union):
            return self.or_(self.run(e.left, t), self.run(e.right, t))
        if isinstance(e, Diff):
            return self.and_(self.run(e.left, t), self.not_(self.run(e.right, t)))
        raise TypeError(f"not a core nRA expression: {e!r}")

    def project(self, e: Project, t: tuple) -> Formula:
        n = self.arity(e.child)
        kept = {p: t[j] for j, p in enumerate(e.indices)}
        rest = [p for p in range(1, n + 1) if p not in kept]
        names = {p: self.fresh() for p in rest}
        out: Optional[Formula] = None
        for k in range(len(rest) + 1):
            for hole in itertools.combinations(rest, k):
                cells = tuple(kept[p] if p in kept else (N if p in hole else Var(names[p]))
                              for p in range(1, n + 1))
                body = self.run(e.child, cells)
                if self.simplify:
                    body = self.exists([names[p] for p in rest if p not in hole], body)
                out = body if out is None else self.or_(out, body)
        if not self.simplify:
            out = self.exists([names[p] for p in rest], out)
        return out


def omega(e: NraExpr, t: Iterable, schema: Schema, *, simplify: bool = True,
          budget: Optional[int] = None) -> Formula:
    """Membership formula for ``t`` in ``e``.

    ``t`` holds values (``NULL`` for the null marker).  With ``simplify`` the
    output is cleaned with truth-functional rules and each projection disjunct
    quantifies only its own variables; without it the projection clause is
    emitted as one existential block over the whole disjunction.
    """
    t = tuple(_cell(x) for x in t)
    n = check_arity(e, schema)
    if len(t) != n:
        raise ValueError(f"tuple has {len(t)} cells but the expression has arity {n}")
    if not is_core(e):
        e = expand_derived(e, schema)
    taken = {c.name for c in t if isinstance(c, Var)}
    return _Omega(schema, simplify, budget if budget is not None else node_budget(), taken).run(e, t)


# calculus -> algebra


def _unit() -> NraExpr:
    # the zero-ary relation holding the empty tuple
    return Project((), Singleton(0))


class _ToRA:
    """Translate a safe-range formula in SRNF relative to a context expression.

    ``run(f, ctx, cols)`` returns ``(expr, cols')`` where ``expr`` holds the
    extensions of context rows (columns ``cols``) that satisfy ``f``; the new
    columns ``cols'[len(cols):]`` are the free variables of ``f`` outside
    ``cols``.  A context of ``None`` stands for the unit relation.
    """

    def __init__(self, arities: Mapping[str, int]):
        self.arities = arities

    @staticmethod
    def mat(ctx: Optional[NraExpr]) -> NraExpr:
        return _unit() if ctx is None else ctx

    def product(self, ctx: Optional[NraExpr], e: NraExpr) -> NraExpr:
        return e if ctx is None else Product(ctx, e)

    def run(self, f: Formula, ctx: Optional[NraExpr], cols: list[str]):
        if isinstance(f, F.DAtom):
            return self.atom(f, ctx, cols)
        if isinstance(f, F.Eq):
            return self.eq(f, ctx, cols)
        if isinstance(f, F.Bool):
            if f.value:
                return ctx, cols
            m = self.mat(ctx)
            return Diff(m, m), cols
        if isinstance(f, F.And):
            return self.conj(F.conjuncts(f), ctx, cols)
        if isinstance(f, F.Or):
            return self.disj(f, ctx, cols)
        if isinstance(f, F.Not):
            return self.neg(f, ctx, cols)
        if isinstance(f, F.Exists):
            e, out = self.run(f.body, ctx, cols)
            if f.var not in out:
                raise NotSafeRange(f"variable {f.var!r} is not range restricted")
            keep = [k + 1 for k, x in enumerate(out) if x != f.var]
            return Project(tuple(keep), self.mat(e)), [x for x in out if x != f.var]
        if isinstance(f, F.Atom):
            raise TypeError("translate with omega_f first: formula contains null-calculus atoms")
        raise NotSafeRange(f"unexpected node in safe-range normal form: {F.to_text(f)}")

    def atom(self, f: F.DAtom, ctx, cols):
        leaf: NraExpr = DecompRelation(f.pred, f.positions)
        m = len(cols)
        e = self.product(ctx, leaf)
        out = list(cols)
        keep = list(range(1, m + 1))
        first: dict[str, int] = {}
        for k, t in enumerate(f.terms):
            pos = m + k + 1
            if isinstance(t, Const):
                e = SelectEqConst(pos, t.value, e)
            elif t.name in cols:
                e = SelectEqCols(cols.index(t.name) + 1, pos, e)
            elif t.name in first:
                e = SelectEqCols(first[t.name], pos, e)
            else:
                first[t.name] = pos
                keep.append(pos)
                out.append(t.name)
        if len(keep) != m + len(f.terms):
            e = Project(tuple(keep), e)
        return e, out

    def eq(self, f: F.Eq, ctx, cols):
        a, b = f.left, f.right
        if isinstance(a, Const) and isinstance(b, Const):
            if a.value == b.value:
                return ctx, cols
            m = self.mat(ctx)
            return Diff(m, m), cols
        if isinstance(a, Const):
            a, b = b, a
        if isinstance(b, Const):
            if a.name in cols:
                return SelectEqConst(cols.index(a.name) + 1, b.value, self.mat(ctx)), cols
            return self.product(ctx, Singleton(b.value)), cols + [a.name]
        if a.name in cols and b.name in cols:
            return SelectEqCols(cols.index(a.name) + 1, cols.index(b.name) + 1, self.mat(ctx)), cols
        if b.name in cols:
            a, b = b, a
        if a.name not in cols:
            raise NotSafeRange(f"equality {F.to_text(f)} has no range for its variables")
        # copy column a as b: join the context with its own a-column
        i = cols.index(a.name) + 1
        m = len(cols)
        return SelectEqCols(i, m + 1, Product(ctx, Project((i,), ctx))), cols + [b.name]

    def ready(self, f: Formula, cols: list[str]) -> int:
        """0 = generator usable now, 1 = filter usable now, 2 = not yet."""
        fv = set(F.free_vars(f))
        bound = set(cols)
        if isinstance(f, F.Not):
            return 1 if fv <= bound else 2
        if isinstance(f, F.Eq):
            names = [t.name for t in (f.left, f.right) if isinstance(t, Var)]
            if len(names) == 2 and not (set(names) & bound):
                return 2
            return 0
        rr = F.range_restriction(f)
        if rr is F.NOT_SAFE:
            return 2
        return 0 if fv - bound <= rr else 2

    def conj(self, parts: list[Formula], ctx, cols):
        pending = list(parts)
        while pending:
            scores = [self.ready(p, cols) for p in pending]
            best = min(range(len(pending)), key=lambda k: (scores[k], k))
            if scores[best] == 2:
                raise NotSafeRange("conjunction cannot be ordered safely: "
                                   + " and ".join(F.to_text(p) for p in pending))
            ctx, cols = self.run(pending.pop(best), ctx, cols)
        return ctx, cols

    def disj(self, f: Formula, ctx, cols):
        parts = F.disjuncts(f)
        target = list(cols) + [x for x in F.free_vars(f) if x not in cols]
        out: Optional[NraExpr] = None
        for p in parts:
            e, got = self.run(p, ctx, cols)
            if set(got) != set(target):
                raise NotSafeRange(f"disjunct {F.to_text(p)} does not bind {sorted(set(target) - set(got))}")
            e = self.mat(e)
            if got != target:
                e = Project(tuple(got.index(x) + 1 for x in target), e)
            out = e if out is None else Union(out, e)
        return out, target

    def neg(self, f: F.Not, ctx, cols):
        if not set(F.free_vars(f.arg)) <= set(cols):
            raise NotSafeRange(f"negated subformula has unbound variables: {F.to_text(f)}")
        inner, got = self.run(f.arg, ctx, cols)
        inner = self.mat(inner)
        if got != cols:
            inner = Project(tuple(got.index(x) + 1 for x in cols), inner)
        return Diff(self.mat(ctx), inner), cols


def fol_to_ra(f: Formula, arities: Mapping[str, int]):
    """Translate a safe-range formula over the decomposed signature.

    Returns ``(expr, columns)``: an algebra expression over ``R~A`` leaves and
    the free variables it ranges over, in first-appearance order.  Closed
    formulas give zero-ary expressions (nonempty iff the formula holds).
    """
    if any(isinstance(g, F.Atom) for g in F.subformulas(f)):
        raise TypeError("fol_to_ra expects a formula over the decomposed signature")
    F.check_schema(f, arities)
    g = F.to_srnf(f)
    rr = F.range_restriction(g)
    target = F.free_vars(f)
    if rr is F.NOT_SAFE or rr != frozenset(target):
        raise NotSafeRange(f"formula is not safe-range: {F.to_text(f)}")
    e, cols = _ToRA(arities).run(g, None, [])
    e = _ToRA.mat(e)
    if cols != target:
        e = Project(tuple(cols.index(x) + 1 for x in target), e)
    return e, target


def ra_decomp_to_nra(e: NraExpr, arities: Mapping[str, int]) -> NraExpr:
    """Replace each ``R~A`` leaf by the selection of ``R`` rows defined exactly on ``A``."""
    if isinstance(e, DecompRelation):
        n = arities[e.name]
        body: NraExpr = Relation(e.name)
        for p in reversed([p for p in range(1, n + 1) if p not in e.positions]):
            body = Select(CIsNull(p), body)
        for p in reversed(e.positions):
            body = Select(CIsNotNull(p), body)
        return Project(tuple(e.positions), body)
    if isinstance(e, (Relation, Singleton)):
        return e
    if isinstance(e, SelectEqConst):
        return SelectEqConst(e.index, e.value, ra_decomp_to_nra(e.child, arities))
    if isinstance(e, SelectEqCols):
        return SelectEqCols(e.i, e.j, ra_decomp_to_nra(e.child, arities))
    if isinstance(e, Project):
        return Project(e.indices, ra_decomp_to_nra(e.child, arities))
    if isinstance(e, Select):
        return Select(e.cond, ra_decomp_to_nra(e.child, arities))
    if isinstance(e, (Product, Union, Diff)) or hasattr(e, "left"):
        return type(e)(ra_decomp_to_nra(e.left, arities), ra_decomp_to_nra(e.right, arities))
    raise TypeError(f"unexpected node {e!r}")


def _arities_of(f: Formula, schema: Optional[Schema]) -> dict[str, int]:
    if schema is not None:
        return schema.arities()
    out: dict[str, int] = {}
    for pred, n in F.predicates(f):
        if out.setdefault(pred, n) != n:
            raise F.FormulaError(f"predicate {pred!r} is used with different arities")
    return out


def fole_to_nra(f: Formula, schema: Optional[Schema] = None) -> NraExpr:
    """Zero-ary algebra expression that is nonempty exactly when ``f`` holds.

    Without a schema the relation arities are read off the atoms of ``f``.
    """
    if F.free_vars(f):
        raise F.FormulaError(f"formula is not closed; free variables {F.free_vars(f)}")
    if not F.is_safe_range(f):
        raise NotSafeRange(f"formula is not safe-range: {F.to_text(f)}")
    arities = _arities_of(f, schema)
    F.check_schema(f, arities)
    ra, _ = fol_to_ra(omega_f(f), arities)
    return ra_decomp_to_nra(ra, arities)


def fole_query_to_nra(f: Formula, schema: Optional[Schema] = None):
    """Like :func:`fole_to_nra` for open safe-range formulas.

    Returns ``(expr, free_variables)``; rows of ``expr`` are the answers.
    """
    if not F.is_safe_range(f):
        raise NotSafeRange(f"formula is not safe-range: {F.to_text(f)}")
    arities = _arities_of(f, schema)
    F.check_schema(f, arities)
    ra, cols = fol_to_ra(omega_f(f), arities)
    return ra_decomp_to_nra(ra, arities), cols
