"""Negation normal form with absorption, and the 3VL to 2VL rewriting."""
from __future__ import annotations

from itertools import count

from .ast import (EQ, EQ2, NE, NE2, And, Cmp, Col, Cond, Exists, In, IsNull, Not, Or, Query, Select,
                  SelectItem, SetOp, SqlError, SubqueryRef, TableRef, Truth, and_all, or_all, output_arity,
                  subqueries)
from .semantics import as_catalog, from_binding, lookup, output_names

_FLIP = {EQ: NE, NE: EQ}


def to_annf(c: Cond, negate: bool = False) -> Cond:
    """Push negations to the atoms and absorb them; 3VL-equivalent and linear in size."""
    if isinstance(c, Not):
        return to_annf(c.arg, not negate)
    if isinstance(c, And):
        cls = Or if negate else And
        return cls(to_annf(c.left, negate), to_annf(c.right, negate))
    if isinstance(c, Or):
        cls = And if negate else Or
        return cls(to_annf(c.left, negate), to_annf(c.right, negate))
    if not negate:
        return c
    if isinstance(c, Cmp):
        if c.op not in _FLIP:
            raise SqlError(f"cannot absorb a negation into a 2VL comparison {c.op!r}")
        return Cmp(c.lhs, _FLIP[c.op], c.rhs)
    if isinstance(c, IsNull):
        return IsNull(c.expr, not c.negated)
    if isinstance(c, Exists):
        return Exists(c.query, not c.negated)
    if isinstance(c, In):
        return In(c.lhs, c.query, c.values, not c.negated)
    if isinstance(c, Truth):
        return Truth(not c.value)
    raise TypeError(f"not a condition: {c!r}")


def is_annf(c: Cond) -> bool:
    if isinstance(c, Not):
        return False
    if isinstance(c, (And, Or)):
        return is_annf(c.left) and is_annf(c.right)
    return True


# qualification


def qualify(q: Query, catalog, frames=()) -> Query:
    """Rewrite every bare column reference as ``alias.column``."""
    cat = as_catalog(catalog)
    return _Qualifier(cat).query(q, list(frames))


class _Qualifier:
    def __init__(self, catalog):
        self.catalog = catalog

    def query(self, q: Query, frames) -> Query:
        if isinstance(q, SetOp):
            return SetOp(q.kind, self.query(q.left, frames), self.query(q.right, frames))
        from_ = []
        frame = []
        for f in q.from_:
            if isinstance(f, SubqueryRef):
                f = SubqueryRef(self.query(f.query, frames), f.alias, f.positional)
            from_.append(f)
            frame.append(from_binding(f, self.catalog))
        scope = frames + [tuple(frame)]
        items = tuple(SelectItem(self.expr(i.expr, scope), i.alias) for i in q.items)
        where = self.cond(q.where, scope) if q.where is not None else None
        return Select(items, tuple(from_), where, q.distinct)

    def expr(self, e, scope):
        if isinstance(e, Col) and e.table is None:
            fi, bi, _ = lookup(scope, e)
            return Col(scope[fi][bi].alias, e.name)
        return e

    def cond(self, c: Cond, scope) -> Cond:
        if isinstance(c, (And, Or)):
            return type(c)(self.cond(c.left, scope), self.cond(c.right, scope))
        if isinstance(c, Not):
            return Not(self.cond(c.arg, scope))
        if isinstance(c, Cmp):
            return Cmp(tuple(self.expr(e, scope) for e in c.lhs), c.op, tuple(self.expr(e, scope) for e in c.rhs))
        if isinstance(c, IsNull):
            return IsNull(self.expr(c.expr, scope), c.negated)
        if isinstance(c, Exists):
            return Exists(self.query(c.query, scope), c.negated)
        if isinstance(c, In):
            lhs = tuple(self.expr(e, scope) for e in c.lhs)
            if c.query is not None:
                return In(lhs, self.query(c.query, scope), None, c.negated)
            return In(lhs, None, tuple(self.expr(e, scope) for e in c.values), c.negated)
        return c


# 2VL rewriting


def _aliases(q: Query, out: set) -> set:
    if isinstance(q, SetOp):
        _aliases(q.left, out)
        _aliases(q.right, out)
        return out
    for f in q.from_:
        out.add(f.binding)
        if isinstance(f, TableRef):
            out.add(f.name)
        else:
            _aliases(f.query, out)
    if q.where is not None:
        for sub in subqueries(q.where):
            _aliases(sub, out)
    return out


class _Rewriter:
    def __init__(self, taken: set, alias: str):
        self.taken = set(taken)
        self.base = alias
        self.counter = count(1)

    def fresh(self) -> str:
        name = self.base
        while name in self.taken:
            name = f"{self.base}{next(self.counter)}"
        self.taken.add(name)
        return name

    def query(self, q: Query) -> Query:
        if isinstance(q, SetOp):
            return SetOp(q.kind, self.query(q.left), self.query(q.right))
        from_ = tuple(SubqueryRef(self.query(f.query), f.alias, f.positional) if isinstance(f, SubqueryRef) else f
                      for f in q.from_)
        where = self.cond(to_annf(q.where)) if q.where is not None else None
        return Select(q.items, from_, where, q.distinct)

    def cond(self, c: Cond) -> Cond:
        if isinstance(c, (And, Or)):
            return type(c)(self.cond(c.left), self.cond(c.right))
        if isinstance(c, Cmp):
            if c.op == EQ:
                return Cmp(c.lhs, EQ2, c.rhs)
            if c.op == NE:
                return Cmp(c.lhs, NE2, c.rhs)
            return c
        if isinstance(c, Exists):
            return Exists(self.query(c.query), c.negated)
        if isinstance(c, In):
            if c.values is not None:
                e = c.lhs[0]
                if c.negated:
                    return and_all(Cmp((e,), NE2, (f,)) for f in c.values)
                return or_all(Cmp((e,), EQ2, (f,)) for f in c.values)
            return self._in_query(c)
        return c

    def _in_query(self, c: In) -> Cond:
        sub = self.query(c.query)
        n = output_arity(sub)
        alias = self.fresh()
        names = output_names(sub)
        # reuse the subquery's column names when they are usable and cannot
        # capture a bare reference on the left-hand side
        named = (all(names) and len(set(names)) == n
                 and not any(isinstance(e, Col) and e.table is None for e in c.lhs))
        cols = [Col(alias, names[k] if named else str(k + 1)) for k in range(n)]
        if c.negated:
            where = and_all(Or(Or(Cmp((e,), EQ2, (v,)), IsNull(e)), IsNull(v)) for e, v in zip(c.lhs, cols))
        else:
            where = and_all(Cmp((e,), EQ2, (v,)) for e, v in zip(c.lhs, cols))
        inner = Select(tuple(SelectItem(v) for v in cols), (SubqueryRef(sub, alias, positional=not named),),
                       where)
        return Exists(inner, c.negated)


def rewrite_2vl(q: Query, catalog=None, *, alias: str = "v") -> Query:
    """Rewrite every WHERE condition into ANNF and replace each atom by its
    2VL encoding.  With a catalog, bare column references are qualified first."""
    if catalog is not None:
        q = qualify(q, catalog)
    return _Rewriter(_aliases(q, set()), alias).query(q)


def rewrite_condition_2vl(c: Cond, taken=(), alias: str = "v") -> Cond:
    return _Rewriter(set(taken), alias).cond(to_annf(c))


__all__ = ["to_annf", "is_annf", "qualify", "rewrite_2vl", "rewrite_condition_2vl"]
