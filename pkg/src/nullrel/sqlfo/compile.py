"""Compile SQL queries to the null-aware algebra.

The query is first rewritten into 2VL form, after which null behaves as an
ordinary value apart from the comparisons, which map directly onto the
algebra's null-failing selections.

Subqueries are compiled relative to a *context*: the algebra expression
producing the rows of all enclosing FROM clauses.  A subquery compiled in a
context of width ``w`` yields the context columns followed by its own
outputs, so correlated references are plain column positions and EXISTS
becomes a projection back onto the context.
"""
from __future__ import annotations

from typing import Optional, Sequence

from ..nra import (CIsNotNull, CIsNull, CNeq, CNeqCols, Diff, Intersect, NraExpr, Product, Project, Relation,
                   Select as NSelect, SelectEqCols, SelectEqConst, Singleton, Union, empty_of)
from ..values import NULL
from .ast import (EQ2, NE2, And, Cmp, Col, Cond, Exists, IsNull, Lit, Or, Query, Select, SetOp, SqlError,
                  SubqueryRef, TableRef, Truth)
from .rewrite import rewrite_2vl
from .semantics import Frame, as_catalog, from_binding, lookup, resolve


def dup_column(e: NraExpr, p: int, width: int) -> NraExpr:
    """Append a copy of column ``p`` to ``e`` (of arity ``width``), nulls included."""
    copy = SelectEqCols(p, width + 1, Product(e, Project((p,), e)))
    return Union(copy, Product(NSelect(CIsNull(p), e), Singleton(NULL)))


class _Compiler:
    def __init__(self, catalog):
        self.catalog = catalog

    def query(self, q: Query, ctx: Optional[NraExpr], frames: list, width: int) -> NraExpr:
        """Columns of the result: ``width`` context columns, then the outputs of ``q``."""
        if isinstance(q, SetOp):
            left = self.query(q.left, ctx, frames, width)
            right = self.query(q.right, ctx, frames, width)
            return {"UNION": Union, "INTERSECT": Intersect, "EXCEPT": Diff}[q.kind](left, right)
        return self.select(q, ctx, frames, width)

    def select(self, q: Select, ctx: Optional[NraExpr], frames: list, w: int) -> NraExpr:
        cur, width = ctx, w
        frame = []
        for f in q.from_:
            b = from_binding(f, self.catalog, offset=width)
            if isinstance(f, TableRef):
                leaf = Relation(f.name)
                cur = leaf if cur is None else Product(cur, leaf)
            elif cur is None:
                cur = self.query(f.query, None, frames, 0)
            else:
                # derived tables see the enclosing scopes, not their FROM siblings
                cur = self.query(f.query, cur, frames, width)
            width += b.arity
            frame.append(b)
        scope = frames + [tuple(frame)]
        if q.where is not None:
            cur = self.filter(q.where, cur, scope, width)
        positions = list(range(1, w + 1))
        for item in q.items:
            if isinstance(item.expr, Lit):
                cur = Product(cur, Singleton(item.expr.value))
                width += 1
                positions.append(width)
            else:
                positions.append(self.position(item.expr, scope))
        seen, final = set(), []
        for p in positions:
            if p in seen:
                cur = dup_column(cur, p, width)
                width += 1
                p = width
            seen.add(p)
            final.append(p)
        return Project(tuple(final), cur)

    def position(self, col: Col, scope: Sequence[Frame]) -> int:
        fi, bi, pos = lookup(scope, col)
        return scope[fi][bi].offset + pos + 1

    def filter(self, c: Cond, e: NraExpr, scope: list, width: int) -> NraExpr:
        if isinstance(c, And):
            return self.filter(c.right, self.filter(c.left, e, scope, width), scope, width)
        if isinstance(c, Or):
            return Union(self.filter(c.left, e, scope, width), self.filter(c.right, e, scope, width))
        if isinstance(c, Truth):
            return e if c.value else empty_of(e)
        if isinstance(c, Cmp):
            if c.op == EQ2:
                for a, b in zip(c.lhs, c.rhs):
                    e = self.eq(a, b, e, scope)
                return e
            if c.op == NE2:
                parts = [self.ne(a, b, e, scope) for a, b in zip(c.lhs, c.rhs)]
                out = parts[0]
                for p in parts[1:]:
                    out = Union(out, p)
                return out
            raise SqlError(f"comparison {c.op!r} must be rewritten to 2VL before compiling")
        if isinstance(c, IsNull):
            if isinstance(c.expr, Lit):
                return e if (c.expr.value is NULL) != c.negated else empty_of(e)
            p = self.position(c.expr, scope)
            return NSelect(CIsNotNull(p) if c.negated else CIsNull(p), e)
        if isinstance(c, Exists):
            sub = self.query(c.query, e, scope, width)
            kept = Project(tuple(range(1, width + 1)), sub)
            return Diff(e, kept) if c.negated else kept
        raise SqlError(f"{type(c).__name__} must be rewritten to 2VL before compiling")

    def eq(self, a, b, e: NraExpr, scope) -> NraExpr:
        if isinstance(a, Lit) and isinstance(b, Lit):
            ok = a.value is not NULL and b.value is not NULL and a.value == b.value
            return e if ok else empty_of(e)
        if isinstance(a, Lit):
            a, b = b, a
        p = self.position(a, scope)
        if isinstance(b, Lit):
            return empty_of(e) if b.value is NULL else SelectEqConst(p, b.value, e)
        return SelectEqCols(p, self.position(b, scope), e)

    def ne(self, a, b, e: NraExpr, scope) -> NraExpr:
        if isinstance(a, Lit) and isinstance(b, Lit):
            ok = a.value is not NULL and b.value is not NULL and a.value != b.value
            return e if ok else empty_of(e)
        if isinstance(a, Lit):
            a, b = b, a
        p = self.position(a, scope)
        if isinstance(b, Lit):
            return empty_of(e) if b.value is NULL else NSelect(CNeq(p, b.value), e)
        return NSelect(CNeqCols(p, self.position(b, scope)), e)


def compile_to_nra(q: Query, schema) -> NraExpr:
    """Translate ``q`` into an equivalent algebra expression.

    ``schema`` may be a :class:`~nullrel.instance.Schema`, an instance, or
    anything :func:`~nullrel.sqlfo.semantics.as_catalog` accepts.  The query
    is rewritten into 2VL form first; queries already in that form pass
    through unchanged.
    """
    cat = as_catalog(schema)
    resolve(q, cat)
    q2 = rewrite_2vl(q, cat)
    return _Compiler(cat).query(q2, None, [], 0)


__all__ = ["compile_to_nra", "dup_column"]
