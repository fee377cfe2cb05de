"""Independent reference implementations used as test oracles.

Each oracle is written straight from the definitions, favouring obviousness
over speed, and shares no evaluation code with the library.
"""
from __future__ import annotations

import itertools
import sqlite3

from nullrel import NULL
from nullrel import fole as F
from nullrel import nra as A
from nullrel.sqlfo import ast as S
from nullrel.sqlfo.semantics import as_catalog, from_binding, lookup

# algebra


def naive_arity(e, schema) -> int:
    if isinstance(e, A.Relation):
        return schema.arity(e.name)
    if isinstance(e, A.Singleton):
        return 1
    if isinstance(e, A.Project):
        return len(e.indices)
    if isinstance(e, A.Product):
        return naive_arity(e.left, schema) + naive_arity(e.right, schema)
    if isinstance(e, A.Join):
        return naive_arity(e.left, schema) + naive_arity(e.right, schema) - len(e.pairs)
    if isinstance(e, (A.Union, A.Diff, A.Intersect)):
        return naive_arity(e.left, schema)
    return naive_arity(e.child, schema)


def _cell_eq(x, y) -> bool:
    return x is not NULL and y is not NULL and x == y


def _cell_ne(x, y) -> bool:
    return x is not NULL and y is not NULL and x != y


def naive_cond(c, row, negate=False) -> bool:
    """Selection conditions: negation is pushed to the atoms and absorbed."""
    if isinstance(c, A.CNot):
        return naive_cond(c.arg, row, not negate)
    if isinstance(c, A.CAnd):
        a, b = naive_cond(c.left, row, negate), naive_cond(c.right, row, negate)
        return (a or b) if negate else (a and b)
    if isinstance(c, A.COr):
        a, b = naive_cond(c.left, row, negate), naive_cond(c.right, row, negate)
        return (a and b) if negate else (a or b)
    if isinstance(c, A.CEq):
        return (_cell_ne if negate else _cell_eq)(row[c.index - 1], c.value)
    if isinstance(c, A.CNeq):
        return (_cell_eq if negate else _cell_ne)(row[c.index - 1], c.value)
    if isinstance(c, A.CEqCols):
        return (_cell_ne if negate else _cell_eq)(row[c.i - 1], row[c.j - 1])
    if isinstance(c, A.CNeqCols):
        return (_cell_eq if negate else _cell_ne)(row[c.i - 1], row[c.j - 1])
    if isinstance(c, A.CIsNull):
        return (row[c.index - 1] is NULL) != negate
    if isinstance(c, A.CIsNotNull):
        return (row[c.index - 1] is not NULL) != negate
    raise TypeError(c)


def naive_nra(e, inst) -> set:
    if isinstance(e, A.Relation):
        return set(inst[e.name])
    if isinstance(e, A.Singleton):
        return {(e.value,)}
    if isinstance(e, A.SelectEqConst):
        return {s for s in naive_nra(e.child, inst) if _cell_eq(s[e.index - 1], e.value)}
    if isinstance(e, A.SelectEqCols):
        return {s for s in naive_nra(e.child, inst) if _cell_eq(s[e.i - 1], s[e.j - 1])}
    if isinstance(e, A.Select):
        return {s for s in naive_nra(e.child, inst) if naive_cond(e.cond, s)}
    if isinstance(e, A.Project):
        return {tuple(s[i - 1] for i in e.indices) for s in naive_nra(e.child, inst)}
    if isinstance(e, A.Join):
        left, right = naive_nra(e.left, inst), naive_nra(e.right, inst)
        drop = {k for _, k in e.pairs}
        width = naive_arity(e.right, inst.schema)
        out = set()
        for a in left:
            matched = False
            for b in right:
                if all(_cell_eq(a[i - 1], b[k - 1]) for i, k in e.pairs):
                    matched = True
                    out.add(a + tuple(b[k] for k in range(width) if k + 1 not in drop))
            if not matched and isinstance(e, A.LeftOuterJoin):
                out.add(a + (NULL,) * (width - len(drop)))
        return out
    left, right = naive_nra(e.left, inst), naive_nra(e.right, inst)
    if isinstance(e, A.Product):
        return {a + b for a in left for b in right}
    if isinstance(e, A.Union):
        return left | right
    if isinstance(e, A.Diff):
        return left - right
    if isinstance(e, A.Intersect):
        return left & right
    raise TypeError(e)


# calculus over total tuples


def _val(t, env):
    if isinstance(t, F.Var):
        return env[t.name]
    if isinstance(t, F.Const):
        return t.value
    return NULL


def naive_fole(f, inst, env, domain) -> bool:
    """Satisfaction with rows read as total tuples: a null term matches a null
    cell and any other term matches an equal non-null cell."""
    if isinstance(f, F.Atom):
        want = tuple(_val(t, env) for t in f.terms)
        return any(all((w is NULL and c is NULL) or (w is not NULL and c is not NULL and w == c)
                       for w, c in zip(want, row))
                   for row in inst[f.pred])
    if isinstance(f, F.Eq):
        return _val(f.left, env) == _val(f.right, env)
    if isinstance(f, F.Bool):
        return f.value
    if isinstance(f, F.Not):
        return not naive_fole(f.arg, inst, env, domain)
    if isinstance(f, F.And):
        return naive_fole(f.left, inst, env, domain) and naive_fole(f.right, inst, env, domain)
    if isinstance(f, F.Or):
        return naive_fole(f.left, inst, env, domain) or naive_fole(f.right, inst, env, domain)
    if isinstance(f, F.Exists):
        return any(naive_fole(f.body, inst, {**env, f.var: d}, domain) for d in domain)
    if isinstance(f, F.Forall):
        return all(naive_fole(f.body, inst, {**env, f.var: d}, domain) for d in domain)
    raise TypeError(f)


def fole_domain(inst, f, env=None) -> list:
    vals = {v for rows in inst.relations().values() for r in rows for v in r if v is not NULL}
    vals |= F.constants(f) | set(inst.schema.constants)
    if env:
        vals |= set(env.values())
    # quantifiers never range over an empty set
    return sorted(vals, key=repr) or ["_"]


def naive_answers(f, inst) -> set:
    names = F.free_vars(f)
    dom = fole_domain(inst, f)
    return {vals for vals in itertools.product(dom, repeat=len(names))
            if naive_fole(f, inst, dict(zip(names, vals)), dom)}


# three-valued logic, written out as tables

KLEENE_AND = {
    ("T", "T"): "T", ("T", "F"): "F", ("T", "U"): "U",
    ("F", "T"): "F", ("F", "F"): "F", ("F", "U"): "F",
    ("U", "T"): "U", ("U", "F"): "F", ("U", "U"): "U",
}
KLEENE_OR = {
    ("T", "T"): "T", ("T", "F"): "T", ("T", "U"): "T",
    ("F", "T"): "T", ("F", "F"): "F", ("F", "U"): "U",
    ("U", "T"): "T", ("U", "F"): "U", ("U", "U"): "U",
}
KLEENE_NOT = {"T": "F", "F": "T", "U": "U"}


# SQL through sqlite3


class _Renderer:
    """Print a resolved query as SQLite text.

    Base tables are created with columns ``k1..kn`` and every select item is
    aliased ``o1..om``, so column references can be printed positionally
    whatever names the query used.
    """

    def __init__(self, catalog):
        self.catalog = catalog

    def query(self, q, frames) -> str:
        if isinstance(q, S.SetOp):
            right = self.query(q.right, frames)
            if isinstance(q.right, S.SetOp):
                right = f"SELECT * FROM ({right})"
            return f"{self.query(q.left, frames)} {q.kind} {right}"
        parts, frame = [], []
        for f in q.from_:
            b = from_binding(f, self.catalog)
            if isinstance(f, S.TableRef):
                parts.append(f"{f.name} AS {b.alias}")
                frame.append((b, "k"))
            else:
                parts.append(f"({self.query(f.query, frames)}) AS {b.alias}")
                frame.append((b, "o"))
        scope = frames + [tuple(frame)]
        items = ", ".join(f"{self.expr(i.expr, scope)} AS o{k + 1}" for k, i in enumerate(q.items))
        text = f"SELECT DISTINCT {items} FROM {', '.join(parts)}"
        if q.where is not None:
            text += f" WHERE {self.cond(q.where, scope)}"
        return text

    def expr(self, e, scope) -> str:
        if isinstance(e, S.Lit):
            if e.value is NULL:
                return "NULL"
            if isinstance(e.value, int):
                return str(e.value)
            return "'" + e.value.replace("'", "''") + "'"
        fi, bi, pos = lookup([tuple(b for b, _ in fr) for fr in scope], e)
        b, prefix = scope[fi][bi]
        return f"{b.alias}.{prefix}{pos + 1}"

    def exprs(self, es, scope) -> str:
        if len(es) == 1:
            return self.expr(es[0], scope)
        return "(" + ", ".join(self.expr(x, scope) for x in es) + ")"

    def cond(self, c, scope) -> str:
        if isinstance(c, S.And):
            return f"({self.cond(c.left, scope)} AND {self.cond(c.right, scope)})"
        if isinstance(c, S.Or):
            return f"({self.cond(c.left, scope)} OR {self.cond(c.right, scope)})"
        if isinstance(c, S.Not):
            return f"(NOT {self.cond(c.arg, scope)})"
        if isinstance(c, S.Truth):
            return "(1 = 1)" if c.value else "(1 = 0)"
        if isinstance(c, S.Cmp) and c.op in (S.EQ2, S.NE2):
            # two-valued comparisons: unknown counts as false, per component
            op, glue = ("=", " AND ") if c.op == S.EQ2 else ("<>", " OR ")
            parts = [f"COALESCE({self.expr(a, scope)} {op} {self.expr(b, scope)}, 0) = 1"
                     for a, b in zip(c.lhs, c.rhs)]
            return "(" + glue.join(parts) + ")"
        if isinstance(c, S.Cmp):
            op = {S.EQ: "=", S.NE: "<>"}[c.op]
            return f"({self.exprs(c.lhs, scope)} {op} {self.exprs(c.rhs, scope)})"
        if isinstance(c, S.IsNull):
            return f"({self.expr(c.expr, scope)} IS {'NOT ' if c.negated else ''}NULL)"
        if isinstance(c, S.Exists):
            return f"({'NOT ' if c.negated else ''}EXISTS ({self.query(c.query, scope)}))"
        if isinstance(c, S.In):
            neg = "NOT " if c.negated else ""
            if c.query is not None:
                return f"({self.exprs(c.lhs, scope)} {neg}IN ({self.query(c.query, scope)}))"
            vals = ", ".join(self.expr(v, scope) for v in c.values)
            return f"({self.exprs(c.lhs, scope)} {neg}IN ({vals}))"
        raise TypeError(c)


def to_sqlite(q, catalog) -> str:
    return _Renderer(as_catalog(catalog)).query(q, [])


def sqlite_exec(q, inst) -> frozenset:
    """Run ``q`` on SQLite over a copy of ``inst`` (untyped columns)."""
    cat = as_catalog(inst.schema)
    con = sqlite3.connect(":memory:")
    try:
        for name, info in cat.tables.items():
            cols = ", ".join(f"k{i + 1}" for i in range(info.arity))
            con.execute(f"CREATE TABLE {name} ({cols})")
            marks = ", ".join("?" * info.arity)
            rows = [tuple(None if v is NULL else v for v in r) for r in inst[name]]
            con.executemany(f"INSERT INTO {name} VALUES ({marks})", rows)
        got = con.execute(to_sqlite(q, cat)).fetchall()
    finally:
        con.close()
    return frozenset(tuple(NULL if v is None else v for v in r) for r in got)
