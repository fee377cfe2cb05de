"""Seeded random generators for instances, expressions, formulas and queries."""
from __future__ import annotations

import random
from itertools import count

from nullrel import NULL, InstanceN, Schema
from nullrel import fole as F
from nullrel import nra as A
from nullrel.instance import Column, RelationSchema
from nullrel.sqlfo import ast as S
from nullrel.sqlfo.semantics import output_names

VALUES = ("a", "b", 1)
SCHEMA = Schema.of(r=2, s=1)
SQL_TABLES = {"r": ("c1", "c2"), "s": ("d1", "d2")}
SQL_SCHEMA = Schema({name: RelationSchema(len(cols), tuple(Column(c) for c in cols))
                     for name, cols in SQL_TABLES.items()})


def rng_of(seed) -> random.Random:
    # string seeds are hashed deterministically, whatever PYTHONHASHSEED says
    return random.Random(repr(seed))


def value(rng, null_p=0.3):
    return NULL if rng.random() < null_p else rng.choice(VALUES)


def instance(rng, schema=SCHEMA, max_rows=4, null_p=0.3) -> InstanceN:
    rels = {}
    for name, rs in schema.relations.items():
        n = rng.randint(0, max_rows)
        rels[name] = {tuple(value(rng, null_p) for _ in range(rs.arity)) for _ in range(n)}
    return InstanceN(schema, rels)


def row(rng, arity, null_p=0.3) -> tuple:
    return tuple(value(rng, null_p) for _ in range(arity))


# algebra


def _cond(rng, n, depth=2):
    roll = rng.random()
    if depth > 0 and roll < 0.3:
        cls = rng.choice([A.CAnd, A.COr])
        return cls(_cond(rng, n, depth - 1), _cond(rng, n, depth - 1))
    if depth > 0 and roll < 0.4:
        return A.CNot(_cond(rng, n, depth - 1))
    i = rng.randint(1, n)
    kind = rng.randrange(6)
    if kind == 0:
        return A.CEq(i, value(rng, 0.1))
    if kind == 1:
        return A.CNeq(i, value(rng, 0.1))
    if kind == 2:
        return A.CEqCols(i, rng.randint(1, n))
    if kind == 3:
        return A.CNeqCols(i, rng.randint(1, n))
    if kind == 4:
        return A.CIsNull(i)
    return A.CIsNotNull(i)


def _fit(rng, e, n, k):
    """Reshape ``e`` of arity ``n`` to arity ``k``."""
    if n == k:
        return e
    if n > k:
        return A.Project(tuple(sorted(rng.sample(range(1, n + 1), k))), e)
    for _ in range(k - n):
        e = A.Product(e, A.Singleton(value(rng, 0.3)))
    return e


def nra(rng, schema=SCHEMA, depth=4, derived=True, max_arity=4):
    """Return ``(expr, arity)``."""
    if depth <= 0 or rng.random() < 0.2:
        if rng.random() < 0.8:
            name = rng.choice(sorted(schema.relations))
            return A.Relation(name), schema.arity(name)
        return A.Singleton(value(rng, 0.3)), 1
    kinds = ["eqc", "eqcols", "proj", "prod", "union", "diff"]
    if derived:
        kinds += ["sel", "sel", "inter", "join", "louter"]
    kind = rng.choice(kinds)
    e, n = nra(rng, schema, depth - 1, derived, max_arity)
    if kind == "eqc" and n:
        return A.SelectEqConst(rng.randint(1, n), rng.choice(VALUES), e), n
    if kind == "eqcols" and n:
        return A.SelectEqCols(rng.randint(1, n), rng.randint(1, n), e), n
    if kind == "sel" and n:
        return A.Select(_cond(rng, n), e), n
    if kind == "proj":
        k = rng.randint(0 if rng.random() < 0.1 else min(1, n), n)
        return A.Project(tuple(rng.sample(range(1, n + 1), k)), e), k
    f, m = nra(rng, schema, depth - 1, derived, max_arity)
    if kind == "prod" and n + m <= max_arity:
        return A.Product(e, f), n + m
    if kind in ("union", "diff", "inter"):
        cls = {"union": A.Union, "diff": A.Diff, "inter": A.Intersect}[kind]
        return cls(e, _fit(rng, f, m, n)), n
    if kind in ("join", "louter") and n and m and n + m - 1 <= max_arity:
        cls = A.Join if kind == "join" else A.LeftOuterJoin
        pairs = ((rng.randint(1, n), rng.randint(1, m)),)
        return cls(pairs, e, f), n + m - 1
    return e, n


# calculus

PREDS = {"r": 2, "s": 1}
VARS = ("x", "y", "z")


def _term(rng, names, null_ok):
    roll = rng.random()
    if null_ok and roll < 0.2:
        return F.N
    if roll < 0.35 or not names:
        return F.Const(rng.choice(VALUES))
    return F.Var(rng.choice(names))


def _atom(rng, names, must=()):
    pred = rng.choice([p for p, n in PREDS.items() if n >= len(must)] or sorted(PREDS))
    n = PREDS[pred]
    terms = [_term(rng, names, True) for _ in range(n)]
    slots = rng.sample(range(n), min(len(must), n))
    for slot, v in zip(slots, must):
        terms[slot] = F.Var(v)
    return F.Atom(pred, tuple(terms))


def fole(rng, names=VARS, depth=3) -> F.Formula:
    """Arbitrary formula over ``PREDS`` with free variables drawn from ``names``."""
    names = list(names)
    roll = rng.random()
    if depth <= 0 or roll < 0.25:
        if names and rng.random() < 0.15:
            return F.Eq(F.Var(rng.choice(names)), _term(rng, names, False))
        return _atom(rng, names)
    if roll < 0.4:
        return F.Not(fole(rng, names, depth - 1))
    if roll < 0.7:
        cls = rng.choice([F.And, F.Or])
        return cls(fole(rng, names, depth - 1), fole(rng, names, depth - 1))
    v = rng.choice(VARS)
    cls = F.Exists if rng.random() < 0.7 else F.Forall
    return cls(v, fole(rng, sorted(set(names) | {v}), depth - 1))


def _safe(rng, free, depth):
    """Formula in which every variable of ``free`` is range-restricted."""
    free = list(free)
    roll = rng.random()
    if depth <= 0 or roll < 0.3:
        if len(free) <= 2:
            return _atom(rng, free, must=free)
        return F.And(_atom(rng, free, must=free[:2]), _safe(rng, free[2:] + free[:1], 0))
    if roll < 0.55:
        side = rng.random()
        if side < 0.4 and free:
            sub = rng.sample(free, rng.randint(0, len(free)))
            guard = F.Not(_safe(rng, sub, depth - 1))
        elif side < 0.7 and free:
            guard = F.Eq(F.Var(rng.choice(free)), _term(rng, free, False))
        else:
            guard = _safe(rng, rng.sample(free, rng.randint(0, len(free))), depth - 1)
        return F.And(_safe(rng, free, depth - 1), guard)
    if roll < 0.7:
        return F.Or(_safe(rng, free, depth - 1), _safe(rng, free, depth - 1))
    if roll < 0.9 or not free:
        v = next(x for x in VARS + ("u", "w") if x not in free)
        return F.Exists(v, _safe(rng, free + [v], depth - 1))
    v = next(x for x in VARS + ("u", "w") if x not in free)
    body = F.Or(F.Not(_safe(rng, free + [v], depth - 1)), _safe(rng, [v], depth - 1))
    return F.And(_safe(rng, free, 0), F.Forall(v, body))


def safe_formula(rng, free=(), depth=3, tries=200) -> F.Formula:
    """Safe-range formula with exactly the free variables ``free``."""
    for _ in range(tries):
        f = _safe(rng, list(free), depth)
        if rng.random() < 0.2 and not free:
            f = F.Not(f)
        if F.is_safe_range(f) and set(F.free_vars(f)) == set(free):
            return f
    raise RuntimeError("no safe-range formula generated")


# SQL


class SqlGen:
    """Random queries over ``SQL_TABLES`` with unique aliases.

    ``frames`` lists the enclosing scopes, innermost last; each scope holds
    ``(alias, column_names)`` pairs.
    """

    def __init__(self, rng, max_depth=3, tables=SQL_TABLES):
        self.rng = rng
        self.max_depth = max_depth
        self.tables = tables
        self.ids = count()

    def query(self, frames=(), depth=1, arity=None) -> S.Query:
        rng = self.rng
        arity = arity or rng.choice([1, 1, 2])
        q = self.select(list(frames), depth, arity)
        while rng.random() < 0.15:
            kind = rng.choice(["UNION", "INTERSECT", "EXCEPT"])
            q = S.SetOp(kind, q, self.select(list(frames), depth, arity))
        return q

    def select(self, frames, depth, arity) -> S.Select:
        rng = self.rng
        from_, frame = [], []
        for _ in range(1 if rng.random() < 0.6 else 2):
            if depth < self.max_depth and rng.random() < 0.15:
                alias = f"d{next(self.ids)}"
                sub = self.query(frames, depth + 1, rng.choice([1, 2]))
                from_.append(S.SubqueryRef(sub, alias))
                frame.append((alias, output_names(sub)))
            else:
                name = rng.choice(sorted(self.tables))
                alias = f"t{next(self.ids)}"
                from_.append(S.TableRef(name, alias))
                frame.append((alias, self.tables[name]))
        scope = frames + [frame]
        items = []
        for k in range(arity):
            e = self.expr(scope, inner=0.85, lit=0.1)
            alias = f"o{k + 1}" if rng.random() < 0.3 else None
            items.append(S.SelectItem(e, alias))
        where = self.cond(scope, depth, 3) if rng.random() < 0.85 else None
        return S.Select(tuple(items), tuple(from_), where)

    def literal(self):
        return S.Lit(value(self.rng, 0.15))

    def expr(self, scope, inner=0.7, lit=0.25):
        rng = self.rng
        if rng.random() < lit:
            return self.literal()
        fi = len(scope) - 1
        if fi > 0 and rng.random() > inner:
            fi = rng.randrange(fi)
        alias, names = rng.choice(scope[fi])
        k = rng.randrange(len(names))
        name = names[k]
        if name is None or names.count(name) > 1 or rng.random() < 0.2:
            return S.Col(alias, str(k + 1))
        if rng.random() < 0.4 and self._bare_ok(scope, fi, name):
            return S.Col(None, name)
        return S.Col(alias, name)

    @staticmethod
    def _bare_ok(scope, fi, name) -> bool:
        if any(name in names for frame in scope[fi + 1:] for _, names in frame):
            return False
        return sum(name in names for _, names in scope[fi]) == 1

    def cond(self, scope, depth, budget) -> S.Cond:
        rng = self.rng
        roll = rng.random()
        if budget > 0 and roll < 0.3:
            cls = rng.choice([S.And, S.Or])
            return cls(self.cond(scope, depth, budget - 1), self.cond(scope, depth, budget - 1))
        if budget > 0 and roll < 0.42:
            return S.Not(self.cond(scope, depth, budget - 1))
        return self.atom(scope, depth)

    def atom(self, scope, depth) -> S.Cond:
        rng = self.rng
        nested = depth < self.max_depth
        kind = rng.choice(["cmp", "cmp", "cmp", "tuple", "isnull", "invals"]
                          + (["exists", "exists", "insub", "insub"] if nested else []))
        if kind == "cmp":
            return S.Cmp((self.expr(scope, lit=0),), rng.choice([S.EQ, S.NE]), (self.expr(scope),))
        if kind == "tuple":
            lhs = (self.expr(scope, lit=0), self.expr(scope, lit=0))
            return S.Cmp(lhs, rng.choice([S.EQ, S.NE]), (self.expr(scope), self.expr(scope)))
        if kind == "isnull":
            return S.IsNull(self.expr(scope, lit=0.05), rng.random() < 0.5)
        if kind == "invals":
            vals = tuple(self.expr(scope, lit=0.7) for _ in range(rng.randint(1, 3)))
            return S.In((self.expr(scope, lit=0),), None, vals, rng.random() < 0.5)
        if kind == "exists":
            return S.Exists(self.query(scope, depth + 1), rng.random() < 0.5)
        n = rng.choice([1, 1, 2])
        lhs = tuple(self.expr(scope, lit=0.1) for _ in range(n))
        return S.In(lhs, self.query(scope, depth + 1, n), None, rng.random() < 0.5)


def sql_query(rng, max_depth=3) -> S.Query:
    return SqlGen(rng, max_depth).query()


def where_condition(rng, max_depth=2, budget=4):
    """Condition over a single row bound to alias ``t`` of table ``r``."""
    g = SqlGen(rng, max_depth)
    return g.cond([[("t", SQL_TABLES["r"])]], 1, budget)
