"""Name resolution and the reference evaluator for the SQL fragment.

``exec_sql`` enumerates the FROM product and keeps the rows whose WHERE
condition is true.  With ``logic="3vl"`` conditions follow SQL's
three-valued logic; with ``logic="2vl"`` the condition must already be in
2VL form (``=2vl``, ``!=2vl``, IS [NOT] NULL, [NOT] EXISTS) and is evaluated
classically, null being an ordinary value except that the 2VL comparisons
fail on it.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, Optional, Sequence

from ..instance import InstanceN, Schema
from ..values import NULL, Value
from .ast import (EQ, EQ2, NE, NE2, And, Cmp, Col, Cond, CreateTable, Exists, Expr, In, IsNull, Lit, Not, Or,
                  Query, Select, SetOp, SqlError, SubqueryRef, TableRef, Truth, output_arity, subqueries)


class ResolutionError(SqlError):
    pass


# catalog


@dataclass(frozen=True)
class TableInfo:
    arity: int
    names: Optional[tuple[str, ...]] = None


class Catalog:
    """Table arities and (optional) column names."""

    def __init__(self, tables: Mapping[str, TableInfo] = ()):
        self.tables: dict[str, TableInfo] = dict(tables)

    @classmethod
    def from_schema(cls, schema: Schema) -> "Catalog":
        tables = {}
        for name, rs in schema.relations.items():
            names = rs.column_names()
            tables[name] = TableInfo(rs.arity, tuple(names) if names else None)
        return cls(tables)

    def add_table(self, t: CreateTable) -> None:
        self.tables[t.name] = TableInfo(len(t.columns), tuple(c.name for c in t.columns))

    def __getitem__(self, name: str) -> TableInfo:
        try:
            return self.tables[name]
        except KeyError:
            raise ResolutionError(f"unknown table {name!r}") from None

    def __contains__(self, name) -> bool:
        return name in self.tables


def as_catalog(source) -> Catalog:
    """Accept a :class:`Catalog`, a :class:`Schema`, an instance, or a mapping
    from table names to arities or column-name lists."""
    if isinstance(source, Catalog):
        return source
    if isinstance(source, Schema):
        return Catalog.from_schema(source)
    if hasattr(source, "schema") and isinstance(source.schema, Schema):
        return Catalog.from_schema(source.schema)
    if isinstance(source, Mapping):
        tables = {}
        for name, v in source.items():
            if isinstance(v, int):
                tables[name] = TableInfo(v)
            else:
                tables[name] = TableInfo(len(v), tuple(v))
        return Catalog(tables)
    raise TypeError(f"cannot build a catalog from {type(source).__name__}")


# scopes


@dataclass(frozen=True)
class Binding:
    """A FROM item in scope: its alias, column names (``None`` where unnamed)
    and, for the compiler, the 0-based offset of its first column."""

    alias: str
    names: tuple[Optional[str], ...]
    offset: int = 0

    @property
    def arity(self) -> int:
        return len(self.names)


Frame = tuple[Binding, ...]


def lookup(frames: Sequence[Frame], col: Col) -> tuple[int, int, int]:
    """Resolve a column to ``(frame, binding, position)``, innermost scope first."""
    for fi in range(len(frames) - 1, -1, -1):
        frame = frames[fi]
        if col.table is not None:
            for bi, b in enumerate(frame):
                if b.alias == col.table:
                    return fi, bi, _column_in(b, col)
            continue
        hits = [(bi, b) for bi, b in enumerate(frame) if col.name in b.names]
        if len(hits) > 1:
            raise ResolutionError(f"column {col.name!r} is ambiguous between "
                                  + ", ".join(repr(b.alias) for _, b in hits))
        if hits:
            bi, b = hits[0]
            return fi, bi, _column_in(b, col)
    if col.table is not None:
        raise ResolutionError(f"unknown table or alias {col.table!r} in {col}")
    raise ResolutionError(f"unresolved column {col.name!r}")


def _column_in(b: Binding, col: Col) -> int:
    if col.name.isdigit():
        k = int(col.name)
        if not 1 <= k <= b.arity:
            raise ResolutionError(f"{col}: position out of range 1..{b.arity}")
        return k - 1
    found = [k for k, n in enumerate(b.names) if n == col.name]
    if not found:
        raise ResolutionError(f"{b.alias!r} has no column {col.name!r}")
    if len(found) > 1:
        raise ResolutionError(f"column {col} is ambiguous within {b.alias!r}")
    return found[0]


def output_names(q: Query) -> tuple[Optional[str], ...]:
    if isinstance(q, SetOp):
        return output_names(q.left)
    out = []
    for item in q.items:
        if item.alias is not None:
            out.append(item.alias)
        elif isinstance(item.expr, Col) and not item.expr.name.isdigit():
            out.append(item.expr.name)
        else:
            out.append(None)
    return tuple(out)


def from_binding(f, catalog: Catalog, offset: int = 0) -> Binding:
    if isinstance(f, TableRef):
        info = catalog[f.name]
        names = info.names if info.names is not None else (None,) * info.arity
        return Binding(f.binding, names, offset)
    if f.positional:
        return Binding(f.alias, (None,) * output_arity(f.query), offset)
    return Binding(f.alias, output_names(f.query), offset)


def resolve(q: Query, catalog, frames: Sequence[Frame] = ()) -> None:
    """Check every column reference and arity in ``q``; raise :class:`ResolutionError`."""
    catalog = as_catalog(catalog)
    frames = list(frames)
    if isinstance(q, SetOp):
        resolve(q.left, catalog, frames)
        resolve(q.right, catalog, frames)
        if output_arity(q.left) != output_arity(q.right):
            raise ResolutionError(f"{q.kind} operands have different arity")
        return
    frame = []
    for f in q.from_:
        if isinstance(f, SubqueryRef):
            resolve(f.query, catalog, frames)
        frame.append(from_binding(f, catalog))
    aliases = [b.alias for b in frame]
    if len(set(aliases)) != len(aliases):
        raise ResolutionError("the same alias is bound twice in one FROM clause")
    scope = frames + [tuple(frame)]
    for item in q.items:
        if isinstance(item.expr, Col):
            lookup(scope, item.expr)
    if q.where is not None:
        _resolve_cond(q.where, catalog, scope)


def _resolve_cond(c: Cond, catalog: Catalog, scope) -> None:
    for e in _cond_exprs(c):
        if isinstance(e, Col):
            lookup(scope, e)
    for sub in subqueries(c):
        resolve(sub, catalog, scope)
    for part in _cond_children(c):
        _resolve_cond(part, catalog, scope)


def _cond_children(c: Cond):
    if isinstance(c, (And, Or)):
        return (c.left, c.right)
    if isinstance(c, Not):
        return (c.arg,)
    return ()


def _cond_exprs(c: Cond) -> tuple[Expr, ...]:
    if isinstance(c, Cmp):
        return c.lhs + c.rhs
    if isinstance(c, IsNull):
        return (c.expr,)
    if isinstance(c, In):
        return c.lhs + (c.values or ())
    return ()


# three-valued logic


class Truth3(enum.Enum):
    T = "true"
    F = "false"
    U = "unknown"

    def __and__(self, other: "Truth3") -> "Truth3":
        if self is Truth3.F or other is Truth3.F:
            return Truth3.F
        if self is Truth3.T and other is Truth3.T:
            return Truth3.T
        return Truth3.U

    def __or__(self, other: "Truth3") -> "Truth3":
        if self is Truth3.T or other is Truth3.T:
            return Truth3.T
        if self is Truth3.F and other is Truth3.F:
            return Truth3.F
        return Truth3.U

    def __invert__(self) -> "Truth3":
        return {Truth3.T: Truth3.F, Truth3.F: Truth3.T, Truth3.U: Truth3.U}[self]

    @classmethod
    def of(cls, b: bool) -> "Truth3":
        return cls.T if b else cls.F


T, F, U = Truth3.T, Truth3.F, Truth3.U


def eq3(a: Value, b: Value) -> Truth3:
    if a is NULL or b is NULL:
        return U
    return Truth3.of(a == b)


def tuple_eq3(xs: Sequence[Value], ys: Sequence[Value]) -> Truth3:
    out = T
    for a, b in zip(xs, ys):
        out = out & eq3(a, b)
    return out


def eq2(a: Value, b: Value) -> bool:
    return a is not NULL and b is not NULL and a == b


def ne2(a: Value, b: Value) -> bool:
    return a is not NULL and b is not NULL and a != b


# reference evaluator

_Row = tuple
_Env = list  # list of frames; a frame is a list of (Binding, row)


class _Executor:
    def __init__(self, inst: InstanceN, catalog: Catalog, logic: str):
        if logic not in ("3vl", "2vl"):
            raise ValueError("logic must be '3vl' or '2vl'")
        self.inst = inst
        self.catalog = catalog
        self.logic = logic
        self._cache: dict = {}

    def query(self, q: Query, env: _Env) -> frozenset:
        key = (id(q), tuple(tuple(row for _, row in frame) for frame in env))
        hit = self._cache.get(key)
        if hit is not None:
            return hit[1]
        result = self._query(q, env)
        self._cache[key] = (q, result)  # keep q alive so its id stays unique
        return result

    def _query(self, q: Query, env: _Env) -> frozenset:
        if isinstance(q, SetOp):
            left, right = self.query(q.left, env), self.query(q.right, env)
            if q.kind == "UNION":
                return left | right
            if q.kind == "INTERSECT":
                return left & right
            return left - right
        bindings, rels = [], []
        for f in q.from_:
            bindings.append(from_binding(f, self.catalog))
            if isinstance(f, TableRef):
                rels.append(self.inst[f.name])
            else:
                rels.append(self.query(f.query, env))
        out = set()
        for rows in product(*rels):
            scope = env + [list(zip(bindings, rows))]
            if q.where is None or self.holds(q.where, scope):
                out.add(tuple(self.expr(item.expr, scope) for item in q.items))
        return frozenset(out)

    def expr(self, e: Expr, env: _Env) -> Value:
        if isinstance(e, Lit):
            return e.value
        frames = [tuple(b for b, _ in frame) for frame in env]
        fi, bi, pos = lookup(frames, e)
        return env[fi][bi][1][pos]

    def holds(self, c: Cond, env: _Env) -> bool:
        if self.logic == "3vl":
            return self.cond3(c, env) is T
        return self.cond2(c, env)

    def cond3(self, c: Cond, env: _Env) -> Truth3:
        if isinstance(c, And):
            return self.cond3(c.left, env) & self.cond3(c.right, env)
        if isinstance(c, Or):
            return self.cond3(c.left, env) | self.cond3(c.right, env)
        if isinstance(c, Not):
            return ~self.cond3(c.arg, env)
        if isinstance(c, Truth):
            return Truth3.of(c.value)
        if isinstance(c, Cmp):
            lhs = [self.expr(e, env) for e in c.lhs]
            rhs = [self.expr(e, env) for e in c.rhs]
            if c.op == EQ:
                return tuple_eq3(lhs, rhs)
            if c.op == NE:
                return ~tuple_eq3(lhs, rhs)
            if c.op == EQ2:
                return Truth3.of(all(eq2(a, b) for a, b in zip(lhs, rhs)))
            return Truth3.of(any(ne2(a, b) for a, b in zip(lhs, rhs)))
        if isinstance(c, IsNull):
            return Truth3.of((self.expr(c.expr, env) is NULL) != c.negated)
        if isinstance(c, Exists):
            return Truth3.of(bool(self.query(c.query, env)) != c.negated)
        if isinstance(c, In):
            lhs = [self.expr(e, env) for e in c.lhs]
            if c.values is not None:
                rows = [(self.expr(v, env),) for v in c.values]
            else:
                rows = self.query(c.query, env)
            out = F
            for row in rows:
                out = out | tuple_eq3(lhs, row)
            return ~out if c.negated else out
        raise TypeError(f"not a condition: {c!r}")

    def cond2(self, c: Cond, env: _Env) -> bool:
        if isinstance(c, And):
            return self.cond2(c.left, env) and self.cond2(c.right, env)
        if isinstance(c, Or):
            return self.cond2(c.left, env) or self.cond2(c.right, env)
        if isinstance(c, Not):
            return not self.cond2(c.arg, env)
        if isinstance(c, Truth):
            return c.value
        if isinstance(c, Cmp):
            if c.op not in (EQ2, NE2):
                raise SqlError(f"comparison {c.op!r} has no 2VL meaning; rewrite the query first")
            pairs = [(self.expr(a, env), self.expr(b, env)) for a, b in zip(c.lhs, c.rhs)]
            if c.op == EQ2:
                return all(eq2(a, b) for a, b in pairs)
            return any(ne2(a, b) for a, b in pairs)
        if isinstance(c, IsNull):
            return (self.expr(c.expr, env) is NULL) != c.negated
        if isinstance(c, Exists):
            return bool(self.query(c.query, env)) != c.negated
        raise SqlError(f"{type(c).__name__} has no 2VL meaning; rewrite the query first")


def exec_sql(q: Query, inst: InstanceN, catalog=None, *, logic: str = "3vl") -> frozenset:
    """Evaluate ``q`` directly; returns a set of total tuples."""
    cat = as_catalog(catalog if catalog is not None else inst.schema)
    resolve(q, cat)
    return _Executor(inst, cat, logic).query(q, [])


def eval_3vl(c: Cond, context: Mapping[str, Sequence[Value]], inst: InstanceN, catalog=None,
             columns: Optional[Mapping[str, Iterable[Optional[str]]]] = None) -> Truth3:
    """Truth value of ``c`` when each alias in ``context`` is bound to a row.

    Column names of an alias come from ``columns`` or, failing that, from the
    catalog entry of the table with the same name."""
    cat = as_catalog(catalog if catalog is not None else inst.schema)
    frame = []
    for alias, row in context.items():
        row = tuple(row)
        if columns is not None and alias in columns:
            names = tuple(columns[alias])
        elif alias in cat and cat[alias].names is not None and cat[alias].arity == len(row):
            names = cat[alias].names
        else:
            names = (None,) * len(row)
        if len(names) != len(row):
            raise ResolutionError(f"alias {alias!r}: {len(names)} column names for a row of length {len(row)}")
        frame.append((Binding(alias, names), row))
    return _Executor(inst, cat, "3vl").cond3(c, [frame])


def eval_2vl(c: Cond, context: Mapping[str, Sequence[Value]], inst: InstanceN, catalog=None,
             columns: Optional[Mapping[str, Iterable[Optional[str]]]] = None) -> bool:
    """Classical evaluation of a condition in 2VL form; see :func:`eval_3vl`."""
    cat = as_catalog(catalog if catalog is not None else inst.schema)
    frame = []
    for alias, row in context.items():
        row = tuple(row)
        if columns is not None and alias in columns:
            names = tuple(columns[alias])
        elif alias in cat and cat[alias].names is not None and cat[alias].arity == len(row):
            names = cat[alias].names
        else:
            names = (None,) * len(row)
        frame.append((Binding(alias, names), row))
    return _Executor(inst, cat, "2vl").cond2(c, [frame])


def check_holds(table: str, cond: Cond, inst: InstanceN, catalog=None) -> bool:
    """A CHECK constraint holds iff ``NOT EXISTS (SELECT 'fail' FROM table WHERE NOT cond)``."""
    q = Select((_fail_item(),), (TableRef(table),), Not(cond))
    return not exec_sql(q, inst, catalog)


def check_violations(table: str, cond: Cond, inst: InstanceN, catalog=None) -> list[tuple]:
    """Rows of ``table`` on which a CHECK condition is false (unknown passes)."""
    cat = as_catalog(catalog if catalog is not None else inst.schema)
    info = cat[table]
    names = info.names if info.names is not None else (None,) * info.arity
    ex = _Executor(inst, cat, "3vl")
    b = Binding(table, names)
    return [row for row in inst[table] if ex.cond3(cond, [[(b, row)]]) is F]


def _fail_item():
    from .ast import SelectItem
    return SelectItem(Lit("fail"))


__all__ = [
    "ResolutionError", "TableInfo", "Catalog", "as_catalog", "Binding", "lookup", "output_names",
    "from_binding", "resolve", "Truth3", "T", "F", "U", "eq3", "tuple_eq3", "eq2", "ne2", "exec_sql",
    "eval_3vl", "eval_2vl", "check_holds", "check_violations",
]
