"""Syntax trees for the first-order SQL fragment, plus a printer."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from ..values import NULL, Value, quote


class SqlError(ValueError):
    pass


# expressions


@dataclass(frozen=True)
class Col:
    """``table.column`` or a bare ``column``; ``name`` may be a position like ``"2"``."""

    table: Optional[str]
    name: str

    def __str__(self):
        return f"{self.table}.{self.name}" if self.table else self.name


@dataclass(frozen=True)
class Lit:
    value: Value

    def __str__(self):
        return quote(self.value)


Expr = Union[Col, Lit]


# conditions


class Cond:
    __slots__ = ()

    def __str__(self):
        return cond_to_sql(self)


EQ, NE, EQ2, NE2 = "=", "!=", "=2vl", "!=2vl"


@dataclass(frozen=True)
class Cmp(Cond):
    """Tuple comparison; ``op`` is one of ``=``, ``!=``, ``=2vl``, ``!=2vl``."""

    lhs: tuple[Expr, ...]
    op: str
    rhs: tuple[Expr, ...]

    def __post_init__(self):
        if self.op not in (EQ, NE, EQ2, NE2):
            raise SqlError(f"unknown comparison {self.op!r}")
        if len(self.lhs) != len(self.rhs) or not self.lhs:
            raise SqlError(f"comparison between tuples of different arity ({len(self.lhs)} vs {len(self.rhs)})")


@dataclass(frozen=True)
class IsNull(Cond):
    expr: Expr
    negated: bool = False


@dataclass(frozen=True)
class Exists(Cond):
    query: "Query"
    negated: bool = False


@dataclass(frozen=True)
class In(Cond):
    """``lhs [NOT] IN (query)`` or ``lhs [NOT] IN (e1, ..., en)``."""

    lhs: tuple[Expr, ...]
    query: Optional["Query"] = None
    values: Optional[tuple[Expr, ...]] = None
    negated: bool = False

    def __post_init__(self):
        if (self.query is None) == (self.values is None):
            raise SqlError("IN needs either a subquery or a value list")
        if self.values is not None and len(self.lhs) != 1:
            raise SqlError("IN with a value list is only supported for a single expression")


@dataclass(frozen=True)
class Not(Cond):
    arg: Cond


@dataclass(frozen=True)
class And(Cond):
    left: Cond
    right: Cond


@dataclass(frozen=True)
class Or(Cond):
    left: Cond
    right: Cond


@dataclass(frozen=True)
class Truth(Cond):
    value: bool


def and_all(cs) -> Cond:
    cs = list(cs)
    out = cs[0]
    for c in cs[1:]:
        out = And(out, c)
    return out


def or_all(cs) -> Cond:
    cs = list(cs)
    out = cs[0]
    for c in cs[1:]:
        out = Or(out, c)
    return out


# queries


class Query:
    __slots__ = ()

    def __str__(self):
        return to_sql(self)


@dataclass(frozen=True)
class SelectItem:
    expr: Expr
    alias: Optional[str] = None


@dataclass(frozen=True)
class TableRef:
    name: str
    alias: Optional[str] = None

    @property
    def binding(self) -> str:
        return self.alias or self.name


@dataclass(frozen=True)
class SubqueryRef:
    """A derived table.  ``positional`` hides the subquery's column names so
    that only ``alias.1``-style references reach it."""

    query: "Query"
    alias: str
    positional: bool = False

    @property
    def binding(self) -> str:
        return self.alias


FromItem = Union[TableRef, SubqueryRef]


@dataclass(frozen=True)
class Select(Query):
    items: tuple[SelectItem, ...]
    from_: tuple[FromItem, ...]
    where: Optional[Cond] = None
    distinct: bool = True

    def __post_init__(self):
        if not self.items:
            raise SqlError("SELECT needs at least one column")
        if not self.from_:
            raise SqlError("SELECT needs a FROM clause")


@dataclass(frozen=True)
class SetOp(Query):
    kind: str  # UNION, INTERSECT, EXCEPT
    left: Query
    right: Query


@dataclass(frozen=True)
class ColumnDef:
    name: str
    type: str  # "text" or "int"
    not_null: bool = False


@dataclass(frozen=True)
class TableConstraint:
    """``kind`` is CHECK, UNIQUE, PRIMARY KEY or FOREIGN KEY."""

    kind: str
    name: Optional[str] = None
    cond: Optional[Cond] = None
    columns: tuple[str, ...] = ()
    ref_table: Optional[str] = None
    ref_columns: tuple[str, ...] = ()


@dataclass(frozen=True)
class CreateTable:
    name: str
    columns: tuple[ColumnDef, ...]
    constraints: tuple[TableConstraint, ...] = field(default_factory=tuple)

    def __str__(self):
        return create_to_sql(self)


def output_arity(q: Query) -> int:
    if isinstance(q, Select):
        return len(q.items)
    return output_arity(q.left)


# traversal


def subqueries(c: Cond) -> Iterator[Query]:
    if isinstance(c, (And, Or)):
        yield from subqueries(c.left)
        yield from subqueries(c.right)
    elif isinstance(c, Not):
        yield from subqueries(c.arg)
    elif isinstance(c, Exists):
        yield c.query
    elif isinstance(c, In) and c.query is not None:
        yield c.query


def cond_size(c: Cond) -> int:
    """Node count of a condition, not descending into subqueries."""
    if isinstance(c, (And, Or)):
        return 1 + cond_size(c.left) + cond_size(c.right)
    if isinstance(c, Not):
        return 1 + cond_size(c.arg)
    return 1


def nesting_depth(q: Query) -> int:
    if isinstance(q, SetOp):
        return max(nesting_depth(q.left), nesting_depth(q.right))
    inner = [nesting_depth(f.query) for f in q.from_ if isinstance(f, SubqueryRef)]
    if q.where is not None:
        inner += [nesting_depth(s) for s in subqueries(q.where)]
    return 1 + max(inner, default=0)


# printing


def _tuple(es) -> str:
    if len(es) == 1:
        return str(es[0])
    return "(" + ", ".join(map(str, es)) + ")"


def _prec(c: Cond) -> int:
    if isinstance(c, Or):
        return 1
    if isinstance(c, And):
        return 2
    if isinstance(c, Not):
        return 3
    return 4


def cond_to_sql(c: Cond, ctx: int = 0) -> str:
    if isinstance(c, Cmp):
        text = f"{_tuple(c.lhs)} {c.op} {_tuple(c.rhs)}"
    elif isinstance(c, IsNull):
        text = f"{c.expr} IS {'NOT ' if c.negated else ''}NULL"
    elif isinstance(c, Exists):
        text = f"{'NOT ' if c.negated else ''}EXISTS ({to_sql(c.query)})"
    elif isinstance(c, In):
        inner = to_sql(c.query) if c.query is not None else ", ".join(map(str, c.values))
        text = f"{_tuple(c.lhs)} {'NOT ' if c.negated else ''}IN ({inner})"
    elif isinstance(c, Truth):
        text = "TRUE" if c.value else "FALSE"
    elif isinstance(c, Not):
        text = "NOT " + cond_to_sql(c.arg, 3)
    elif isinstance(c, And):
        text = f"{cond_to_sql(c.left, 2)} AND {cond_to_sql(c.right, 3)}"
    elif isinstance(c, Or):
        text = f"{cond_to_sql(c.left, 1)} OR {cond_to_sql(c.right, 2)}"
    else:
        raise TypeError(f"not a condition: {c!r}")
    return f"({text})" if _prec(c) < ctx else text


def _from_item(f: FromItem) -> str:
    if isinstance(f, TableRef):
        return f"{f.name} AS {f.alias}" if f.alias else f.name
    return f"({to_sql(f.query)}) AS {f.alias}"


def to_sql(q: Query) -> str:
    if isinstance(q, SetOp):
        left = to_sql(q.left)
        right = to_sql(q.right)
        if isinstance(q.right, SetOp):
            right = f"({right})"
        # INTERSECT binds tighter, so a UNION or EXCEPT beneath it needs brackets
        if q.kind == "INTERSECT" and isinstance(q.left, SetOp) and q.left.kind != "INTERSECT":
            left = f"({left})"
        return f"{left} {q.kind} {right}"
    items = ", ".join(f"{i.expr} AS {i.alias}" if i.alias else str(i.expr) for i in q.items)
    text = f"SELECT {'DISTINCT ' if q.distinct else ''}{items} FROM {', '.join(map(_from_item, q.from_))}"
    if q.where is not None:
        text += f" WHERE {cond_to_sql(q.where)}"
    return text


def create_to_sql(t: CreateTable) -> str:
    parts = [f"{c.name} {'INTEGER' if c.type == 'int' else 'TEXT'}{' NOT NULL' if c.not_null else ''}"
             for c in t.columns]
    for k in t.constraints:
        head = f"CONSTRAINT {k.name} " if k.name else ""
        if k.kind == "CHECK":
            parts.append(f"{head}CHECK ({cond_to_sql(k.cond)})")
        elif k.kind == "FOREIGN KEY":
            parts.append(f"{head}FOREIGN KEY ({', '.join(k.columns)}) REFERENCES {k.ref_table} "
                         f"({', '.join(k.ref_columns)})")
        else:
            parts.append(f"{head}{k.kind} ({', '.join(k.columns)})")
    return f"CREATE TABLE {t.name} ({', '.join(parts)})"


__all__ = [
    "SqlError", "Col", "Lit", "Expr", "Cond", "Cmp", "IsNull", "Exists", "In", "Not", "And", "Or", "Truth",
    "EQ", "NE", "EQ2", "NE2", "and_all", "or_all", "Query", "SelectItem", "TableRef", "SubqueryRef", "Select",
    "SetOp", "ColumnDef", "TableConstraint", "CreateTable", "output_arity", "subqueries", "cond_size",
    "nesting_depth", "cond_to_sql", "to_sql", "create_to_sql", "NULL",
]
