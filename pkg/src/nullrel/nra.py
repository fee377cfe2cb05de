"""Relational algebra with SQL nulls.

Core operators: relation, singleton, ``σ_{i=v}``, ``σ_{i=j}``, projection,
product, union and difference.  Equality in selections fails whenever one of
the compared cells is null.  Everything else (intersection, inequalities,
null tests, boolean conditions, joins, left outer join) is a derived operator
that :func:`expand_derived` rewrites into the core.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Optional
from typing import Union as OneOf

from .instance import InstanceDecomposed, InstanceN, Schema
from .lexer import ParseError, TokenStream, unquote
from .values import NULL, Value, check_value, quote


class ArityError(ValueError):
    pass


class NraExpr:
    __slots__ = ()

    def children(self) -> tuple["NraExpr", ...]:
        return ()

    def __str__(self) -> str:
        return to_text(self)


# core


@dataclass(frozen=True)
class Relation(NraExpr):
    name: str


@dataclass(frozen=True)
class DecompRelation(NraExpr):
    """Leaf ``R~A`` of an expression over the decomposed signature."""

    name: str
    positions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(sorted(self.positions)))


@dataclass(frozen=True)
class Singleton(NraExpr):
    """``⟨v⟩``; ``value`` may be ``NULL``."""

    value: Value

    def __post_init__(self):
        check_value(self.value)


@dataclass(frozen=True)
class SelectEqConst(NraExpr):
    index: int
    value: Value
    child: NraExpr

    def __post_init__(self):
        check_value(self.value, allow_null=False)

    def children(self):
        return (self.child,)


@dataclass(frozen=True)
class SelectEqCols(NraExpr):
    i: int
    j: int
    child: NraExpr

    def children(self):
        return (self.child,)


@dataclass(frozen=True)
class Project(NraExpr):
    indices: tuple[int, ...]
    child: NraExpr

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(self.indices))

    def children(self):
        return (self.child,)


@dataclass(frozen=True)
class _Binary(NraExpr):
    left: NraExpr
    right: NraExpr

    def children(self):
        return (self.left, self.right)


class Product(_Binary):
    pass


class Union(_Binary):
    pass


class Diff(_Binary):
    pass


# derived


class Intersect(_Binary):
    pass


class Cond:
    __slots__ = ()


@dataclass(frozen=True)
class CEq(Cond):
    """``i = v``; ``v`` may be ``NULL`` (then never true)."""

    index: int
    value: Value


@dataclass(frozen=True)
class CNeq(Cond):
    index: int
    value: Value


@dataclass(frozen=True)
class CEqCols(Cond):
    i: int
    j: int


@dataclass(frozen=True)
class CNeqCols(Cond):
    i: int
    j: int


@dataclass(frozen=True)
class CIsNull(Cond):
    index: int


@dataclass(frozen=True)
class CIsNotNull(Cond):
    index: int


@dataclass(frozen=True)
class CAnd(Cond):
    left: Cond
    right: Cond


@dataclass(frozen=True)
class COr(Cond):
    left: Cond
    right: Cond


@dataclass(frozen=True)
class CNot(Cond):
    arg: Cond


@dataclass(frozen=True)
class Select(NraExpr):
    cond: Cond
    child: NraExpr

    def children(self):
        return (self.child,)


@dataclass(frozen=True)
class Join(NraExpr):
    """Equi-join; ``pairs`` holds ``(i, k)`` with ``i`` from the left, ``k`` from the right."""

    pairs: tuple[tuple[int, int], ...]
    left: NraExpr
    right: NraExpr

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class LeftOuterJoin(Join):
    pass


CORE_TYPES = (Relation, DecompRelation, Singleton, SelectEqConst, SelectEqCols, Project, Product, Union, Diff)


def select(cond: Cond, child: NraExpr) -> NraExpr:
    """Build a selection, using the core node when the condition is a plain equality."""
    if isinstance(cond, CEq) and cond.value is not NULL:
        return SelectEqConst(cond.index, cond.value, child)
    if isinstance(cond, CEqCols):
        return SelectEqCols(cond.i, cond.j, child)
    return Select(cond, child)


def is_null(index: int, child: NraExpr) -> NraExpr:
    return Select(CIsNull(index), child)


def is_not_null(index: int, child: NraExpr) -> NraExpr:
    return Select(CIsNotNull(index), child)


def empty_of(e: NraExpr) -> NraExpr:
    return Diff(e, e)


def nulls(k: int) -> Optional[NraExpr]:
    """``⟨N⟩ × ... × ⟨N⟩`` with ``k`` factors, or None for ``k = 0``."""
    out: Optional[NraExpr] = None
    for _ in range(k):
        out = Singleton(NULL) if out is None else Product(out, Singleton(NULL))
    return out


# conditions


def cond_annf(c: Cond, negate: bool = False) -> Cond:
    """Push negations to the atoms and absorb them."""
    if isinstance(c, CNot):
        return cond_annf(c.arg, not negate)
    if isinstance(c, (CAnd, COr)):
        left, right = cond_annf(c.left, negate), cond_annf(c.right, negate)
        if isinstance(c, CAnd) != negate:
            return CAnd(left, right)
        return COr(left, right)
    if not negate:
        return c
    if isinstance(c, CEq):
        return CNeq(c.index, c.value)
    if isinstance(c, CNeq):
        return CEq(c.index, c.value)
    if isinstance(c, CEqCols):
        return CNeqCols(c.i, c.j)
    if isinstance(c, CNeqCols):
        return CEqCols(c.i, c.j)
    if isinstance(c, CIsNull):
        return CIsNotNull(c.index)
    if isinstance(c, CIsNotNull):
        return CIsNull(c.index)
    raise TypeError(f"unknown condition {c!r}")


def cond_indices(c: Cond) -> Iterable[int]:
    if isinstance(c, (CAnd, COr)):
        yield from cond_indices(c.left)
        yield from cond_indices(c.right)
    elif isinstance(c, CNot):
        yield from cond_indices(c.arg)
    elif isinstance(c, (CEqCols, CNeqCols)):
        yield c.i
        yield c.j
    else:
        yield c.index


def _holds(c: Cond, row: tuple) -> bool:
    # c is in ANNF
    if isinstance(c, CAnd):
        return _holds(c.left, row) and _holds(c.right, row)
    if isinstance(c, COr):
        return _holds(c.left, row) or _holds(c.right, row)
    if isinstance(c, CEq):
        x = row[c.index - 1]
        return x is not NULL and c.value is not NULL and x == c.value
    if isinstance(c, CNeq):
        x = row[c.index - 1]
        return x is not NULL and c.value is not NULL and x != c.value
    if isinstance(c, CEqCols):
        x, y = row[c.i - 1], row[c.j - 1]
        return x is not NULL and y is not NULL and x == y
    if isinstance(c, CNeqCols):
        x, y = row[c.i - 1], row[c.j - 1]
        return x is not NULL and y is not NULL and x != y
    if isinstance(c, CIsNull):
        return row[c.index - 1] is NULL
    if isinstance(c, CIsNotNull):
        return row[c.index - 1] is not NULL
    raise TypeError(f"condition not in normal form: {c!r}")


# arity


def check_arity(e: NraExpr, schema: Schema) -> int:
    """Return the arity of ``e``, validating every side condition."""
    memo: dict[int, int] = {}

    def go(e: NraExpr) -> int:
        key = id(e)
        if key in memo:
            return memo[key]
        memo[key] = result = _arity(e, go, schema)
        return result

    return go(e)


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise ArityError(msg)


def _arity(e: NraExpr, go: Callable[[NraExpr], int], schema: Schema) -> int:
    if isinstance(e, Relation):
        _need(e.name in schema.relations, f"unknown relation {e.name!r}")
        return schema.relations[e.name].arity
    if isinstance(e, DecompRelation):
        _need(e.name in schema.relations, f"unknown relation {e.name!r}")
        n = schema.relations[e.name].arity
        _need(len(set(e.positions)) == len(e.positions) and all(1 <= p <= n for p in e.positions),
              f"invalid position subset {e.positions} for {e.name!r}")
        return len(e.positions)
    if isinstance(e, Singleton):
        return 1
    if isinstance(e, SelectEqConst):
        n = go(e.child)
        _need(1 <= e.index <= n, f"selection index {e.index} out of bounds 1..{n}")
        return n
    if isinstance(e, SelectEqCols):
        n = go(e.child)
        _need(1 <= e.i <= n and 1 <= e.j <= n, f"selection indices {e.i},{e.j} out of bounds 1..{n}")
        return n
    if isinstance(e, Select):
        n = go(e.child)
        for k in cond_indices(e.cond):
            _need(1 <= k <= n, f"selection index {k} out of bounds 1..{n}")
        return n
    if isinstance(e, Project):
        n = go(e.child)
        _need(len(set(e.indices)) == len(e.indices), f"duplicate projection index in {list(e.indices)}")
        for k in e.indices:
            _need(1 <= k <= n, f"projection index {k} out of bounds 1..{n}")
        return len(e.indices)
    if isinstance(e, Product):
        return go(e.left) + go(e.right)
    if isinstance(e, (Union, Diff, Intersect)):
        m, n = go(e.left), go(e.right)
        _need(m == n, f"arity mismatch: {m} vs {n} in {type(e).__name__.lower()}")
        return m
    if isinstance(e, Join):
        m, n = go(e.left), go(e.right)
        ks = [k for _, k in e.pairs]
        _need(len(set(ks)) == len(ks), "join condition repeats a right-hand column")
        for i, k in e.pairs:
            _need(1 <= i <= m and 1 <= k <= n, f"join indices {i}={k} out of bounds")
        return m + n - len(e.pairs)
    raise TypeError(f"not an nRA expression: {e!r}")


# expansion


def expand_derived(e: NraExpr, schema: Optional[Schema] = None) -> NraExpr:
    """Rewrite every derived operator into core operators.

    A schema is needed only when the expression contains joins (their
    expansion depends on operand arities).
    """
    if isinstance(e, (Relation, DecompRelation, Singleton)):
        return e
    if isinstance(e, SelectEqConst):
        return SelectEqConst(e.index, e.value, expand_derived(e.child, schema))
    if isinstance(e, SelectEqCols):
        return SelectEqCols(e.i, e.j, expand_derived(e.child, schema))
    if isinstance(e, Project):
        return Project(e.indices, expand_derived(e.child, schema))
    if isinstance(e, Intersect):
        left, right = expand_derived(e.left, schema), expand_derived(e.right, schema)
        return Diff(left, Diff(left, right))
    if isinstance(e, _Binary):
        return type(e)(expand_derived(e.left, schema), expand_derived(e.right, schema))
    if isinstance(e, Select):
        return _expand_select(cond_annf(e.cond), expand_derived(e.child, schema))
    if isinstance(e, Join):
        if schema is None:
            raise ArityError("expanding a join needs the schema")
        left, right = expand_derived(e.left, schema), expand_derived(e.right, schema)
        m, n = check_arity(left, schema), check_arity(right, schema)
        joined = _join(e.pairs, left, right, m, n)
        if not isinstance(e, LeftOuterJoin):
            return joined
        dangling: NraExpr = Diff(left, Project(tuple(range(1, m + 1)), joined))
        pad = nulls(n - len(e.pairs))
        if pad is not None:
            dangling = Product(dangling, pad)
        return Union(joined, dangling)
    raise TypeError(f"not an nRA expression: {e!r}")


def _join(pairs, left: NraExpr, right: NraExpr, m: int, n: int) -> NraExpr:
    out: NraExpr = Product(left, right)
    for i, k in reversed(pairs):
        out = SelectEqCols(i, m + k, out)
    dropped = {m + k for _, k in pairs}
    return Project(tuple(p for p in range(1, m + n + 1) if p not in dropped), out)


def _expand_select(c: Cond, e: NraExpr) -> NraExpr:
    # c is in ANNF and e is already core
    if isinstance(c, CAnd):
        left, right = _expand_select(c.left, e), _expand_select(c.right, e)
        return Diff(left, Diff(left, right))
    if isinstance(c, COr):
        return Union(_expand_select(c.left, e), _expand_select(c.right, e))
    if isinstance(c, CEq):
        return empty_of(e) if c.value is NULL else SelectEqConst(c.index, c.value, e)
    if isinstance(c, CNeq):
        if c.value is NULL:
            return empty_of(e)
        return Diff(SelectEqCols(c.index, c.index, e), SelectEqConst(c.index, c.value, e))
    if isinstance(c, CEqCols):
        return SelectEqCols(c.i, c.j, e)
    if isinstance(c, CNeqCols):
        return Diff(SelectEqCols(c.i, c.i, SelectEqCols(c.j, c.j, e)), SelectEqCols(c.i, c.j, e))
    if isinstance(c, CIsNull):
        return Diff(e, SelectEqCols(c.index, c.index, e))
    if isinstance(c, CIsNotNull):
        return SelectEqCols(c.index, c.index, e)
    raise TypeError(f"unknown condition {c!r}")


def is_core(e: NraExpr) -> bool:
    return isinstance(e, CORE_TYPES) and all(is_core(c) for c in e.children())


def size(e: NraExpr) -> int:
    return 1 + sum(size(c) for c in e.children())


# evaluation


Instance = OneOf[InstanceN, InstanceDecomposed]


def eval_nra(e: NraExpr, inst: Instance, schema: Optional[Schema] = None) -> frozenset:
    """Evaluate bottom-up under set semantics.

    ``Relation`` leaves read an :class:`InstanceN`; ``DecompRelation`` leaves
    read an :class:`InstanceDecomposed`.  Derived operators are evaluated
    directly; their results agree with :func:`expand_derived`.
    """
    check_arity(e, schema or inst.schema)
    memo: dict[int, frozenset] = {}

    def go(e: NraExpr) -> frozenset:
        key = id(e)
        if key not in memo:
            memo[key] = _eval(e, go, inst)
        return memo[key]

    return go(e)


def _eval(e: NraExpr, go, inst: Instance) -> frozenset:
    if isinstance(e, Relation):
        if not isinstance(inst, InstanceN):
            raise TypeError("relation leaves need a total instance")
        return inst[e.name]
    if isinstance(e, DecompRelation):
        if not isinstance(inst, InstanceDecomposed):
            raise TypeError("decomposed leaves need a decomposed instance")
        return inst.slot(e.name, e.positions)
    if isinstance(e, Singleton):
        return frozenset({(e.value,)})
    if isinstance(e, SelectEqConst):
        k = e.index - 1
        return frozenset(s for s in go(e.child) if s[k] is not NULL and s[k] == e.value)
    if isinstance(e, SelectEqCols):
        i, j = e.i - 1, e.j - 1
        return frozenset(s for s in go(e.child) if s[i] is not NULL and s[j] is not NULL and s[i] == s[j])
    if isinstance(e, Select):
        c = cond_annf(e.cond)
        return frozenset(s for s in go(e.child) if _holds(c, s))
    if isinstance(e, Project):
        idx = [k - 1 for k in e.indices]
        return frozenset(tuple(s[k] for k in idx) for s in go(e.child))
    if isinstance(e, Product):
        return frozenset(a + b for a, b in itertools.product(go(e.left), go(e.right)))
    if isinstance(e, Union):
        return go(e.left) | go(e.right)
    if isinstance(e, Diff):
        return go(e.left) - go(e.right)
    if isinstance(e, Intersect):
        return go(e.left) & go(e.right)
    if isinstance(e, Join):
        left, right = go(e.left), go(e.right)
        dropped = {k - 1 for _, k in e.pairs}
        out = set()
        matched = set()
        for a in left:
            for b in right:
                if all(a[i - 1] is not NULL and a[i - 1] == b[k - 1] for i, k in e.pairs):
                    out.add(a + tuple(v for p, v in enumerate(b) if p not in dropped))
                    matched.add(a)
        if isinstance(e, LeftOuterJoin):
            pad = (NULL,) * (check_arity(e.right, inst.schema) - len(e.pairs))
            out.update(a + pad for a in left if a not in matched)
        return frozenset(out)
    raise TypeError(f"not an nRA expression: {e!r}")


# text syntax


def _lit(v: Value) -> str:
    if isinstance(v, int):
        return f"#{v}"
    return quote(v)


def cond_to_text(c: Cond, top: bool = True) -> str:
    if isinstance(c, CEq):
        return f"{c.index}={_lit(c.value)}"
    if isinstance(c, CNeq):
        return f"{c.index}!={_lit(c.value)}"
    if isinstance(c, CEqCols):
        return f"{c.i}={c.j}"
    if isinstance(c, CNeqCols):
        return f"{c.i}!={c.j}"
    if isinstance(c, CIsNull):
        return f"isNull({c.index})"
    if isinstance(c, CIsNotNull):
        return f"isNotNull({c.index})"
    if isinstance(c, CNot):
        return f"not {cond_to_text(c.arg, False)}"
    op = "and" if isinstance(c, CAnd) else "or"
    text = f"{cond_to_text(c.left, False)} {op} {cond_to_text(c.right, False)}"
    return text if top else f"({text})"


def to_text(e: NraExpr) -> str:
    """Render in the parseable text syntax."""
    if isinstance(e, Relation):
        return f"rel {e.name}"
    if isinstance(e, DecompRelation):
        return f"rel {e.name}~{{{','.join(map(str, e.positions))}}}"
    if isinstance(e, Singleton):
        return f"singleton {quote(e.value)}"
    if isinstance(e, SelectEqConst):
        return f"sel[{e.index}={_lit(e.value)}]({to_text(e.child)})"
    if isinstance(e, SelectEqCols):
        return f"sel[{e.i}={e.j}]({to_text(e.child)})"
    if isinstance(e, Select):
        return f"sel[{cond_to_text(e.cond)}]({to_text(e.child)})"
    if isinstance(e, Project):
        return f"proj[{','.join(map(str, e.indices))}]({to_text(e.child)})"
    if isinstance(e, Join):
        tag = "louter" if isinstance(e, LeftOuterJoin) else "join"
        conds = ",".join(f"{i}={k}" for i, k in e.pairs)
        return f"{tag}[{conds}]({to_text(e.left)}, {to_text(e.right)})"
    op = {Product: "x", Union: "union", Diff: "minus", Intersect: "intersect"}[type(e)]
    return f"({to_text(e.left)} {op} {to_text(e.right)})"


_BINOPS = {"x": Product, "union": Union, "minus": Diff, "intersect": Intersect}


def parse_nra(text: str) -> NraExpr:
    """Parse the text syntax.

    Integer constants in conditions carry a ``#`` prefix (``sel[1=#2]``);
    a bare integer on the right of ``=`` is a column.
    """
    ts = TokenStream(text)
    e = _parse_expr(ts)
    ts.expect_eof()
    return e


def _parse_expr(ts: TokenStream) -> NraExpr:
    tok = ts.peek()
    if tok.is_op("("):
        ts.next()
        e = _parse_expr(ts)
        while True:
            op = ts.peek()
            if op.kind == "IDENT" and op.text.lower() in _BINOPS:
                ts.next()
                e = _BINOPS[op.text.lower()](e, _parse_expr(ts))
            else:
                break
        ts.expect_op(")")
        return e
    if tok.kind != "IDENT":
        raise ts.error("expected an nRA expression")
    word = tok.text.lower()
    if word == "rel":
        ts.next()
        return _parse_leaf(ts)
    if word == "singleton":
        ts.next()
        return Singleton(_parse_value(ts, allow_column=False))
    if word in ("sel", "select") and ts.peek(1).is_op("["):
        ts.next()
        ts.expect_op("[")
        c = _parse_cond(ts)
        ts.expect_op("]")
        return select(c, _parse_paren_arg(ts))
    if word in ("proj", "project") and ts.peek(1).is_op("["):
        ts.next()
        ts.expect_op("[")
        idx = []
        if not ts.peek().is_op("]"):
            idx.append(ts.expect_int("projection index"))
            while ts.accept_op(","):
                idx.append(ts.expect_int("projection index"))
        ts.expect_op("]")
        return Project(tuple(idx), _parse_paren_arg(ts))
    if word in ("join", "louter") and ts.peek(1).is_op("["):
        ts.next()
        ts.expect_op("[")
        pairs = []
        if not ts.peek().is_op("]"):
            while True:
                i = ts.expect_int("join column")
                ts.expect_op("=")
                k = ts.expect_int("join column")
                pairs.append((i, k))
                if not ts.accept_op(","):
                    break
        ts.expect_op("]")
        ts.expect_op("(")
        left = _parse_expr(ts)
        ts.expect_op(",")
        right = _parse_expr(ts)
        ts.expect_op(")")
        cls = LeftOuterJoin if word == "louter" else Join
        return cls(tuple(pairs), left, right)
    return _parse_leaf(ts)


def _parse_leaf(ts: TokenStream) -> NraExpr:
    name = ts.expect_ident("relation name").text
    if ts.accept_op("~"):
        ts.expect_op("{")
        pos = []
        if not ts.peek().is_op("}"):
            pos.append(ts.expect_int("position"))
            while ts.accept_op(","):
                pos.append(ts.expect_int("position"))
        ts.expect_op("}")
        return DecompRelation(name, tuple(pos))
    return Relation(name)


def _parse_paren_arg(ts: TokenStream) -> NraExpr:
    ts.expect_op("(")
    e = _parse_expr(ts)
    ts.expect_op(")")
    return e


def _parse_value(ts: TokenStream, allow_column: bool):
    """Return a Value, or ``("col", k)`` for a bare integer when allowed."""
    tok = ts.peek()
    if tok.kind == "STRING":
        ts.next()
        return unquote(tok.text)
    if tok.is_kw("null"):
        ts.next()
        return NULL
    if tok.is_op("#"):
        ts.next()
        return ts.expect_int("integer constant")
    if tok.kind == "INT":
        ts.next()
        if allow_column:
            return ("col", int(tok.text))
        return int(tok.text)
    raise ts.error("expected a value")


def _parse_cond(ts: TokenStream) -> Cond:
    c = _parse_cond_and(ts)
    while ts.accept_kw("or"):
        c = COr(c, _parse_cond_and(ts))
    return c


def _parse_cond_and(ts: TokenStream) -> Cond:
    c = _parse_cond_atom(ts)
    while ts.accept_kw("and"):
        c = CAnd(c, _parse_cond_atom(ts))
    return c


def _parse_cond_atom(ts: TokenStream) -> Cond:
    if ts.accept_kw("not"):
        return CNot(_parse_cond_atom(ts))
    if ts.accept_op("("):
        c = _parse_cond(ts)
        ts.expect_op(")")
        return c
    tok = ts.peek()
    if tok.is_kw("isnull", "isnotnull"):
        ts.next()
        ts.expect_op("(")
        k = ts.expect_int("column")
        ts.expect_op(")")
        return CIsNull(k) if tok.text.lower() == "isnull" else CIsNotNull(k)
    i = ts.expect_int("column")
    op = ts.accept_op("=", "!=")
    if op is None:
        raise ts.error("expected '=' or '!='")
    rhs = _parse_value(ts, allow_column=True)
    if isinstance(rhs, tuple):
        return CEqCols(i, rhs[1]) if op.text == "=" else CNeqCols(i, rhs[1])
    return CEq(i, rhs) if op.text == "=" else CNeq(i, rhs)


__all__ = [
    "ArityError", "NraExpr", "Relation", "DecompRelation", "Singleton", "SelectEqConst", "SelectEqCols",
    "Project", "Product", "Union", "Diff", "Intersect", "Select", "Join", "LeftOuterJoin",
    "Cond", "CEq", "CNeq", "CEqCols", "CNeqCols", "CIsNull", "CIsNotNull", "CAnd", "COr", "CNot",
    "select", "is_null", "is_not_null", "empty_of", "nulls", "cond_annf", "check_arity",
    "expand_derived", "is_core", "size", "eval_nra", "to_text", "cond_to_text", "parse_nra", "ParseError",
]
