"""Recursive-descent parser for the SQL fragment.

Keywords are case-insensitive, identifiers case-sensitive.  Besides the
standard operators the 2VL comparison tokens ``=2vl`` and ``!=2vl`` are
accepted so rewritten queries can be read back.
"""
from __future__ import annotations

from typing import Optional, Union

from ..lexer import ParseError, TokenStream, unquote
from ..values import NULL
from .ast import (EQ, EQ2, NE, NE2, And, Cmp, Col, ColumnDef, Cond, CreateTable, Exists, Expr, In, IsNull, Lit,
                  Not, Or, Query, Select, SelectItem, SetOp, SubqueryRef, TableConstraint, TableRef, Truth)

_RESERVED = {
    "select", "distinct", "from", "where", "as", "and", "or", "not", "in", "exists", "is", "null", "union",
    "intersect", "except", "create", "table", "constraint", "check", "true", "false",
}

_CMP_OPS = {"=": EQ, "!=": NE, "<>": NE, "=2vl": EQ2, "!=2vl": NE2}

Statement = Union[Query, CreateTable]


class _SqlParser:
    def __init__(self, text: str):
        self.ts = TokenStream(text)

    # statements

    def statement(self) -> Statement:
        if self.ts.peek().is_kw("create"):
            return self.create_table()
        return self.query()

    def script(self) -> list[Statement]:
        out = []
        while self.ts.peek().kind != "EOF":
            if self.ts.accept_op(";"):
                continue
            out.append(self.statement())
            if self.ts.peek().kind != "EOF":
                self.ts.expect_op(";")
        return out

    def ident(self, what: str = "identifier") -> str:
        tok = self.ts.peek()
        if tok.kind != "IDENT" or tok.text.lower() in _RESERVED:
            raise self.ts.error(f"expected {what}")
        return self.ts.next().text

    # CREATE TABLE

    def create_table(self) -> CreateTable:
        ts = self.ts
        ts.expect_kw("create")
        ts.expect_kw("table")
        name = self.ident("table name")
        ts.expect_op("(")
        columns: list[ColumnDef] = []
        constraints: list[TableConstraint] = []
        while True:
            if ts.peek().is_kw("constraint", "check", "unique", "primary", "foreign"):
                constraints.append(self.table_constraint())
            else:
                if constraints:
                    raise ts.error("column definitions must precede constraints")
                columns.append(self.column_def())
            if not ts.accept_op(","):
                break
        ts.expect_op(")")
        if not columns:
            raise ts.error("a table needs at least one column")
        names = [c.name for c in columns]
        if len(set(names)) != len(names):
            raise ParseError(f"duplicate column name in table {name!r}")
        for k in constraints:
            for c in k.columns:
                if c not in names:
                    raise ParseError(f"constraint refers to unknown column {c!r} of table {name!r}")
        return CreateTable(name, tuple(columns), tuple(constraints))

    def column_def(self) -> ColumnDef:
        ts = self.ts
        name = self.ident("column name")
        tok = ts.accept_kw("text", "integer", "int")
        if tok is None:
            raise ts.error("expected column type TEXT or INTEGER")
        typ = "text" if tok.text.lower() == "text" else "int"
        not_null = False
        if ts.accept_kw("not"):
            ts.expect_kw("null")
            not_null = True
        else:
            ts.accept_kw("null")
        return ColumnDef(name, typ, not_null)

    def name_list(self) -> tuple[str, ...]:
        self.ts.expect_op("(")
        names = [self.ident("column name")]
        while self.ts.accept_op(","):
            names.append(self.ident("column name"))
        self.ts.expect_op(")")
        return tuple(names)

    def table_constraint(self) -> TableConstraint:
        ts = self.ts
        cname = None
        if ts.accept_kw("constraint"):
            cname = self.ident("constraint name")
        if ts.accept_kw("check"):
            ts.expect_op("(")
            cond = self.condition(simple=True)
            ts.expect_op(")")
            return TableConstraint("CHECK", cname, cond=cond)
        if ts.accept_kw("unique"):
            return TableConstraint("UNIQUE", cname, columns=self.name_list())
        if ts.accept_kw("primary"):
            ts.expect_kw("key")
            return TableConstraint("PRIMARY KEY", cname, columns=self.name_list())
        if ts.accept_kw("foreign"):
            ts.expect_kw("key")
            cols = self.name_list()
            ts.expect_kw("references")
            ref = self.ident("table name")
            ref_cols = self.name_list()
            if len(ref_cols) != len(cols):
                raise ts.error("foreign key column lists differ in length")
            return TableConstraint("FOREIGN KEY", cname, columns=cols, ref_table=ref, ref_columns=ref_cols)
        raise ts.error("expected CHECK, UNIQUE, PRIMARY KEY or FOREIGN KEY")

    # queries; INTERSECT binds tighter than UNION and EXCEPT

    def query(self) -> Query:
        left = self.query_term()
        while True:
            tok = self.ts.accept_kw("union", "except")
            if tok is None:
                return left
            right = self.query_term()
            left = self._setop(tok.text.upper(), left, right, tok)

    def query_term(self) -> Query:
        left = self.query_primary()
        while True:
            tok = self.ts.accept_kw("intersect")
            if tok is None:
                return left
            right = self.query_primary()
            left = self._setop("INTERSECT", left, right, tok)

    def _setop(self, kind, left, right, tok) -> SetOp:
        from .ast import output_arity
        if output_arity(left) != output_arity(right):
            raise ParseError(f"{kind} operands have different arity "
                             f"({output_arity(left)} vs {output_arity(right)})", tok.pos, self.ts.source)
        return SetOp(kind, left, right)

    def query_primary(self) -> Query:
        if self.ts.accept_op("("):
            q = self.query()
            self.ts.expect_op(")")
            return q
        return self.select()

    def select(self) -> Select:
        ts = self.ts
        ts.expect_kw("select")
        distinct = ts.accept_kw("distinct") is not None
        items = [self.select_item()]
        while ts.accept_op(","):
            items.append(self.select_item())
        ts.expect_kw("from")
        from_ = [self.from_item()]
        while ts.accept_op(","):
            from_.append(self.from_item())
        bindings = [f.binding for f in from_]
        for b in bindings:
            if bindings.count(b) > 1:
                raise ts.error(f"table name {b!r} bound twice in FROM")
        where = None
        if ts.accept_kw("where"):
            where = self.condition()
        return Select(tuple(items), tuple(from_), where, distinct)

    def select_item(self) -> SelectItem:
        expr = self.expression()
        alias = None
        if self.ts.accept_kw("as"):
            alias = self.ident("column alias")
        return SelectItem(expr, alias)

    def from_item(self):
        ts = self.ts
        if ts.accept_op("("):
            q = self.query()
            ts.expect_op(")")
            if not ts.accept_kw("as") and ts.peek().kind != "IDENT":
                raise ts.error("a subquery in FROM needs an alias")
            return SubqueryRef(q, self.ident("subquery alias"))
        name = self.ident("table name")
        alias = None
        if ts.accept_kw("as"):
            alias = self.ident("table alias")
        elif ts.peek().kind == "IDENT" and ts.peek().text.lower() not in _RESERVED:
            alias = self.ident()
        return TableRef(name, alias)

    # expressions

    def expression(self) -> Expr:
        ts = self.ts
        tok = ts.peek()
        if tok.kind == "STRING":
            ts.next()
            return Lit(unquote(tok.text))
        if tok.kind == "INT":
            ts.next()
            return Lit(int(tok.text))
        if tok.is_kw("null"):
            ts.next()
            return Lit(NULL)
        name = self.ident("expression")
        if ts.accept_op("."):
            col = ts.peek()
            if col.kind == "INT" and not col.text.startswith("-"):
                ts.next()
                if int(col.text) < 1:
                    raise ts.error("column positions start at 1", col)
                return Col(name, str(int(col.text)))
            return Col(name, self.ident("column name"))
        return Col(None, name)

    def expr_tuple(self) -> tuple[Expr, ...]:
        if self.ts.accept_op("("):
            es = [self.expression()]
            while self.ts.accept_op(","):
                es.append(self.expression())
            self.ts.expect_op(")")
            return tuple(es)
        return (self.expression(),)

    # conditions

    def condition(self, simple: bool = False) -> Cond:
        left = self.cond_and(simple)
        while self.ts.accept_kw("or"):
            left = Or(left, self.cond_and(simple))
        return left

    def cond_and(self, simple: bool) -> Cond:
        left = self.cond_not(simple)
        while self.ts.accept_kw("and"):
            left = And(left, self.cond_not(simple))
        return left

    def cond_not(self, simple: bool) -> Cond:
        ts = self.ts
        if ts.peek().is_kw("not") and not ts.peek(1).is_kw("exists"):
            ts.next()
            return Not(self.cond_not(simple))
        return self.cond_atom(simple)

    def _subquery(self) -> Query:
        if self.ts.accept_op("("):
            q = self.query()
            self.ts.expect_op(")")
            return q
        return self.select()

    def cond_atom(self, simple: bool) -> Cond:
        ts = self.ts
        tok = ts.peek()
        if tok.is_kw("not", "exists"):
            if simple:
                raise ts.error("EXISTS is not allowed in a CHECK condition")
            negated = ts.accept_kw("not") is not None
            ts.expect_kw("exists")
            return Exists(self._subquery(), negated)
        if tok.is_kw("true", "false"):
            ts.next()
            return Truth(tok.text.lower() == "true")
        if tok.is_op("("):
            # either a parenthesised condition or an expression tuple
            start = ts.i
            lhs = None
            try:
                lhs = self.expr_tuple()
            except ParseError:
                pass
            # past a tuple and its operator the reading is settled, so errors propagate
            if lhs is not None and self._at_tuple_operator():
                return self.after_tuple(lhs, simple)
            ts.i = start
            ts.expect_op("(")
            c = self.condition(simple)
            ts.expect_op(")")
            return c
        lhs = self.expr_tuple()
        return self.after_tuple(lhs, simple)

    def _at_tuple_operator(self) -> bool:
        tok = self.ts.peek()
        return tok.kind == "OP" and tok.text in _CMP_OPS or tok.is_kw("in", "is") or (
            tok.is_kw("not") and self.ts.peek(1).is_kw("in"))

    def after_tuple(self, lhs: tuple[Expr, ...], simple: bool) -> Cond:
        ts = self.ts
        tok = ts.peek()
        if tok.kind == "OP" and tok.text in _CMP_OPS:
            ts.next()
            rhs = self.expr_tuple()
            if len(rhs) != len(lhs):
                raise ParseError(f"comparison between tuples of different arity ({len(lhs)} vs {len(rhs)})",
                                 tok.pos, ts.source)
            return Cmp(lhs, _CMP_OPS[tok.text], rhs)
        if tok.is_kw("is"):
            if len(lhs) != 1:
                raise ts.error("IS NULL applies to a single expression")
            ts.next()
            negated = ts.accept_kw("not") is not None
            ts.expect_kw("null")
            return IsNull(lhs[0], negated)
        negated = ts.accept_kw("not") is not None
        if ts.peek().is_kw("in"):
            if simple:
                raise ts.error("IN is not allowed in a CHECK condition")
            in_tok = ts.next()
            ts.expect_op("(")
            if ts.peek().is_kw("select") or (ts.peek().is_op("(") and self._paren_starts_query()):
                q = self.query()
                ts.expect_op(")")
                from .ast import output_arity
                if output_arity(q) != len(lhs):
                    raise ParseError(f"IN compares {len(lhs)} expressions with a subquery of arity "
                                     f"{output_arity(q)}", in_tok.pos, ts.source)
                return In(lhs, query=q, negated=negated)
            if len(lhs) != 1:
                raise ParseError("IN with a value list needs a single expression on the left", in_tok.pos,
                                 ts.source)
            values = [self.expression()]
            while ts.accept_op(","):
                values.append(self.expression())
            ts.expect_op(")")
            return In(lhs, values=tuple(values), negated=negated)
        raise ts.error("expected a comparison, IS [NOT] NULL or [NOT] IN")

    def _paren_starts_query(self) -> bool:
        k = 0
        while self.ts.peek(k).is_op("("):
            k += 1
        return self.ts.peek(k).is_kw("select")


def parse_sql(text: str, catalog=None) -> Statement:
    """Parse one statement.  With a ``catalog`` (see :func:`resolve`) column
    references are checked as well."""
    p = _SqlParser(text)
    stmt = p.statement()
    p.ts.accept_op(";")
    p.ts.expect_eof()
    if catalog is not None and isinstance(stmt, Query):
        from .semantics import resolve
        resolve(stmt, catalog)
    return stmt


def parse_query(text: str, catalog=None) -> Query:
    stmt = parse_sql(text, catalog)
    if not isinstance(stmt, Query):
        raise ParseError("expected a query")
    return stmt


def parse_script(text: str) -> list[Statement]:
    return _SqlParser(text).script()


def parse_condition(text: str) -> Cond:
    p = _SqlParser(text)
    c = p.condition()
    p.ts.expect_eof()
    return c


__all__ = ["parse_sql", "parse_query", "parse_script", "parse_condition", "Statement"]
