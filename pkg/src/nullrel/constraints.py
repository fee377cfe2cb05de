"""SQL:1999 integrity constraints over instances with nulls.

Direct checkers are the reference.  Each constraint can also be rendered as
algebra denials (expressions that must be empty) and as calculus sentences;
both renderings come in two variants:

``"original"``
    The encodings as originally stated.  The UNIQUE sentence only
    forbids a key value from occurring under *every* null pattern of the
    remaining columns at once, which is too weak when two or more non-key
    columns exist.  The FOREIGN KEY sentence has the implication pointing
    from the referenced table to the referencing one.  The UNIQUE denial
    exists only for a single key column of a binary table and compares the
    other column with a null-failing inequality.
``"corrected"``
    Encodings that agree with the direct checkers on every instance.

:func:`cross_check` reports where the variants and the checkers disagree.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import chain, combinations, product
from typing import Iterable, Optional, Sequence, Union

from . import fole as F
from .instance import InstanceN, Schema, to_partial
from .nra import (CIsNotNull, CIsNull, CNeqCols, Diff, NraExpr, Product, Project, Relation, Select, SelectEqCols,
                  Union as NUnion, eval_nra)
from .translate import TranslationTooLarge, node_budget, omega
from .values import NULL


class ConstraintError(ValueError):
    pass


@dataclass(frozen=True)
class Unique:
    rel: str
    cols: tuple[int, ...]

    def __str__(self):
        return f"unique {self.rel} {','.join(map(str, self.cols))}"


@dataclass(frozen=True)
class PrimaryKey:
    rel: str
    cols: tuple[int, ...]

    def __str__(self):
        return f"pk {self.rel} {','.join(map(str, self.cols))}"


@dataclass(frozen=True)
class NotNull:
    rel: str
    col: int

    def __str__(self):
        return f"notnull {self.rel} {self.col}"


@dataclass(frozen=True)
class ForeignKey:
    """Simple-match foreign key from ``rel.fcols`` to ``ref.ucols``."""

    rel: str
    fcols: tuple[int, ...]
    ref: str
    ucols: tuple[int, ...]

    def __str__(self):
        return (f"fk {self.rel} {','.join(map(str, self.fcols))} -> "
                f"{self.ref} {','.join(map(str, self.ucols))}")


@dataclass(frozen=True)
class Check:
    """A CHECK constraint; ``cond`` is a SQL condition over ``rel``."""

    rel: str
    cond: object
    name: Optional[str] = None

    def __str__(self):
        return f"check {self.rel} ({self.cond})"


Constraint = Union[Unique, PrimaryKey, NotNull, ForeignKey, Check]
VARIANTS = ("original", "corrected")


# validation


def _cols_ok(schema: Schema, rel: str, cols: Sequence[int], what: str) -> int:
    try:
        m = schema.arity(rel)
    except Exception:
        raise ConstraintError(f"unknown relation {rel!r}") from None
    if not cols:
        raise ConstraintError(f"{what} needs at least one column")
    if len(set(cols)) != len(cols):
        raise ConstraintError(f"a column occurs more than once in the {what} definition")
    for c in cols:
        if not 1 <= c <= m:
            raise ConstraintError(f"column {c} outside 1..{m} of {rel!r}")
    return m


def validate(d: Constraint, schema: Schema) -> None:
    if isinstance(d, (Unique, PrimaryKey)):
        _cols_ok(schema, d.rel, d.cols, "UNIQUE" if isinstance(d, Unique) else "PRIMARY KEY")
    elif isinstance(d, NotNull):
        _cols_ok(schema, d.rel, (d.col,), "NOT NULL")
    elif isinstance(d, ForeignKey):
        _cols_ok(schema, d.rel, d.fcols, "FOREIGN KEY")
        _cols_ok(schema, d.ref, d.ucols, "referenced key")
        if len(d.fcols) != len(d.ucols):
            raise ConstraintError("foreign key and referenced column lists differ in length")
    elif isinstance(d, Check):
        schema.arity(d.rel)
    else:
        raise TypeError(f"not a constraint: {d!r}")


def validate_all(decls: Iterable[Constraint], schema: Schema) -> list[Constraint]:
    """Validate each declaration and enforce at most one primary key per table."""
    decls = list(decls)
    seen = set()
    for d in decls:
        validate(d, schema)
        if isinstance(d, PrimaryKey):
            if d.rel in seen:
                raise ConstraintError(f"table {d.rel!r} already has a primary key")
            seen.add(d.rel)
    return decls


# direct checkers


def _key(row: tuple, cols: Sequence[int]) -> tuple:
    return tuple(row[c - 1] for c in cols)


def unique_violations(inst: InstanceN, rel: str, cols: Sequence[int]) -> list[tuple[tuple, tuple]]:
    _cols_ok(inst.schema, rel, cols, "UNIQUE")
    groups: dict[tuple, list] = {}
    for row in inst[rel]:
        k = _key(row, cols)
        if NULL not in k:
            groups.setdefault(k, []).append(row)
    out = []
    for rows in groups.values():
        rows.sort(key=repr)
        out.extend(combinations(rows, 2))
    return out


def check_unique(inst: InstanceN, rel: str, cols: Sequence[int]) -> bool:
    """No two distinct rows agree on ``cols`` with all of them non-null."""
    return not unique_violations(inst, rel, cols)


def not_null_violations(inst: InstanceN, rel: str, col: int) -> list[tuple]:
    _cols_ok(inst.schema, rel, (col,), "NOT NULL")
    return [row for row in inst[rel] if row[col - 1] is NULL]


def check_not_null(inst: InstanceN, rel: str, col: int) -> bool:
    return not not_null_violations(inst, rel, col)


def check_primary_key(inst: InstanceN, rel: str, cols: Sequence[int]) -> bool:
    _cols_ok(inst.schema, rel, cols, "PRIMARY KEY")
    return all(check_not_null(inst, rel, c) for c in cols) and check_unique(inst, rel, cols)


def foreign_key_violations(inst: InstanceN, rel: str, fcols: Sequence[int], ref: str,
                           ucols: Sequence[int]) -> list[tuple]:
    validate(ForeignKey(rel, tuple(fcols), ref, tuple(ucols)), inst.schema)
    targets = {_key(s, ucols) for s in inst[ref]}
    return [row for row in inst[rel] if NULL not in _key(row, fcols) and _key(row, fcols) not in targets]


def check_foreign_key_simple(inst: InstanceN, rel: str, fcols: Sequence[int], ref: str,
                             ucols: Sequence[int]) -> bool:
    """Every row non-null on ``fcols`` matches some row of ``ref`` on ``ucols``."""
    return not foreign_key_violations(inst, rel, fcols, ref, ucols)


def check(d: Constraint, inst: InstanceN) -> bool:
    validate(d, inst.schema)
    if isinstance(d, Unique):
        return check_unique(inst, d.rel, d.cols)
    if isinstance(d, PrimaryKey):
        return check_primary_key(inst, d.rel, d.cols)
    if isinstance(d, NotNull):
        return check_not_null(inst, d.rel, d.col)
    if isinstance(d, ForeignKey):
        return check_foreign_key_simple(inst, d.rel, d.fcols, d.ref, d.ucols)
    from .sqlfo import check_holds
    return check_holds(d.rel, d.cond, inst)


def violations(d: Constraint, inst: InstanceN) -> list:
    """Offending rows (or row pairs for UNIQUE) in canonical order."""
    validate(d, inst.schema)
    if isinstance(d, Unique):
        return unique_violations(inst, d.rel, d.cols)
    if isinstance(d, PrimaryKey):
        nulls = sorted({r for c in d.cols for r in not_null_violations(inst, d.rel, c)}, key=repr)
        return nulls + unique_violations(inst, d.rel, d.cols)
    if isinstance(d, NotNull):
        return not_null_violations(inst, d.rel, d.col)
    if isinstance(d, ForeignKey):
        return foreign_key_violations(inst, d.rel, d.fcols, d.ref, d.ucols)
    from .sqlfo import check_violations
    return check_violations(d.rel, d.cond, inst)


# algebra denials


def _diagonal(e: NraExpr, m: int) -> NraExpr:
    """Pairs ``(r, r)`` for every row ``r`` of ``e``, as rows of arity ``2m``."""
    from .sqlfo.compile import dup_column
    out, width = e, m
    for p in range(1, m + 1):
        out = dup_column(out, p, width)
        width += 1
    return out


def _unique_denial(rel: str, cols: Sequence[int], m: int, variant: str) -> NraExpr:
    pair = Product(Relation(rel), Relation(rel))
    if variant == "original":
        if m != 2 or len(cols) != 1:
            raise ConstraintError("the original UNIQUE denial covers one key column of a binary table only")
        u = cols[0]
        o = 3 - u
        return SelectEqCols(u, u + 2, Select(CNeqCols(o, o + 2), pair))
    same_key: NraExpr = pair
    for c in cols:
        same_key = SelectEqCols(c, c + m, same_key)
    return Diff(same_key, _diagonal(Relation(rel), m))


def _not_null_denial(rel: str, col: int) -> NraExpr:
    return Select(CIsNull(col), Relation(rel))


def _fk_denial(d: ForeignKey) -> NraExpr:
    def keyed(rel, cols):
        e: NraExpr = Relation(rel)
        for c in cols:
            e = Select(CIsNotNull(c), e)
        return Project(tuple(cols), e)
    return Diff(keyed(d.rel, d.fcols), keyed(d.ref, d.ucols))


def denials(d: Constraint, schema: Schema, variant: str = "corrected") -> list[NraExpr]:
    """Algebra expressions that are all empty exactly when ``d`` holds."""
    _variant(variant)
    validate(d, schema)
    if isinstance(d, Unique):
        return [_unique_denial(d.rel, d.cols, schema.arity(d.rel), variant)]
    if isinstance(d, PrimaryKey):
        return ([_not_null_denial(d.rel, c) for c in d.cols]
                + [_unique_denial(d.rel, d.cols, schema.arity(d.rel), variant)])
    if isinstance(d, NotNull):
        return [_not_null_denial(d.rel, d.col)]
    if isinstance(d, ForeignKey):
        return [_fk_denial(d)]
    raise ConstraintError("CHECK constraints have no denial form here; use the SQL compiler")


def check_by_denials(d: Constraint, inst: InstanceN, variant: str = "corrected") -> bool:
    return all(not eval_nra(e, inst) for e in denials(d, inst.schema, variant))


# calculus sentences


def _variant(variant: str) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")


def nullify(rel: str, m: int, positions: Sequence[int], terms: Sequence) -> F.Atom:
    """``rel`` atom with ``terms`` at ``positions`` and the null term elsewhere."""
    if len(positions) != len(terms):
        raise ConstraintError("nullify needs one term per position")
    cells = dict(zip(positions, terms))
    return F.Atom(rel, tuple(cells.get(k, F.N) for k in range(1, m + 1)))


def _subsets(items: Sequence[int]) -> list[tuple[int, ...]]:
    return list(chain.from_iterable(combinations(items, k) for k in range(len(items) + 1)))


def _guard(n_subsets: int) -> None:
    if n_subsets > node_budget():
        raise TranslationTooLarge(f"constraint formula would need {n_subsets} subset disjuncts")


def _keyed_atom(rel: str, m: int, key: Sequence[int], kvars: Sequence[str], extra: Sequence[int], prefix: str):
    """``nullify`` with the key positions bound to ``kvars`` and ``extra`` to fresh variables."""
    positions = sorted(list(key) + list(extra))
    names = dict(zip(key, kvars))
    ys = [f"{prefix}{p}" for p in extra]
    names.update(zip(extra, ys))
    return nullify(rel, m, positions, [F.Var(names[p]) for p in positions]), ys


def _unique_sentence(rel: str, m: int, cols: Sequence[int], variant: str) -> F.Formula:
    others = [k for k in range(1, m + 1) if k not in cols]
    subsets = _subsets(others)
    _guard(len(subsets) ** 2)
    xs = [f"x{u}" for u in cols]
    same = []
    for sub in subsets:
        a, ys = _keyed_atom(rel, m, cols, xs, sub, "y")
        b, zs = _keyed_atom(rel, m, cols, xs, sub, "z")
        eqs = F.conj(F.Eq(F.Var(y), F.Var(z)) for y, z in zip(ys, zs))
        same.append(F.forall(ys + zs, F.implies(F.And(a, b), eqs)))
    first = F.forall(xs, F.conj(same))
    if variant == "original":
        if not others:
            raise ConstraintError("the original UNIQUE sentence needs at least one non-key column")
        present = []
        for sub in subsets:
            a, ys = _keyed_atom(rel, m, cols, xs, sub, "y")
            present.append(F.exists(ys, a))
        second = F.forall(xs, F.implies(F.conj(present), F.FALSE))
    else:
        clash = []
        for s1, s2 in combinations(subsets, 2):
            a, ys = _keyed_atom(rel, m, cols, xs, s1, "y")
            b, zs = _keyed_atom(rel, m, cols, xs, s2, "z")
            clash.append(F.Not(F.And(F.exists(ys, a), F.exists(zs, b))))
        second = F.forall(xs, F.conj(clash)) if clash else F.TRUE
    return F.And(first, second)


def _not_null_sentence(rel: str, m: int, col: int) -> F.Formula:
    others = [k for k in range(1, m + 1) if k != col]
    subsets = _subsets(others)
    _guard(len(subsets))
    parts = []
    for sub in subsets:
        ys = [f"y{p}" for p in sub]
        parts.append(F.exists(ys, nullify(rel, m, sub, [F.Var(y) for y in ys])))
    return F.Not(F.disj(parts))


def _fk_sentence(d: ForeignKey, schema: Schema, variant: str) -> F.Formula:
    xs = [f"x{k + 1}" for k in range(len(d.fcols))]

    def side(rel, cols):
        m = schema.arity(rel)
        others = [k for k in range(1, m + 1) if k not in cols]
        subsets = _subsets(others)
        _guard(len(subsets))
        parts = []
        for sub in subsets:
            a, ys = _keyed_atom(rel, m, cols, xs, sub, "y")
            parts.append(F.exists(ys, a))
        return F.disj(parts)

    child, parent = side(d.rel, d.fcols), side(d.ref, d.ucols)
    if variant == "original":
        return F.forall(xs, F.implies(parent, child))
    return F.forall(xs, F.implies(child, parent))


def constraint_to_fole(d: Constraint, schema: Schema, variant: str = "original") -> F.Formula:
    """Calculus sentence for ``d``; see the module docstring for the variants."""
    _variant(variant)
    validate(d, schema)
    if isinstance(d, Unique):
        return _unique_sentence(d.rel, schema.arity(d.rel), d.cols, variant)
    if isinstance(d, PrimaryKey):
        m = schema.arity(d.rel)
        return F.conj([_unique_sentence(d.rel, m, d.cols, variant)]
                      + [_not_null_sentence(d.rel, m, c) for c in d.cols])
    if isinstance(d, NotNull):
        return _not_null_sentence(d.rel, schema.arity(d.rel), d.col)
    if isinstance(d, ForeignKey):
        return _fk_sentence(d, schema, variant)
    raise ConstraintError("CHECK constraints have no calculus form here")


def check_by_fole(d: Constraint, inst: InstanceN, variant: str = "original") -> bool:
    return F.satisfies(to_partial(inst), {}, constraint_to_fole(d, inst.schema, variant))


def check_not_null_by_membership(inst: InstanceN, rel: str, col: int) -> bool:
    """NOT NULL through membership formulas: for every candidate tuple ``t``
    over the active domain plus null, the membership formula of
    ``t`` in ``σ_isNull(col) rel`` must be false."""
    _cols_ok(inst.schema, rel, (col,), "NOT NULL")
    e = _not_null_denial(rel, col)
    part = to_partial(inst)
    cells = sorted(inst.active_domain(), key=repr) + [NULL]
    for t in product(cells, repeat=inst.schema.arity(rel)):
        if F.satisfies(part, {}, omega(e, t, inst.schema)):
            return False
    return True


# cross-checking


@dataclass(frozen=True)
class Divergence:
    constraint: Constraint
    method: str
    direct: bool
    other: bool

    def __str__(self):
        return f"{self.constraint}: direct={self.direct} {self.method}={self.other}"


def cross_check(decls: Iterable[Constraint], inst: InstanceN,
                methods: Sequence[str] = ("fole:original", "fole:corrected", "denial:corrected")) -> list[Divergence]:
    """Compare the direct checkers with the other renderings; return every disagreement."""
    out = []
    for d in decls:
        direct = check(d, inst)
        for method in methods:
            kind, variant = method.split(":")
            try:
                other = check_by_fole(d, inst, variant) if kind == "fole" else check_by_denials(d, inst, variant)
            except ConstraintError:
                continue
            if other != direct:
                out.append(Divergence(d, method, direct, other))
    return out


# textual declarations

_SPEC_RE = re.compile(r"^\s*(\w+)\s+(\w+)\s+([^-]+?)(?:\s*->\s*(\w+)\s+(.+?))?\s*$")


def _columns(schema: Optional[Schema], rel: str, text: str) -> tuple[int, ...]:
    out = []
    names = None
    if schema is not None and rel in schema.relations:
        names = schema.relations[rel].column_names()
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise ConstraintError(f"empty column in {text!r}")
        if part.isdigit():
            out.append(int(part))
        elif names and part in names:
            out.append(names.index(part) + 1)
        else:
            raise ConstraintError(f"unknown column {part!r} of {rel!r}")
    return tuple(out)


def parse_constraint(text: str, schema: Optional[Schema] = None) -> Constraint:
    """Parse ``unique R c1,c2``, ``pk R c``, ``notnull R c`` or ``fk R f1 -> S u1``.

    Columns are 1-based positions or, given a schema with column names, names."""
    m = _SPEC_RE.match(text)
    if not m:
        raise ConstraintError(f"cannot parse constraint {text!r}")
    kind, rel, cols, ref, ucols = m.groups()
    kind = kind.lower()
    if kind == "fk":
        if ref is None:
            raise ConstraintError("a foreign key needs '-> table columns'")
        d: Constraint = ForeignKey(rel, _columns(schema, rel, cols), ref, _columns(schema, ref, ucols))
    elif ref is not None:
        raise ConstraintError(f"'->' is only valid in a foreign key: {text!r}")
    elif kind == "unique":
        d = Unique(rel, _columns(schema, rel, cols))
    elif kind in ("pk", "primary"):
        d = PrimaryKey(rel, _columns(schema, rel, cols))
    elif kind == "notnull":
        c = _columns(schema, rel, cols)
        if len(c) != 1:
            raise ConstraintError("notnull takes exactly one column")
        d = NotNull(rel, c[0])
    else:
        raise ConstraintError(f"unknown constraint kind {kind!r}")
    if schema is not None:
        validate(d, schema)
    return d


def constraints_from_create(t) -> list[Constraint]:
    """Declarations carried by a parsed ``CREATE TABLE`` statement."""
    names = [c.name for c in t.columns]
    pos = {n: k + 1 for k, n in enumerate(names)}
    out: list[Constraint] = [NotNull(t.name, pos[c.name]) for c in t.columns if c.not_null]
    for k in t.constraints:
        if k.kind == "CHECK":
            out.append(Check(t.name, k.cond, k.name))
        elif k.kind == "UNIQUE":
            out.append(Unique(t.name, tuple(pos[c] for c in k.columns)))
        elif k.kind == "PRIMARY KEY":
            out.append(PrimaryKey(t.name, tuple(pos[c] for c in k.columns)))
        else:
            out.append(ForeignKey(t.name, tuple(pos[c] for c in k.columns), k.ref_table, tuple(k.ref_columns)))
    return out


def resolve_foreign_columns(decls: Iterable[Constraint], tables: dict) -> list[Constraint]:
    """Replace referenced column names (kept as strings by :func:`constraints_from_create`)
    by positions, using the column lists in ``tables``."""
    out = []
    for d in decls:
        if isinstance(d, ForeignKey) and any(isinstance(c, str) for c in d.ucols):
            try:
                cols = tables[d.ref]
            except KeyError:
                raise ConstraintError(f"foreign key references unknown table {d.ref!r}") from None
            try:
                d = ForeignKey(d.rel, d.fcols, d.ref, tuple(cols.index(c) + 1 for c in d.ucols))
            except ValueError:
                raise ConstraintError(f"foreign key references unknown column of {d.ref!r}") from None
        out.append(d)
    return out


__all__ = [
    "ConstraintError", "Unique", "PrimaryKey", "NotNull", "ForeignKey", "Check", "Constraint", "VARIANTS",
    "validate", "validate_all", "check_unique", "check_primary_key", "check_not_null",
    "check_foreign_key_simple", "check", "violations", "unique_violations", "not_null_violations",
    "foreign_key_violations", "denials", "check_by_denials", "nullify", "constraint_to_fole", "check_by_fole",
    "check_not_null_by_membership", "Divergence", "cross_check", "parse_constraint", "constraints_from_create",
    "resolve_foreign_columns",
]
