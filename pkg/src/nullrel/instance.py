"""Schemas and the three isomorphic instance representations.

* :class:`InstanceN` stores total tuples whose cells may be :data:`NULL`.
* :class:`InstancePartial` stores partial tuples (position -> constant).
* :class:`InstanceDecomposed` stores, for every relation ``R`` and every subset
  ``A`` of its positions, the null-free tuples of ``R`` that are defined exactly
  on ``A``.  Empty slots are not stored but behave as if they were.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Optional

from .values import NULL, Value, check_value, from_json, row_key, sorted_rows, to_json, value_kind


class InstanceError(ValueError):
    pass


@dataclass(frozen=True)
class Column:
    name: Optional[str] = None
    type: Optional[str] = None  # "text", "int" or None for untyped
    nullable: bool = True

    def accepts(self, v: Value) -> bool:
        if v is NULL:
            return self.nullable
        return self.type is None or value_kind(v) == self.type


@dataclass(frozen=True)
class RelationSchema:
    arity: int
    columns: Optional[tuple[Column, ...]] = None

    def __post_init__(self):
        if self.arity < 0:
            raise InstanceError("arity must be non-negative")
        if self.columns is not None and len(self.columns) != self.arity:
            raise InstanceError("column list does not match arity")

    def column_names(self) -> Optional[list[str]]:
        if self.columns is None or any(c.name is None for c in self.columns):
            return None
        return [c.name for c in self.columns]


@dataclass(frozen=True)
class Schema:
    relations: Mapping[str, RelationSchema] = field(default_factory=dict)
    constants: frozenset = frozenset()

    def __post_init__(self):
        rels = {k: (v if isinstance(v, RelationSchema) else RelationSchema(int(v)))
                for k, v in dict(self.relations).items()}
        object.__setattr__(self, "relations", MappingProxyType(rels))
        object.__setattr__(self, "constants",
                           frozenset(check_value(c, allow_null=False) for c in self.constants))

    def __hash__(self):
        return hash((tuple(sorted(self.relations.items())), self.constants))

    def __eq__(self, other):
        return (isinstance(other, Schema) and dict(self.relations) == dict(other.relations)
                and self.constants == other.constants)

    def arity(self, name: str) -> int:
        try:
            return self.relations[name].arity
        except KeyError:
            raise InstanceError(f"unknown relation {name!r}") from None

    def arities(self) -> dict[str, int]:
        return {k: v.arity for k, v in self.relations.items()}

    @classmethod
    def of(cls, constants: Iterable = (), **arities: int) -> "Schema":
        return cls({k: RelationSchema(v) for k, v in arities.items()}, frozenset(constants))


@dataclass(frozen=True)
class PartialTuple:
    """A partial function from positions ``1..arity`` to constants."""

    arity: int
    cells: tuple[tuple[int, Value], ...] = ()

    def __post_init__(self):
        cells = tuple(sorted(dict(self.cells).items()))
        for pos, v in cells:
            if not 1 <= pos <= self.arity:
                raise InstanceError(f"position {pos} outside 1..{self.arity}")
            check_value(v, allow_null=False)
        object.__setattr__(self, "cells", cells)

    @classmethod
    def from_map(cls, arity: int, mapping: Mapping[int, Value]) -> "PartialTuple":
        return cls(arity, tuple(mapping.items()))

    @classmethod
    def from_total(cls, row: tuple) -> "PartialTuple":
        return cls(len(row), tuple((i + 1, v) for i, v in enumerate(row) if v is not NULL))

    def as_dict(self) -> dict[int, Value]:
        return dict(self.cells)

    def domain(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.cells)

    def to_total(self) -> tuple:
        d = dict(self.cells)
        return tuple(d.get(i, NULL) for i in range(1, self.arity + 1))

    def __repr__(self):
        inner = ",".join(f"{p}↦{v}" for p, v in self.cells)
        return "{" + inner + "}"


def _freeze_rows(rows: Iterable[Iterable[Value]]) -> frozenset:
    return frozenset(tuple(r) for r in rows)


class _Base:
    schema: Schema
    _data: Mapping

    def __eq__(self, other):
        return type(self) is type(other) and self.schema == other.schema and self._norm() == other._norm()

    def __hash__(self):
        return hash(tuple(sorted(self._norm().items(), key=repr)))

    def _norm(self) -> dict:
        return dict(self._data)


class InstanceN(_Base):
    """Relations as sets of total tuples that may contain ``NULL``."""

    def __init__(self, schema: Schema, relations: Mapping[str, Iterable[Iterable[Value]]] = ()):
        self.schema = schema
        data = {name: frozenset() for name in schema.relations}
        for name, rows in dict(relations).items():
            arity = schema.arity(name)
            frozen = _freeze_rows(rows)
            cols = schema.relations[name].columns
            for row in frozen:
                if len(row) != arity:
                    raise InstanceError(f"tuple {row!r} does not have arity {arity} for {name!r}")
                for k, v in enumerate(row):
                    check_value(v)
                    if cols is not None and not cols[k].accepts(v):
                        raise InstanceError(f"value {v!r} rejected by column {k + 1} of {name!r}")
            data[name] = frozen
        self._data = MappingProxyType(data)
        self._adom: Optional[frozenset] = None

    def __getitem__(self, name: str) -> frozenset:
        try:
            return self._data[name]
        except KeyError:
            raise InstanceError(f"unknown relation {name!r}") from None

    def relations(self) -> Mapping[str, frozenset]:
        return self._data

    def active_domain(self) -> frozenset:
        if self._adom is None:
            vals = {v for rows in self._data.values() for row in rows for v in row if v is not NULL}
            self._adom = frozenset(vals) | self.schema.constants
        return self._adom

    def __repr__(self):
        body = ", ".join(f"{k}={sorted_rows(v)}" for k, v in sorted(self._data.items()))
        return f"InstanceN({body})"


class InstancePartial(_Base):
    """Relations as sets of :class:`PartialTuple`."""

    def __init__(self, schema: Schema, relations: Mapping[str, Iterable[PartialTuple]] = ()):
        self.schema = schema
        data = {name: frozenset() for name in schema.relations}
        for name, tuples in dict(relations).items():
            arity = schema.arity(name)
            frozen = frozenset(tuples)
            for t in frozen:
                if t.arity != arity:
                    raise InstanceError(f"partial tuple {t!r} does not have arity {arity}")
            data[name] = frozen
        self._data = MappingProxyType(data)

    def __getitem__(self, name: str) -> frozenset:
        try:
            return self._data[name]
        except KeyError:
            raise InstanceError(f"unknown relation {name!r}") from None

    def relations(self) -> Mapping[str, frozenset]:
        return self._data

    def active_domain(self) -> frozenset:
        vals = {v for ts in self._data.values() for t in ts for _, v in t.cells}
        return frozenset(vals) | self.schema.constants


class InstanceDecomposed(_Base):
    """The horizontal decomposition: slot ``(R, A)`` holds null-free ``|A|``-tuples."""

    def __init__(self, schema: Schema, slots: Mapping[tuple[str, tuple[int, ...]], Iterable[tuple]] = ()):
        self.schema = schema
        data = {}
        for (name, positions), rows in dict(slots).items():
            positions = _check_positions(schema.arity(name), positions)
            frozen = _freeze_rows(rows)
            for row in frozen:
                if len(row) != len(positions):
                    raise InstanceError(f"tuple {row!r} does not fit slot {name}~{set(positions)}")
                if NULL in row:
                    raise InstanceError(f"slot {name}~{set(positions)} holds a null in {row!r}")
                for v in row:
                    check_value(v)
            if frozen:
                data[(name, positions)] = frozen
        self._data = MappingProxyType(data)

    def slot(self, name: str, positions: Iterable[int]) -> frozenset:
        positions = _check_positions(self.schema.arity(name), positions)
        return self._data.get((name, positions), frozenset())

    def slots(self) -> Iterator[tuple[str, tuple[int, ...]]]:
        """Every slot of the decomposed signature, including empty ones."""
        for name, rel in sorted(self.schema.relations.items()):
            for k in range(rel.arity + 1):
                yield from ((name, c) for c in itertools.combinations(range(1, rel.arity + 1), k))

    def nonempty_slots(self) -> Mapping[tuple[str, tuple[int, ...]], frozenset]:
        return self._data

    def active_domain(self) -> frozenset:
        vals = {v for rows in self._data.values() for row in rows for v in row}
        return frozenset(vals) | self.schema.constants


def _check_positions(arity: int, positions: Iterable[int]) -> tuple[int, ...]:
    ps = tuple(sorted(positions))
    if len(set(ps)) != len(ps) or any(not 1 <= p <= arity for p in ps):
        raise InstanceError(f"invalid position subset {ps} for arity {arity}")
    return ps


# conversions


def to_partial(inst: InstanceN) -> InstancePartial:
    return InstancePartial(inst.schema, {
        name: [PartialTuple.from_total(row) for row in rows] for name, rows in inst.relations().items()
    })


def from_partial(inst: InstancePartial) -> InstanceN:
    return InstanceN(inst.schema, {
        name: [t.to_total() for t in ts] for name, ts in inst.relations().items()
    })


def decompose(inst: InstanceN) -> InstanceDecomposed:
    slots: dict[tuple[str, tuple[int, ...]], set] = {}
    for name, rows in inst.relations().items():
        for row in rows:
            positions = tuple(i + 1 for i, v in enumerate(row) if v is not NULL)
            slots.setdefault((name, positions), set()).add(tuple(v for v in row if v is not NULL))
    return InstanceDecomposed(inst.schema, slots)


def recompose(inst: InstanceDecomposed) -> InstanceN:
    rels: dict[str, set] = {name: set() for name in inst.schema.relations}
    for (name, positions), rows in inst.nonempty_slots().items():
        arity = inst.schema.arity(name)
        for row in rows:
            cells = dict(zip(positions, row))
            rels[name].add(tuple(cells.get(i, NULL) for i in range(1, arity + 1)))
    return InstanceN(inst.schema, rels)


def active_domain(inst) -> frozenset:
    return inst.active_domain()


# JSON


def _parse_columns(spec) -> Optional[tuple[Column, ...]]:
    if spec is None:
        return None
    cols = []
    for c in spec:
        typ = c.get("type")
        if typ not in (None, "text", "int"):
            raise InstanceError(f"unknown column type {typ!r}")
        cols.append(Column(c.get("name"), typ, bool(c.get("nullable", True))))
    return tuple(cols)


def load_instance(content, schema: Optional[Schema] = None) -> InstanceN:
    """Load an instance from JSON text or bytes.

    Accepts the full form ``{"relations": {...}, "constants": [...]}``, the
    short form ``{"r": [[...], ...]}`` and the partial and decomposed forms
    written by :func:`partial_to_json` and :func:`decomposed_to_json`.  If
    ``schema`` is given the file must agree with it; otherwise the schema is
    read from the file.
    """
    if isinstance(content, (bytes, bytearray)):
        content = content.decode("utf-8")
    try:
        doc = json.loads(content)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InstanceError("instance file must contain a JSON object")
    if "slots" in doc or "arities" in doc:
        return _load_other_form(doc, schema)

    if "relations" in doc:
        rel_docs = doc["relations"]
        constants = [from_json(c) for c in doc.get("constants", [])]
    else:
        rel_docs = {k: {"tuples": v} for k, v in doc.items()}
        constants = []

    rel_schemas: dict[str, RelationSchema] = {}
    contents: dict[str, list] = {}
    for name, rd in rel_docs.items():
        if isinstance(rd, list):
            rd = {"tuples": rd}
        try:
            rows = [tuple(from_json(v) for v in row) for row in rd.get("tuples", [])]
        except TypeError as exc:
            raise InstanceError(f"relation {name!r}: {exc}") from exc
        if schema is not None:
            if name not in schema.relations:
                raise InstanceError(f"unknown relation {name!r}")
            rs = schema.relations[name]
        else:
            arity = rd.get("arity")
            if arity is None:
                arity = len(rows[0]) if rows else len(rd.get("columns", []))
            rs = RelationSchema(int(arity), _parse_columns(rd.get("columns")))
        if "arity" in rd and int(rd["arity"]) != rs.arity:
            raise InstanceError(f"relation {name!r}: arity mismatch")
        rel_schemas[name] = rs
        contents[name] = rows

    if schema is None:
        schema = Schema(rel_schemas, frozenset(c for c in constants if c is not NULL))
    return InstanceN(schema, contents)


def _arities(doc: dict, schema: Optional[Schema]) -> Schema:
    if schema is not None:
        return schema
    arities = doc.get("arities")
    if not isinstance(arities, dict):
        raise InstanceError("partial and decomposed files need an 'arities' map")
    try:
        return Schema({name: RelationSchema(int(n)) for name, n in arities.items()})
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"bad arities: {exc}") from exc


def _load_other_form(doc: dict, schema: Optional[Schema]) -> InstanceN:
    schema = _arities(doc, schema)
    try:
        if "slots" in doc:
            slots = {}
            for label, rows in doc["slots"].items():
                name, _, rest = label.partition("~")
                if not rest.startswith("{") or not rest.endswith("}"):
                    raise InstanceError(f"bad slot label {label!r}")
                positions = tuple(int(p) for p in rest[1:-1].split(",") if p.strip())
                slots[(name, positions)] = [tuple(from_json(v) for v in r) for r in rows]
            return recompose(InstanceDecomposed(schema, slots))
        rels = {}
        for name, rows in doc.get("relations", {}).items():
            if name not in schema.relations:
                raise InstanceError(f"unknown relation {name!r}")
            rels[name] = [PartialTuple.from_map(schema.arity(name), {int(k): from_json(v) for k, v in r.items()})
                          for r in rows]
        return from_partial(InstancePartial(schema, rels))
    except (TypeError, ValueError, AttributeError) as exc:
        raise InstanceError(f"malformed instance file: {exc}") from exc


def instance_to_json(inst: InstanceN) -> dict:
    rels = {}
    for name, rs in sorted(inst.schema.relations.items()):
        entry: dict = {"arity": rs.arity}
        if rs.columns is not None:
            entry["columns"] = [
                {k: v for k, v in (("name", c.name), ("type", c.type), ("nullable", c.nullable)) if v is not None}
                for c in rs.columns
            ]
        entry["tuples"] = [[to_json(v) for v in row] for row in sorted_rows(inst[name])]
        rels[name] = entry
    doc: dict = {"relations": rels}
    if inst.schema.constants:
        doc["constants"] = [c for (c,) in sorted_rows((c,) for c in inst.schema.constants)]
    return doc


def partial_to_json(inst: InstancePartial) -> dict:
    out = {}
    for name in sorted(inst.schema.relations):
        out[name] = [{str(p): v for p, v in t.cells} for t in sorted(inst[name], key=_partial_key)]
    return {"arities": _arity_map(inst.schema), "relations": out}


def _arity_map(schema: Schema) -> dict:
    return {name: schema.arity(name) for name in sorted(schema.relations)}


def _partial_key(t: PartialTuple):
    return row_key(t.to_total())


def slot_label(name: str, positions: Iterable[int]) -> str:
    return f"{name}~{{{','.join(str(p) for p in positions)}}}"


def decomposed_to_json(inst: InstanceDecomposed) -> dict:
    out = {}
    for (name, positions) in sorted(inst.nonempty_slots(), key=lambda k: (k[0], len(k[1]), k[1])):
        out[slot_label(name, positions)] = [list(r) for r in sorted_rows(inst.slot(name, positions))]
    return {"arities": _arity_map(inst.schema), "slots": out}
