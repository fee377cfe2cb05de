"""Typed constants and the null marker.

Text constants are plain ``str`` and integer constants plain ``int``; the null
marker is the singleton :data:`NULL`.  Python already keeps ``'1' != 1``, which
is exactly the cross-type behaviour we want, so no wrapper classes are needed.
"""
from __future__ import annotations

from typing import Any, Union


class _Null:
    """The SQL null marker.  Not a constant, never equal to a constant."""

    _instance: "_Null | None" = None

    def __new__(cls) -> "_Null":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NULL"

    def __reduce__(self):
        return (_Null, ())


NULL = _Null()

Value = Union[str, int, _Null]
Const = Union[str, int]


def is_null(v: Any) -> bool:
    return v is NULL


def check_value(v: Any, *, allow_null: bool = True) -> Value:
    """Validate a Python object as a value; bools are rejected."""
    if v is NULL:
        if not allow_null:
            raise ValueError("null is not allowed here")
        return v
    if isinstance(v, bool) or not isinstance(v, (str, int)):
        raise TypeError(f"not a text or integer value: {v!r}")
    return v


def value_kind(v: Value) -> str:
    if v is NULL:
        return "null"
    return "int" if isinstance(v, int) else "text"


def sort_key(v: Value) -> tuple:
    # ints before texts, null last
    if v is NULL:
        return (2,)
    if isinstance(v, int):
        return (0, v)
    return (1, v)


def row_key(row: tuple) -> tuple:
    return tuple(sort_key(v) for v in row)


def sorted_rows(rows) -> list[tuple]:
    """Canonical order: lexicographic by cell, null sorting last."""
    return sorted(rows, key=row_key)


def from_json(v: Any) -> Value:
    if v is None:
        return NULL
    return check_value(v)


def to_json(v: Value) -> Any:
    return None if v is NULL else v


def format_value(v: Value) -> str:
    """Render for plain-text output: ``NULL`` for null, raw text otherwise."""
    if v is NULL:
        return "NULL"
    return str(v)


def quote(v: Value) -> str:
    """Render as a literal in the query languages (``'text'``, ``3``, ``NULL``)."""
    if v is NULL:
        return "NULL"
    if isinstance(v, int):
        return str(v)
    return "'" + v.replace("'", "''") + "'"


def parse_literal(token: str) -> Value:
    """Parse a command-line cell: ``NULL``, an integer, or text (quotes optional)."""
    s = token.strip()
    if s.upper() == "NULL":
        return NULL
    if len(s) >= 2 and s[0] == s[-1] == "'":
        return s[1:-1].replace("''", "'")
    try:
        return int(s)
    except ValueError:
        return s
