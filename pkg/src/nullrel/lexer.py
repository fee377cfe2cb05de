"""A small tokenizer shared by the nRA, calculus and SQL text parsers."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional


class ParseError(ValueError):
    """Syntax error; ``pos`` is a 0-based character offset into the source."""

    def __init__(self, message: str, pos: Optional[int] = None, source: Optional[str] = None):
        self.pos = pos
        self.source = source
        if pos is not None:
            message = f"{message} at position {pos}"
            if source is not None:
                line_start = source.rfind("\n", 0, pos) + 1
                line_end = source.find("\n", pos)
                line = source[line_start:line_end if line_end >= 0 else None]
                message += f"\n  {line}\n  {' ' * (pos - line_start)}^"
        super().__init__(message)


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, INT, STRING, OP, EOF
    text: str
    pos: int

    def is_kw(self, *words: str) -> bool:
        return self.kind == "IDENT" and self.text.lower() in words

    def is_op(self, *ops: str) -> bool:
        return self.kind == "OP" and self.text in ops


_OPS = ["!=2vl", "=2vl", "<>", "!=", "->", "¬", "∧", "∨", "∃", "∀",
        "=", "(", ")", "[", "]", "{", "}", ",", ".", ";", "~", "#", "*"]

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+|--[^\n]*)"
    r"|(?P<STRING>'(?:[^']|'')*')"
    r"|(?P<INT>-?\d+)"
    r"|(?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<OP>" + "|".join(re.escape(o) for o in _OPS) + ")"
)


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", pos, source)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("EOF", "", len(source)))
    return tokens


class TokenStream:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.i = 0

    def peek(self, k: int = 0) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "EOF" else repr(tok.text)
        return ParseError(f"{message}, found {found}", tok.pos, self.source)

    def accept_op(self, *ops: str) -> Optional[Token]:
        if self.peek().is_op(*ops):
            return self.next()
        return None

    def accept_kw(self, *words: str) -> Optional[Token]:
        if self.peek().is_kw(*words):
            return self.next()
        return None

    def expect_op(self, op: str) -> Token:
        tok = self.accept_op(op)
        if tok is None:
            raise self.error(f"expected {op!r}")
        return tok

    def expect_kw(self, word: str) -> Token:
        tok = self.accept_kw(word)
        if tok is None:
            raise self.error(f"expected {word.upper()}")
        return tok

    def expect_ident(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind != "IDENT":
            raise self.error(f"expected {what}")
        return self.next()

    def expect_int(self, what: str = "integer") -> int:
        tok = self.peek()
        if tok.kind != "INT":
            raise self.error(f"expected {what}")
        self.next()
        return int(tok.text)

    def expect_eof(self) -> None:
        if self.peek().kind != "EOF":
            raise self.error("unexpected trailing input")


def unquote(text: str) -> str:
    return text[1:-1].replace("''", "'")
