"""Tokenizer for the ``.tm`` model language."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List, Union

from ..model.errors import ParseError
from .diagnostics import ParseDiagnostic, SourceSpan


class T(str, Enum):
    IDENT = "identifier"
    STRING = "string"
    INT = "integer"
    LBRACE = "'{'"
    RBRACE = "'}'"
    LPAREN = "'('"
    RPAREN = "')'"
    LBRACKET = "'['"
    RBRACKET = "']'"
    COMMA = "','"
    DOT = "'.'"
    COLON = "':'"
    ARROW = "'->'"
    EQ = "'='"
    NE = "'!='"
    LT = "'<'"
    LE = "'<='"
    GT = "'>'"
    GE = "'>='"
    EOF = "end of input"


SINGLE = {
    "{": T.LBRACE,
    "}": T.RBRACE,
    "(": T.LPAREN,
    ")": T.RPAREN,
    "[": T.LBRACKET,
    "]": T.RBRACKET,
    ",": T.COMMA,
    ".": T.DOT,
    ":": T.COLON,
    "=": T.EQ,
}

CMP_TOKENS = {T.EQ: "=", T.NE: "!=", T.LT: "<", T.LE: "<=", T.GT: ">", T.GE: ">="}


@dataclass(frozen=True)
class Token:
    kind: T
    value: Union[str, int]
    span: SourceSpan

    def describe(self) -> str:
        if self.kind is T.EOF:
            return "end of input"
        if self.kind is T.STRING:
            return "string literal"
        return f"`{self.value}`"


def _ident_start(ch: str) -> bool:
    return ch == "_" or ("a" <= ch <= "z") or ("A" <= ch <= "Z")


def _ident_char(ch: str) -> bool:
    return _ident_start(ch) or ("0" <= ch <= "9")


def tokenize(text: str) -> List[Token]:
    """Split ``text`` into tokens; raises ParseError on the first bad character."""
    tokens: List[Token] = []
    i, n = 0, len(text)
    line, line_start = 1, 0

    def fail(message: str, at: int, length: int = 1):
        column = at - line_start + 1
        raise ParseError([ParseDiagnostic(message, SourceSpan(line, column, length))])

    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            line_start = i + 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue

        start = i
        column = i - line_start + 1

        if _ident_start(ch):
            while i < n and _ident_char(text[i]):
                i += 1
            tokens.append(Token(T.IDENT, text[start:i], SourceSpan(line, column, i - start)))
            continue

        if ch.isascii() and ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isascii() and text[i + 1].isdigit()):
            i += 1
            while i < n and text[i].isascii() and text[i].isdigit():
                i += 1
            try:
                value = int(text[start:i])
            except ValueError:
                fail("integer literal too large", start, i - start)
            tokens.append(Token(T.INT, value, SourceSpan(line, column, i - start)))
            continue

        if ch == '"':
            i += 1
            chars: List[str] = []
            while True:
                if i >= n or text[i] == "\n":
                    fail("unterminated string literal", start, i - start)
                c = text[i]
                if c == '"':
                    i += 1
                    break
                if c == "\\":
                    if i + 1 >= n or text[i + 1] not in ('"', "\\"):
                        fail("invalid escape; only \\\" and \\\\ are allowed", i, 2 if i + 1 < n and text[i + 1] != "\n" else 1)
                    chars.append(text[i + 1])
                    i += 2
                    continue
                chars.append(c)
                i += 1
            tokens.append(Token(T.STRING, "".join(chars), SourceSpan(line, column, i - start)))
            continue

        two = text[i:i + 2]
        if two == "->":
            tokens.append(Token(T.ARROW, two, SourceSpan(line, column, 2)))
            i += 2
            continue
        if two in ("!=", "<=", ">="):
            kind = {"!=": T.NE, "<=": T.LE, ">=": T.GE}[two]
            tokens.append(Token(kind, two, SourceSpan(line, column, 2)))
            i += 2
            continue
        if ch in "<>":
            tokens.append(Token(T.LT if ch == "<" else T.GT, ch, SourceSpan(line, column, 1)))
            i += 1
            continue
        if ch in SINGLE:
            tokens.append(Token(SINGLE[ch], ch, SourceSpan(line, column, 1)))
            i += 1
            continue

        fail(f"unexpected character {ch!r}", i)

    tokens.append(Token(T.EOF, "", SourceSpan(line, n - line_start + 1, 0)))
    return tokens
