"""Source positions and parse diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Tuple


@dataclass(frozen=True)
class SourceSpan:
    """1-based line and column; ``length`` in characters (may be 0)."""

    line: int
    column: int
    length: int = 0

    def within(self, text: str) -> bool:
        """True when the span lies inside ``text``."""
        lines = text.split("\n")
        if not 1 <= self.line <= len(lines) or self.length < 0:
            return False
        width = len(lines[self.line - 1])
        return 1 <= self.column <= width + 1 and self.column - 1 + self.length <= width + 1


@dataclass(frozen=True)
class ParseDiagnostic:
    message: str
    span: SourceSpan
    expected: Tuple[str, ...] = ()

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.span.line}:{self.span.column}: {self.message}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "message": self.message,
            "line": self.span.line,
            "column": self.span.column,
            "length": self.span.length,
            "expected": list(self.expected),
        }
