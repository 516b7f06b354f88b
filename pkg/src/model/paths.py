"""Dotted paths addressing machines and stages (``asa.ingress.receive``)."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Tuple, Union

from .errors import UnknownPath

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True, order=True)
class StagePath:
    """A nonempty sequence of identifiers; the last one may name a stage.

    The same type addresses machines (``MachinePath`` is an alias): whether a
    path names a machine or a stage is decided by resolution, not syntax.
    """

    segments: Tuple[str, ...]

    def __post_init__(self):
        if not self.segments:
            raise UnknownPath("empty path")
        for seg in self.segments:
            if not isinstance(seg, str) or not IDENT_RE.match(seg):
                raise UnknownPath(f"invalid path segment {seg!r}")

    @classmethod
    def parse(cls, text: str) -> StagePath:
        """Parse ``a.b.c``; raises UnknownPath for empty or malformed text."""
        if not isinstance(text, str) or not text:
            raise UnknownPath("empty path")
        return cls(tuple(text.split(".")))

    @classmethod
    def coerce(cls, value: Union[str, StagePath]) -> StagePath:
        if isinstance(value, StagePath):
            return value
        return cls.parse(value)

    @property
    def parent(self) -> Tuple[str, ...]:
        """Segments of the enclosing machine (empty for top level)."""
        return self.segments[:-1]

    @property
    def name(self) -> str:
        return self.segments[-1]

    def child(self, name: str) -> StagePath:
        return StagePath(self.segments + (name,))

    def is_within(self, machine: Tuple[str, ...]) -> bool:
        """True when this path lies inside the machine with these segments."""
        return len(self.segments) > len(machine) and self.segments[: len(machine)] == machine

    def __str__(self) -> str:
        return ".".join(self.segments)


MachinePath = StagePath
