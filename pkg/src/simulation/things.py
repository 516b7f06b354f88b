"""Things: what flows through machines."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional

from ..model.expr import Value


def check_attrs(attrs: Mapping[str, Value]) -> Dict[str, Value]:
    """Copy ``attrs``, rejecting values that are not string, integer or boolean."""
    out: Dict[str, Value] = {}
    for key, value in attrs.items():
        if not isinstance(value, (str, int, bool)):
            raise ValueError(f"attribute {key!r} has unsupported value {value!r}")
        out[str(key)] = value
    return out


@dataclass
class Thing:
    """A flowing thing. ``id`` never changes; only ``attrs`` may."""

    id: int
    type: str
    attrs: Dict[str, Value] = field(default_factory=dict)
    derived_from: Optional[int] = None

    def derive(self, new_id: int, type_name: Optional[str] = None,
               attrs: Optional[Mapping[str, Value]] = None) -> Thing:
        """A new thing born from this one; copies type and attributes unless given."""
        return Thing(
            id=new_id,
            type=type_name or self.type,
            attrs=dict(self.attrs if attrs is None else attrs),
            derived_from=self.id,
        )
