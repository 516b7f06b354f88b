"""Live values of the stores a model declares.

Stores are keyed by ``machine.path.name``; a stage sees the stores of its
own machine and of every enclosing machine, nearest first.
"""

from __future__ import annotations

import copy
from typing import Any, Dict, List, Tuple

from ..model.errors import SimulationRuntimeError
from ..model.expr import Value
from ..model.ops import lookup_state
from ..model.paths import StagePath
from ..model.types import Model, Row, StateKind

WILDCARD = "*"


def same_value(a: Value, b: Value) -> bool:
    """Equality that keeps booleans and integers apart."""
    return type(a) is type(b) and a == b


def row_contains(row: Row, probe: Row) -> bool:
    fields = dict(row)
    return all(key in fields and same_value(fields[key], value) for key, value in probe)


def rule_matches(rule: Row, probe: Row) -> bool:
    fields = dict(probe)
    for key, value in rule:
        if key == "action" or value == WILDCARD:
            continue
        if key not in fields or not same_value(fields[key], value):
            return False
    return True


class StateStore:
    """Counters, tables and rules lists for one simulation run."""

    def __init__(self, model: Model):
        self.model = model
        self.kinds: Dict[str, StateKind] = {}
        self.values: Dict[str, Any] = {}
        for segs, machine in model.iter_machines():
            for decl in machine.state:
                key = ".".join(segs + (decl.name,))
                self.kinds[key] = decl.kind
                if decl.kind is StateKind.COUNTER:
                    self.values[key] = decl.value
                else:
                    self.values[key] = list(decl.rows)

    def key_for(self, stage: StagePath, name: str, want: Tuple[StateKind, ...]) -> str:
        found = lookup_state(self.model, stage, name)
        if found is None:
            raise SimulationRuntimeError(f"store `{name}` is not declared", stage=str(stage))
        segs, decl = found
        if decl.kind not in want:
            raise SimulationRuntimeError(
                f"store type mismatch: `{name}` is a {decl.kind.value}", stage=str(stage)
            )
        return ".".join(segs + (name,))

    def read(self, key: str) -> int:
        return self.values[key]

    def incr(self, key: str) -> Tuple[int, int]:
        before = self.values[key]
        self.values[key] = before + 1
        return before, before + 1

    def insert(self, key: str, row: Row) -> None:
        self.values[key].append(row)

    def contains(self, key: str, probe: Row) -> bool:
        """A table holds the probe when some row has every probe field; a rules
        list holds it when the first matching rule permits."""
        rows: List[Row] = self.values[key]
        if self.kinds[key] is StateKind.TABLE:
            return any(row_contains(row, probe) for row in rows)
        for rule in rows:
            if rule_matches(rule, probe):
                return dict(rule).get("action", "permit") == "permit"
        return False

    def snapshot(self) -> Dict[str, Any]:
        """Plain values: counters as integers, tables and rules as lists of dicts."""
        out: Dict[str, Any] = {}
        for key in sorted(self.values):
            value = self.values[key]
            out[key] = value if self.kinds[key] is StateKind.COUNTER else [dict(row) for row in value]
        return out

    def counters(self) -> Dict[str, int]:
        return {k: v for k, v in sorted(self.values.items()) if self.kinds[k] is StateKind.COUNTER}

    def copy(self) -> StateStore:
        clone = StateStore.__new__(StateStore)
        clone.model = self.model
        clone.kinds = dict(self.kinds)
        clone.values = copy.deepcopy(self.values)
        return clone
