"""Simulation traces and their ``tm-trace/1`` JSON-lines form.

A trace file holds a header line, one line per injection and one line per
event, followed by an end line. Every line is a JSON object with sorted
keys.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from ..model.errors import UnknownThing
from ..model.expr import Value

SCHEMA = "tm-trace/1"

# Verbs of events that record a stage visit.
VISIT_VERBS = ("arrive", "create", "process", "release", "transfer", "drop")
VERBS = VISIT_VERBS + ("log", "trigger-fire")


@dataclass(frozen=True)
class Effect:
    """One applied change.

    ``kind`` is one of ``incr`` (counter delta), ``insert`` (table row),
    ``set`` (attribute write), ``branch`` (chosen exit), ``derive`` (a create
    stage replaced the arriving thing), ``log`` and ``fire``.
    """

    kind: str
    target: str
    before: Any = None
    after: Any = None
    detail: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "target": self.target,
            "before": self.before,
            "after": self.after,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class TraceEvent:
    step: int
    thing: int
    stage: str
    verb: str
    effects: Tuple[Effect, ...] = ()

    @property
    def is_visit(self) -> bool:
        return self.verb in VISIT_VERBS

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "event",
            "step": self.step,
            "thing": self.thing,
            "stage": self.stage,
            "verb": self.verb,
            "effects": [e.to_dict() for e in self.effects],
        }


@dataclass(frozen=True)
class Injection:
    thing: int
    at: str
    type: str
    attrs: Tuple[Tuple[str, Value], ...]
    after_step: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "inject",
            "thing": self.thing,
            "at": self.at,
            "type": self.type,
            "attrs": dict(self.attrs),
            "after_step": self.after_step,
        }


@dataclass
class Trace:
    """Everything a run did, in order."""

    model: str
    max_steps: int
    seed: int
    injections: List[Injection] = field(default_factory=list)
    events: List[TraceEvent] = field(default_factory=list)
    result: Optional[str] = None
    steps: int = 0

    def __len__(self) -> int:
        return len(self.events)

    def events_for(self, thing_id: int) -> List[TraceEvent]:
        return [e for e in self.events if e.thing == thing_id]

    def thing_ids(self) -> List[int]:
        ids = {i.thing for i in self.injections} | {e.thing for e in self.events}
        return sorted(ids)

    def effects(self, kind: Optional[str] = None) -> List[Effect]:
        return [eff for e in self.events for eff in e.effects if kind is None or eff.kind == kind]

    def counter_deltas(self) -> Dict[str, int]:
        """Total increments per counter key, summed over every event."""
        totals: Dict[str, int] = {}
        for eff in self.effects("incr"):
            totals[eff.target] = totals.get(eff.target, 0) + (eff.after - eff.before)
        return totals

    def verbs(self, verb: str) -> List[TraceEvent]:
        return [e for e in self.events if e.verb == verb]

    def header(self) -> Dict[str, Any]:
        return {"kind": "header", "schema": SCHEMA, "model": self.model, "max_steps": self.max_steps, "seed": self.seed}

    def to_jsonl(self) -> str:
        lines = [self.header()]
        lines.extend(i.to_dict() for i in self.injections)
        lines.extend(e.to_dict() for e in self.events)
        lines.append({"kind": "end", "result": self.result, "steps": self.steps})
        return "".join(json.dumps(line, sort_keys=True, ensure_ascii=False) + "\n" for line in lines)


def stage_sequence(trace: Trace, thing_id: int) -> List[str]:
    """Stages visited by one thing, in step order.

    Only visit events count (log and trigger-fire events do not move a thing).

    Raises:
        UnknownThing: the id is neither injected nor seen in any event
    """
    if thing_id not in trace.thing_ids():
        raise UnknownThing(f"thing #{thing_id} does not appear in the trace")
    return [e.stage for e in trace.events_for(thing_id) if e.is_visit]


def read_jsonl(text: str) -> Tuple[Dict[str, Any], List[Dict[str, Any]], List[Dict[str, Any]]]:
    """Split a trace file into header, injection lines and event lines.

    Raises:
        ValueError: not a ``tm-trace/1`` file
    """
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValueError("empty trace")
    try:
        records = [json.loads(line) for line in lines]
    except json.JSONDecodeError as e:
        raise ValueError(f"malformed trace line: {e}")
    header = records[0]
    if not isinstance(header, dict) or header.get("schema") != SCHEMA:
        raise ValueError(f"not a {SCHEMA} trace")
    injections = [r for r in records[1:] if isinstance(r, dict) and r.get("kind") == "inject"]
    events = [r for r in records[1:] if isinstance(r, dict) and r.get("kind") == "event"]
    return header, injections, events


def visited_stages(text: str) -> List[str]:
    """Distinct stage paths visited in a trace file, in first-visit order."""
    _, _, events = read_jsonl(text)
    seen: List[str] = []
    for event in events:
        if event.get("verb") in VISIT_VERBS and event.get("stage") not in seen:
            seen.append(event["stage"])
    return seen
