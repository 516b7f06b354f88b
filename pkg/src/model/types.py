"""In-memory representation of a thinging-machine model.

A model is a tree of machines (thimacs). Each machine holds stages, state
declarations and nested machines; flow and trigger arcs live on the model
and address stages by absolute path. Every list keeps declaration order and
all iteration follows it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, List, Optional, Tuple

from .expr import Action, Expr, ThingTemplate, Value
from .paths import StagePath

Row = Tuple[Tuple[str, Value], ...]


class StageKind(str, Enum):
    """The five stages. Arrive and accept are merged into RECEIVE."""

    CREATE = "create"
    PROCESS = "process"
    RELEASE = "release"
    TRANSFER = "transfer"
    RECEIVE = "receive"


class StateKind(str, Enum):
    COUNTER = "counter"
    TABLE = "table"
    RULES = "rules"


# Legal intra-machine flows. Data, not code, so the table can be amended.
STAGE_ADJACENCY = frozenset({
    (StageKind.TRANSFER, StageKind.RECEIVE),
    (StageKind.RECEIVE, StageKind.PROCESS),
    (StageKind.RECEIVE, StageKind.RELEASE),
    (StageKind.PROCESS, StageKind.RELEASE),
    (StageKind.PROCESS, StageKind.CREATE),
    (StageKind.CREATE, StageKind.PROCESS),
    (StageKind.CREATE, StageKind.RELEASE),
    (StageKind.RELEASE, StageKind.TRANSFER),
})

TRIGGER_TARGET_KINDS = frozenset({StageKind.CREATE, StageKind.TRANSFER})
INJECTION_KINDS = TRIGGER_TARGET_KINDS


@dataclass
class StateDecl:
    """A named store owned by a machine.

    Counters use ``value``; tables and rules lists use ``rows``.
    """

    name: str
    kind: StateKind
    value: int = 0
    rows: Tuple[Row, ...] = ()


@dataclass
class Branch:
    """Guarded exit. ``guard`` of None is the ``else`` branch."""

    guard: Optional[Expr]
    target: StagePath
    actions: Tuple[Action, ...] = ()


@dataclass
class Stage:
    name: str
    kind: StageKind
    branches: List[Branch] = field(default_factory=list)
    actions: List[Action] = field(default_factory=list)


@dataclass
class Machine:
    name: str
    stages: List[Stage] = field(default_factory=list)
    submachines: List[Machine] = field(default_factory=list)
    state: List[StateDecl] = field(default_factory=list)

    def stage(self, name: str) -> Optional[Stage]:
        return next((s for s in self.stages if s.name == name), None)

    def submachine(self, name: str) -> Optional[Machine]:
        return next((m for m in self.submachines if m.name == name), None)

    def state_decl(self, name: str) -> Optional[StateDecl]:
        return next((d for d in self.state if d.name == name), None)


@dataclass
class FlowArc:
    src: StagePath
    dst: StagePath


@dataclass
class TriggerArc:
    src: StagePath
    dst: StagePath
    guard: Optional[Expr] = None
    template: Optional[ThingTemplate] = None


@dataclass
class Model:
    name: str
    machines: List[Machine] = field(default_factory=list)
    flows: List[FlowArc] = field(default_factory=list)
    triggers: List[TriggerArc] = field(default_factory=list)

    def iter_machines(self) -> Iterator[Tuple[Tuple[str, ...], Machine]]:
        """Pre-order walk yielding ``(path segments, machine)``."""
        stack: List[Tuple[Tuple[str, ...], Machine]] = [
            ((m.name,), m) for m in reversed(self.machines)
        ]
        while stack:
            segs, machine = stack.pop()
            yield segs, machine
            stack.extend((segs + (sub.name,), sub) for sub in reversed(machine.submachines))

    def iter_stages(self) -> Iterator[Tuple[StagePath, Stage]]:
        for segs, machine in self.iter_machines():
            for stage in machine.stages:
                yield StagePath(segs + (stage.name,)), stage

    def outgoing(self, src: StagePath) -> List[FlowArc]:
        return [arc for arc in self.flows if arc.src == src]

    def triggers_from(self, src: StagePath) -> List[TriggerArc]:
        return [arc for arc in self.triggers if arc.src == src]
