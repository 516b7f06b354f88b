"""Factory for random, structurally valid models.

Every generated model follows the stage adjacency table, crosses machine
boundaries only between transfer stages and gives each stage at most one
outgoing flow unless it carries branches that cover them.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple

import numpy as np

from .expr import AttrRef, Compare, Incr, Insert, Literal, Record, ThingTemplate
from .paths import StagePath
from .types import (
    STAGE_ADJACENCY,
    Branch,
    FlowArc,
    Machine,
    Model,
    Stage,
    StageKind,
    StateDecl,
    StateKind,
    TriggerArc,
)

_SUCCESSORS: Dict[StageKind, List[StageKind]] = {}
for _src, _dst in sorted(STAGE_ADJACENCY, key=lambda pair: (pair[0].value, pair[1].value)):
    _SUCCESSORS.setdefault(_src, []).append(_dst)

_TEXT_POOL = ["alpha", "198.51.100.7", 'quote"d', "back\\slash", "", "tcp"]


class _Builder:
    def __init__(self, rng: np.random.Generator, max_stages: int, guard_free: bool):
        self.rng = rng
        self.budget = max_stages
        self.guard_free = guard_free
        self.model = Model(name=f"random_{int(rng.integers(0, 10**6))}")
        self.entries: List[StagePath] = []
        self.exits: List[StagePath] = []
        self.outflows: Dict[StagePath, int] = {}

    def flow(self, src: StagePath, dst: StagePath):
        self.model.flows.append(FlowArc(src, dst))
        self.outflows[src] = self.outflows.get(src, 0) + 1

    def chance(self, p: float) -> bool:
        return bool(self.rng.random() < p)

    def add_stage(self, machine: Machine, segs: Tuple[str, ...], kind: StageKind) -> StagePath:
        stage = Stage(name=f"{kind.value}_{len(machine.stages)}", kind=kind)
        machine.stages.append(stage)
        self.budget -= 1
        return StagePath(segs + (stage.name,))

    def literal(self):
        pick = int(self.rng.integers(0, 3))
        if pick == 0:
            return int(self.rng.integers(-5, 100))
        if pick == 1:
            return bool(self.rng.integers(0, 2))
        return _TEXT_POOL[int(self.rng.integers(0, len(_TEXT_POOL)))]

    def fill_machine(self, machine: Machine, segs: Tuple[str, ...]):
        if not self.guard_free:
            machine.state.append(StateDecl(f"hits_{machine.name}", StateKind.COUNTER, value=int(self.rng.integers(0, 5))))
            rows = tuple(
                (("k", self.literal()), ("tag", self.literal())) for _ in range(int(self.rng.integers(0, 3)))
            )
            machine.state.append(StateDecl(f"seen_{machine.name}", StateKind.TABLE, rows=rows))

        current = self.add_stage(machine, segs, StageKind.TRANSFER)
        self.entries.append(current)
        kind = StageKind.TRANSFER
        length = int(self.rng.integers(1, 7))
        for _ in range(length):
            if self.budget <= 0:
                break
            options = _SUCCESSORS[kind]
            nxt = options[int(self.rng.integers(0, len(options)))]
            nxt_path = self.add_stage(machine, segs, nxt)
            stage = machine.stages[-1]
            if not self.guard_free and self.chance(0.4):
                stage.actions.append(Incr(f"hits_{machine.name}"))
            self.flow(current, nxt_path)
            if (
                not self.guard_free
                and self.budget > 0
                and kind is not StageKind.TRANSFER
                and len(_SUCCESSORS[kind]) > 1
                and self.chance(0.3)
            ):
                self.fork(machine, segs, current, nxt_path, kind)
            current, kind = nxt_path, nxt
        if kind is StageKind.TRANSFER and current != self.entries[-1]:
            self.exits.append(current)

    def fork(self, machine: Machine, segs: Tuple[str, ...], src: StagePath, taken: StagePath, kind: StageKind):
        """Give ``src`` a second exit and branches that choose between the two."""
        options = [k for k in _SUCCESSORS[kind]]
        other = self.add_stage(machine, segs, options[int(self.rng.integers(0, len(options)))])
        self.flow(src, other)
        src_stage = machine.stages[[s.name for s in machine.stages].index(src.name)]
        guard = Compare("=", AttrRef("k"), Literal(self.literal()))
        src_stage.branches = [
            Branch(guard, taken, (Insert(f"seen_{machine.name}", Record((("k", AttrRef("k")),))),)),
            Branch(None, other),
        ]

    def build(self, max_depth: int) -> Model:
        machines: List[Tuple[Tuple[str, ...], Machine]] = []
        count = int(self.rng.integers(1, 5))
        for i in range(count):
            if self.budget <= 0:
                break
            machine = Machine(name=f"m{i}")
            parents = [(s, m) for s, m in machines if len(s) < max_depth]
            if parents and self.chance(0.5):
                segs, parent = parents[int(self.rng.integers(0, len(parents)))]
                parent.submachines.append(machine)
                segs = segs + (machine.name,)
            else:
                self.model.machines.append(machine)
                segs = (machine.name,)
            machines.append((segs, machine))
            self.fill_machine(machine, segs)

        # Link machine exits to the entries of other machines.
        for exit_path in self.exits:
            candidates = [e for e in self.entries if e.parent != exit_path.parent]
            if candidates and self.outflows.get(exit_path, 0) == 0 and self.chance(0.7):
                self.flow(exit_path, candidates[int(self.rng.integers(0, len(candidates)))])

        if not self.guard_free:
            self.add_log_machine()
        return self.model

    def add_log_machine(self):
        log = Machine(name="log", stages=[Stage("entry", StageKind.CREATE)])
        self.model.machines.append(log)
        sources = [p for p, _ in self.model.iter_stages() if p.parent != ("log",)]
        if sources:
            src = sources[int(self.rng.integers(0, len(sources)))]
            template: Optional[ThingTemplate] = None
            if self.chance(0.5):
                template = ThingTemplate("log_entry", (("at", Literal(str(src))),))
            self.model.triggers.append(TriggerArc(src, StagePath(("log", "entry")), None, template))


def random_model(seed: int, max_stages: int = 30, guard_free: bool = True, max_depth: int = 3) -> Model:
    """
    Create a random model that validates without errors.

    Args:
        seed: Seed for ``numpy.random.default_rng``
        max_stages: Upper bound on the number of stages
        guard_free: When False, add stores, actions, guarded forks and a
            triggered log machine
        max_depth: Deepest machine nesting

    Returns:
        A new Model; the same seed always gives the same model
    """
    rng = np.random.default_rng(seed)
    return _Builder(rng, max(1, max_stages), guard_free).build(max_depth)


def injection_points(model: Model) -> List[StagePath]:
    """Transfer stages that open a machine (first stage of each machine)."""
    points = []
    for segs, machine in model.iter_machines():
        if machine.stages and machine.stages[0].kind is StageKind.TRANSFER:
            points.append(StagePath(segs + (machine.stages[0].name,)))
    return points
