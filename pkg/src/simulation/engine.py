"""Deterministic discrete-event simulator for thinging-machine models."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Deque, Dict, List, Mapping, Optional, Tuple, Union

from ..config.config_schema import SimulationSection
from ..model.errors import BadInjectionPoint, InvalidModel, SimulationRuntimeError
from ..model.expr import Action, Drop, Incr, Insert, Log, NoOp, SetAttr, Value
from ..model.ops import resolve
from ..model.paths import StagePath
from ..model.types import INJECTION_KINDS, Model, Stage, StageKind, StateKind
from ..validate.rules import errors_only, validate
from .evaluator import Evaluator, render_message
from .state_store import StateStore
from .things import Thing, check_attrs
from .trace import Effect, Injection, Trace, TraceEvent, read_jsonl

logger = logging.getLogger(__name__)

STAGE_VERBS = {
    StageKind.RECEIVE: "arrive",
    StageKind.PROCESS: "process",
    StageKind.RELEASE: "release",
    StageKind.TRANSFER: "transfer",
    StageKind.CREATE: "create",
}

ATTRIBUTE_WRITERS = (StageKind.PROCESS, StageKind.CREATE)


@dataclass(frozen=True)
class Pending:
    """A thing waiting to execute a stage. ``via`` is inject, flow or trigger."""

    thing: int
    stage: StagePath
    via: str


@dataclass(frozen=True)
class Progress:
    event: TraceEvent
    events: Tuple[TraceEvent, ...]


@dataclass(frozen=True)
class Idle:
    pass


@dataclass(frozen=True)
class Halted:
    max_steps: int


StepResult = Union[Progress, Idle, Halted]


@dataclass(frozen=True)
class Fate:
    status: str  # dropped | terminal | queued
    stage: str


@dataclass(frozen=True)
class _Checkpoint:
    """What a failed step puts back."""

    store: StateStore
    attrs: Dict[str, Value]
    next_id: int
    created: int
    fates: Dict[int, Fate]
    events: int


@dataclass
class Outcome:
    """Where every thing ended and what the stores hold."""

    fates: Dict[int, Fate]
    stores: Dict[str, Any]
    counts: Dict[str, int] = field(default_factory=dict)

    @property
    def conserved(self) -> bool:
        c = self.counts
        return c["injected"] + c["created"] == c["dropped"] + c["terminal"] + c["queued"]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "fates": {str(k): {"status": f.status, "stage": f.stage} for k, f in sorted(self.fates.items())},
            "stores": self.stores,
            "counts": dict(self.counts),
        }


class SimState:
    """
    One simulation run over a validated model.

    Responsibilities:
    - Hold the FIFO queue of pending (thing, stage) pairs
    - Execute one stage per step() and record the resulting events
    - Track the fate of every thing for conservation checks

    Single owner; distinct instances may run in parallel on a shared model.
    """

    def __init__(self, model: Model, config: Optional[SimulationSection] = None):
        self.model = model
        self.config = config or SimulationSection()
        self.store = StateStore(model)
        self.queue: Deque[Pending] = deque()
        self.things: Dict[int, Thing] = {}
        self.next_id = 1
        self.steps = 0
        self.created = 0
        self.fates: Dict[int, Fate] = {}
        self.trace = Trace(model=model.name, max_steps=self.config.max_steps, seed=self.config.seed)

    # -- public operations ----------------------------------------------

    def inject(self, at: Union[str, StagePath], attrs: Optional[Mapping[str, Value]] = None,
               type_name: str = "packet") -> int:
        """
        Put a new thing on the queue at a transfer or create stage.

        Args:
            at: Stage path of the injection point
            attrs: Initial attributes (string, integer or boolean values)
            type_name: Thing type

        Returns:
            The new thing's id

        Raises:
            UnknownPath: ``at`` does not resolve
            BadInjectionPoint: ``at`` is not a transfer or create stage
        """
        ref = resolve(self.model, at)
        if ref.kind not in INJECTION_KINDS:
            raise BadInjectionPoint(
                f"cannot inject at {ref.path}: it is a {ref.kind.value} stage, not transfer or create"
            )
        thing = Thing(self._new_id(), type_name, check_attrs(attrs or {}))
        self.things[thing.id] = thing
        self.trace.injections.append(
            Injection(thing.id, str(ref.path), thing.type, tuple(sorted(thing.attrs.items())), self.steps)
        )
        self._enqueue(Pending(thing.id, ref.path, "inject"))
        logger.debug(f"Injected {thing.type} #{thing.id} at {ref.path}")
        return thing.id

    def step(self) -> StepResult:
        """Execute the stage at the head of the queue."""
        if not self.queue:
            return Idle()
        if self.steps >= self.config.max_steps:
            return Halted(self.config.max_steps)
        pending = self.queue.popleft()
        saved = self._checkpoint(pending)
        self.steps += 1
        try:
            events = self._execute(pending)
        except SimulationRuntimeError:
            self._rollback(saved, pending)
            raise
        return Progress(events[0], tuple(events))

    def run(self) -> Trace:
        """Step until idle or halted.

        Raises:
            SimulationRuntimeError: with ``trace`` set to the events so far
        """
        while True:
            try:
                result = self.step()
            except SimulationRuntimeError as e:
                self.trace.result = "error"
                self.trace.steps = self.steps
                e.trace = self.trace
                logger.error(f"Simulation of {self.model.name!r} failed after {self.steps} steps: {e}")
                raise
            if isinstance(result, Progress):
                continue
            self.trace.result = "halted" if isinstance(result, Halted) else "idle"
            self.trace.steps = self.steps
            logger.info(
                f"Simulation of {self.model.name!r} {self.trace.result} after {self.steps} steps, "
                f"{len(self.trace)} events"
            )
            return self.trace

    def outcome(self) -> Outcome:
        fates = dict(self.fates)
        counts = {"injected": len(self.trace.injections), "created": self.created}
        for status in ("dropped", "terminal", "queued"):
            counts[status] = sum(1 for f in fates.values() if f.status == status)
        return Outcome(fates=fates, stores=self.store.snapshot(), counts=counts)

    # -- internals ------------------------------------------------------

    def _new_id(self) -> int:
        new_id = self.next_id
        self.next_id += 1
        return new_id

    def _enqueue(self, pending: Pending):
        self.queue.append(pending)
        self.fates[pending.thing] = Fate("queued", str(pending.stage))

    def _checkpoint(self, pending: Pending) -> _Checkpoint:
        return _Checkpoint(
            store=self.store.copy(),
            attrs=dict(self.things[pending.thing].attrs),
            next_id=self.next_id,
            created=self.created,
            fates=dict(self.fates),
            events=len(self.trace.events),
        )

    def _rollback(self, saved: _Checkpoint, pending: Pending):
        """Undo a failed step; the thing stays queued at the stage that failed."""
        self.store = saved.store
        self.things[pending.thing].attrs = saved.attrs
        for thing_id in range(saved.next_id, self.next_id):
            self.things.pop(thing_id, None)
        self.next_id = saved.next_id
        self.created = saved.created
        self.fates = saved.fates
        del self.trace.events[saved.events:]
        self.queue.appendleft(pending)
        self.steps -= 1

    def _execute(self, pending: Pending) -> List[TraceEvent]:
        ref = resolve(self.model, pending.stage)
        path, stage = ref.path, ref.stage
        thing = self.things[pending.thing]
        effects: List[Effect] = []

        if pending.via == "flow" and stage.kind is StageKind.CREATE:
            born = thing.derive(self._new_id())
            self.things[born.id] = born
            self.created += 1
            self.fates[thing.id] = Fate("terminal", str(path))
            effects.append(Effect("derive", f"thing#{born.id}", thing.id, born.id))
            thing = born

        ev = Evaluator(self.store, path, thing)
        logs: List[str] = []
        dropped = self._apply(stage, stage.actions, ev, effects, logs)

        next_stage: Optional[StagePath] = None
        if not dropped:
            if stage.branches:
                for index, branch in enumerate(stage.branches, start=1):
                    if branch.guard is None or ev.truth(branch.guard):
                        effects.append(Effect("branch", str(path), None, str(branch.target), str(index)))
                        dropped = self._apply(stage, branch.actions, ev, effects, logs)
                        next_stage = branch.target
                        break
                else:
                    ev.fail("no branch guard matched")
            else:
                targets = []
                for flow in self.model.outgoing(path):
                    if flow.dst not in targets:
                        targets.append(flow.dst)
                if len(targets) > 1:
                    ev.fail(f"{len(targets)} outgoing flows and no branches to choose between them")
                next_stage = targets[0] if targets else None

        fired = self._fire_triggers(path, thing, ev)

        verb = "drop" if dropped else STAGE_VERBS[stage.kind]
        events = [self._event(thing.id, path, verb, effects)]
        for message in logs:
            events.append(self._event(thing.id, path, "log", [Effect("log", str(path), None, None, message)]))
        for new_thing, dst in fired:
            events.append(self._event(
                new_thing.id, path, "trigger-fire",
                [Effect("fire", str(dst), thing.id, new_thing.id, new_thing.type)],
            ))
            self._enqueue(Pending(new_thing.id, dst, "trigger"))

        if dropped:
            self.fates[thing.id] = Fate("dropped", str(path))
        elif next_stage is not None:
            self._enqueue(Pending(thing.id, next_stage, "flow"))
        else:
            self.fates[thing.id] = Fate("terminal", str(path))

        logger.debug(f"Step {self.steps}: #{thing.id} {verb} at {path}")
        return events

    def _event(self, thing_id: int, path: StagePath, verb: str, effects: List[Effect]) -> TraceEvent:
        event = TraceEvent(len(self.trace.events) + 1, thing_id, str(path), verb, tuple(effects))
        self.trace.events.append(event)
        return event

    def _apply(self, stage: Stage, actions, ev: Evaluator, effects: List[Effect], logs: List[str]) -> bool:
        """Apply actions in order; True when one of them dropped the thing."""
        action: Action
        for action in actions:
            if isinstance(action, Incr):
                key = self.store.key_for(ev.stage, action.store, (StateKind.COUNTER,))
                before, after = self.store.incr(key)
                effects.append(Effect("incr", key, before, after))
            elif isinstance(action, Insert):
                key = self.store.key_for(ev.stage, action.store, (StateKind.TABLE,))
                row = ev.record(action.record)
                self.store.insert(key, row)
                effects.append(Effect("insert", key, None, dict(row)))
            elif isinstance(action, SetAttr):
                if stage.kind not in ATTRIBUTE_WRITERS:
                    ev.fail(f"`set` is not allowed in a {stage.kind.value} stage")
                value = ev.scalar(action.value)
                before = ev.thing.attrs.get(action.name)
                ev.thing.attrs[action.name] = value
                effects.append(Effect("set", f"thing.{action.name}", before, value))
            elif isinstance(action, Log):
                logs.append(render_message(ev.eval(action.message)))
            elif isinstance(action, Drop):
                return True
            elif isinstance(action, NoOp):
                continue
        return False

    def _fire_triggers(self, path: StagePath, thing: Thing, ev: Evaluator) -> List[Tuple[Thing, StagePath]]:
        fired = []
        for trigger in self.model.triggers_from(path):
            if trigger.guard is not None and not ev.truth(trigger.guard):
                continue
            if trigger.template is None:
                new_thing = thing.derive(self._new_id())
            else:
                attrs = {key: ev.scalar(value) for key, value in trigger.template.attrs}
                new_thing = thing.derive(self._new_id(), trigger.template.type_name, attrs)
            self.things[new_thing.id] = new_thing
            self.created += 1
            fired.append((new_thing, resolve(self.model, trigger.dst).path))
        return fired


def init(model: Model, config: Optional[SimulationSection] = None) -> SimState:
    """
    Start a simulation of ``model``.

    Args:
        model: Model to simulate; must have no validation errors
        config: Step limit and seed (defaults when omitted)

    Returns:
        Fresh SimState with stores at their declared initial values

    Raises:
        InvalidModel: validation reported errors
    """
    errors = errors_only(validate(model))
    if errors:
        raise InvalidModel(errors)
    return SimState(model, config)


def replay(model: Model, text: str) -> Trace:
    """
    Re-run the injections recorded in a ``tm-trace/1`` file.

    The returned trace serializes to the same text when the model is
    unchanged.

    Raises:
        ValueError: the text is not a trace
        InvalidModel: the model has validation errors
    """
    header, injections, _ = read_jsonl(text)
    sim = init(model, SimulationSection(max_steps=header["max_steps"], seed=header["seed"]))
    for item in injections:
        while sim.steps < item["after_step"]:
            if not isinstance(sim.step(), Progress):
                break
        sim.inject(item["at"], item["attrs"], item["type"])
    try:
        return sim.run()
    except SimulationRuntimeError as e:
        return e.trace
