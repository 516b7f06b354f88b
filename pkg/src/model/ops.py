"""Model construction and path-based addressing."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from .errors import DuplicateName, PathIsMachine, UnknownParent, UnknownPath
from .expr import Expr, ThingTemplate
from .paths import MachinePath, StagePath
from .types import FlowArc, Machine, Model, Stage, StageKind, StateDecl, TriggerArc

logger = logging.getLogger(__name__)

ArcId = int
PathLike = Union[str, StagePath]


@dataclass(frozen=True)
class StageRef:
    """A resolved stage together with its address and owning machine."""

    path: StagePath
    stage: Stage
    machine: Machine

    @property
    def kind(self):
        return self.stage.kind


def _unique(items: Sequence, name: str):
    found = [item for item in items if item.name == name]
    return found[0] if len(found) == 1 else None


def _walk(model: Model, segments: Sequence[str]) -> Optional[Machine]:
    """Follow machine names; None when any step is missing or ambiguous."""
    if not segments:
        return None
    machine = _unique(model.machines, segments[0])
    for seg in segments[1:]:
        if machine is None:
            return None
        machine = _unique(machine.submachines, seg)
    return machine


def _coerce(path: PathLike) -> StagePath:
    try:
        return StagePath.coerce(path)
    except UnknownPath:
        raise
    except Exception as e:
        raise UnknownPath(f"invalid path {path!r}: {e}")


def resolve(model: Model, path: PathLike) -> StageRef:
    """Return the unique stage at ``path``.

    Raises:
        UnknownPath: nothing (or more than one thing) lives at the path
        PathIsMachine: the path names a machine
    """
    path = _coerce(path)
    owner = _walk(model, path.parent)
    if owner is not None:
        stage = _unique(owner.stages, path.name)
        if stage is not None:
            return StageRef(path, stage, owner)
    if _walk(model, path.segments) is not None:
        raise PathIsMachine(f"{path} names a machine, not a stage")
    raise UnknownPath(f"no stage at {path}")


def try_resolve(model: Model, path: PathLike) -> Optional[StageRef]:
    try:
        return resolve(model, path)
    except (UnknownPath, PathIsMachine):
        return None


def resolve_machine(model: Model, path: PathLike) -> Machine:
    path = _coerce(path)
    machine = _walk(model, path.segments)
    if machine is None:
        raise UnknownPath(f"no machine at {path}")
    return machine


def path_of(model: Model, stage: Stage) -> StagePath:
    """Address of a stage object (identity lookup)."""
    for path, candidate in model.iter_stages():
        if candidate is stage:
            return path
    raise UnknownPath(f"stage {stage.name!r} is not part of model {model.name!r}")


def add_machine(model: Model, parent: Optional[PathLike], decl: Machine) -> MachinePath:
    """Insert ``decl`` at top level or under ``parent``; returns its path."""
    if parent is None:
        siblings: List[Machine] = model.machines
        prefix: Tuple[str, ...] = ()
    else:
        try:
            parent_path = _coerce(parent)
            owner = resolve_machine(model, parent_path)
        except UnknownPath:
            raise UnknownParent(f"parent machine {parent} does not exist")
        siblings = owner.submachines
        prefix = parent_path.segments
    if any(m.name == decl.name for m in siblings):
        where = ".".join(prefix) or "top level"
        raise DuplicateName(f"machine {decl.name!r} already exists under {where}")
    siblings.append(decl)
    path = StagePath(prefix + (decl.name,))
    logger.debug(f"Added machine {path}")
    return path


def add_stage(model: Model, machine: PathLike, stage: Stage) -> StagePath:
    owner = resolve_machine(model, machine)
    if owner.stage(stage.name) is not None:
        raise DuplicateName(f"stage {stage.name!r} already exists in {machine}")
    owner.stages.append(stage)
    return _coerce(machine).child(stage.name)


def add_state(model: Model, machine: PathLike, decl: StateDecl) -> None:
    owner = resolve_machine(model, machine)
    if owner.state_decl(decl.name) is not None:
        raise DuplicateName(f"state {decl.name!r} already exists in {machine}")
    owner.state.append(decl)


def add_flow(model: Model, src: PathLike, dst: PathLike) -> ArcId:
    """Append a flow arc; both ends must resolve to stages."""
    src_ref = resolve(model, src)
    dst_ref = resolve(model, dst)
    model.flows.append(FlowArc(src_ref.path, dst_ref.path))
    return len(model.flows) - 1


def add_trigger(
    model: Model,
    src: PathLike,
    dst: PathLike,
    guard: Optional[Expr] = None,
    template: Optional[ThingTemplate] = None,
) -> ArcId:
    src_ref = resolve(model, src)
    dst_ref = resolve(model, dst)
    model.triggers.append(TriggerArc(src_ref.path, dst_ref.path, guard, template))
    return len(model.triggers) - 1


def lookup_state(model: Model, stage_path: StagePath, name: str) -> Optional[Tuple[Tuple[str, ...], StateDecl]]:
    """Find the store ``name`` visible from a stage: its machine, then ancestors."""
    segments = stage_path.parent
    while segments:
        machine = _walk(model, segments)
        if machine is not None:
            decl = machine.state_decl(name)
            if decl is not None:
                return segments, decl
        segments = segments[:-1]
    return None


def depth(model: Model) -> int:
    """Maximum machine nesting depth (0 for an empty model)."""
    return max((len(segs) for segs, _ in model.iter_machines()), default=0)


def model_stats(model: Model) -> Dict[str, Any]:
    """Counts for documentation summaries: machines (nested included), stages
    by kind, flows, triggers and nesting depth."""
    by_kind = {kind.value: 0 for kind in StageKind}
    for _, stage in model.iter_stages():
        by_kind[stage.kind.value] += 1
    return {
        "model": model.name,
        "machines": sum(1 for _ in model.iter_machines()),
        "stages": sum(by_kind.values()),
        "stages_by_kind": by_kind,
        "flows": len(model.flows),
        "triggers": len(model.triggers),
        "max_depth": depth(model),
    }
