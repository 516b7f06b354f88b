"""Thinging-machine model: machines, stages, arcs and state declarations."""

from .errors import (
    DuplicateName,
    ModelError,
    PathIsMachine,
    TMError,
    UnknownParent,
    UnknownPath,
)
from .ops import (
    ArcId,
    StageRef,
    add_flow,
    add_machine,
    add_stage,
    add_state,
    add_trigger,
    depth,
    model_stats,
    path_of,
    resolve,
    resolve_machine,
    try_resolve,
)
from .paths import MachinePath, StagePath
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

__all__ = [
    "ArcId",
    "Branch",
    "DuplicateName",
    "FlowArc",
    "Machine",
    "MachinePath",
    "Model",
    "ModelError",
    "PathIsMachine",
    "STAGE_ADJACENCY",
    "Stage",
    "StageKind",
    "StagePath",
    "StageRef",
    "StateDecl",
    "StateKind",
    "TMError",
    "TriggerArc",
    "UnknownParent",
    "UnknownPath",
    "add_flow",
    "add_machine",
    "add_stage",
    "add_state",
    "add_trigger",
    "depth",
    "model_stats",
    "path_of",
    "resolve",
    "resolve_machine",
    "try_resolve",
]
