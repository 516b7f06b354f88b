from .engine import Fate, Halted, Idle, Outcome, Progress, SimState, StepResult, init, replay
from .reachability import reachable_stages
from .things import Thing
from .trace import Effect, Trace, TraceEvent, stage_sequence

__all__ = [
    "Effect",
    "Fate",
    "Halted",
    "Idle",
    "Outcome",
    "Progress",
    "SimState",
    "StepResult",
    "Thing",
    "Trace",
    "TraceEvent",
    "init",
    "reachable_stages",
    "replay",
    "stage_sequence",
]
