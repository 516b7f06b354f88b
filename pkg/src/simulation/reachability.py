"""Guard-blind reachability: the oracle the simulator is checked against."""

from __future__ import annotations

from typing import Set, Union

from ..model.graph import reachable_from_any
from ..model.ops import resolve
from ..model.paths import StagePath
from ..model.types import Model


def reachable_stages(
    model: Model,
    start: Union[str, StagePath],
    flows_only: bool = False,
) -> Set[StagePath]:
    """Stages reachable from ``start`` (inclusive) over flow and trigger arcs.

    Raises:
        UnknownPath: ``start`` does not resolve
        PathIsMachine: ``start`` names a machine
    """
    origin = resolve(model, start).path
    return reachable_from_any(model, [origin], flows_only=flows_only)
