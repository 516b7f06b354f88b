"""Stage graph of a model, built with networkx."""

from __future__ import annotations

from typing import Iterable, Set

import networkx as nx

from .ops import try_resolve
from .paths import StagePath
from .types import Model


def stage_graph(model: Model, flows_only: bool = False) -> nx.DiGraph:
    """Directed graph with one node per stage path and one edge per resolvable arc."""
    graph = nx.DiGraph()
    graph.add_nodes_from(path for path, _ in model.iter_stages())
    arcs: Iterable = model.flows if flows_only else list(model.flows) + list(model.triggers)
    for arc in arcs:
        src, dst = try_resolve(model, arc.src), try_resolve(model, arc.dst)
        if src is not None and dst is not None:
            graph.add_edge(src.path, dst.path)
    return graph


def reachable_from_any(model: Model, starts: Iterable[StagePath], flows_only: bool = False) -> Set[StagePath]:
    """Union of every start and its descendants, ignoring guards."""
    graph = stage_graph(model, flows_only=flows_only)
    seen: Set[StagePath] = set()
    for start in starts:
        if start in seen:
            continue
        seen.add(start)
        seen |= nx.descendants(graph, start)
    return seen
