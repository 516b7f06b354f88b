"""DOT diagrams of models.

Machines become nested ``cluster_`` subgraphs, stages become nodes labelled
``kind: name`` and named by their dotted path. Flow edges are solid; trigger
edges are dashed. The graph is built as a pygraphviz ``AGraph`` in
declaration order, so two renders of the same input give the same text.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import pygraphviz as pgv

from ..model.errors import UnknownPath, UnresolvedOption
from ..model.ops import resolve_machine, try_resolve
from ..model.paths import StagePath
from ..model.types import Machine, Model

logger = logging.getLogger(__name__)

HIGHLIGHT_FILL = "gold"
HIGHLIGHT_STYLE = "rounded,filled"
ERROR_COLOR = "red"


@dataclass(frozen=True)
class RenderOptions:
    highlight: FrozenSet[str] = frozenset()
    collapse: FrozenSet[str] = frozenset()
    rankdir: str = "LR"

    @classmethod
    def build(cls, highlight: Iterable[str] = (), collapse: Iterable[str] = (), rankdir: str = "LR") -> RenderOptions:
        return cls(frozenset(str(p) for p in highlight), frozenset(str(p) for p in collapse), rankdir)


def cluster_name(segments: Sequence[str]) -> str:
    return "cluster_" + "__".join(segments)


class _Renderer:
    def __init__(self, model: Model, opts: RenderOptions, error_paths: Set[str]):
        self.model = model
        self.opts = opts
        self.error_paths = error_paths
        self.collapsed: Set[Tuple[str, ...]] = set()
        self.highlight: Set[StagePath] = set()
        self._check_options()
        self.graph = pgv.AGraph(name=model.name, directed=True, strict=False)

    def _check_options(self):
        if self.opts.rankdir not in ("LR", "TB"):
            raise UnresolvedOption(f"rankdir must be LR or TB, got {self.opts.rankdir!r}")
        for text in sorted(self.opts.highlight):
            ref = try_resolve(self.model, text)
            if ref is None:
                raise UnresolvedOption(f"highlight path {text!r} does not name a stage of {self.model.name!r}")
            self.highlight.add(ref.path)
        for text in sorted(self.opts.collapse):
            try:
                resolve_machine(self.model, text)
            except UnknownPath:
                raise UnresolvedOption(f"collapse path {text!r} does not name a machine of {self.model.name!r}")
            self.collapsed.add(StagePath.parse(text).segments)

    def owner(self, path: StagePath) -> str:
        """Node an endpoint maps to: the outermost collapsed machine, or the stage itself."""
        outer = min((m for m in self.collapsed if path.is_within(m)), key=len, default=None)
        return str(path) if outer is None else ".".join(outer)

    def node_attrs(self, label: str, path: str, highlighted: bool, **extra: str) -> dict:
        attrs = {"label": label, **extra}
        if highlighted:
            attrs["style"] = HIGHLIGHT_STYLE
            attrs["fillcolor"] = HIGHLIGHT_FILL
        if path in self.error_paths:
            attrs["color"] = ERROR_COLOR
        return attrs

    def machine(self, parent: pgv.AGraph, segs: Tuple[str, ...], machine: Machine):
        dotted = ".".join(segs)
        if segs in self.collapsed:
            inside = any(h.is_within(segs) for h in self.highlight)
            parent.add_node(dotted, **self.node_attrs(f"machine: {dotted}", dotted, inside, shape="box3d"))
            return
        cluster = parent.add_subgraph(name=cluster_name(segs), label=machine.name)
        if dotted in self.error_paths:
            cluster.graph_attr["color"] = ERROR_COLOR
        for stage in machine.stages:
            path = StagePath(segs + (stage.name,))
            label = f"{stage.kind.value}: {stage.name}"
            cluster.add_node(str(path), **self.node_attrs(label, str(path), path in self.highlight))
        for sub in machine.submachines:
            self.machine(cluster, segs + (sub.name,), sub)

    def edges(self):
        seen: Set[Tuple[str, str, str]] = set()
        arcs: List[Tuple[StagePath, StagePath, Optional[str]]] = [(f.src, f.dst, None) for f in self.model.flows]
        for t in self.model.triggers:
            arcs.append((t.src, t.dst, t.template.type_name if t.template else ""))
        for src, dst, trigger_label in arcs:
            if try_resolve(self.model, src) is None or try_resolve(self.model, dst) is None:
                continue
            a, b = self.owner(src), self.owner(dst)
            folded = a != str(src) or b != str(dst)
            if folded and a == b:
                continue
            key = (a, b, "flow" if trigger_label is None else "trigger")
            if folded and key in seen:
                continue
            seen.add(key)
            if trigger_label is None:
                self.graph.add_edge(a, b)
            elif trigger_label:
                self.graph.add_edge(a, b, style="dashed", label=trigger_label)
            else:
                self.graph.add_edge(a, b, style="dashed")

    def render(self) -> pgv.AGraph:
        self.graph.graph_attr["rankdir"] = self.opts.rankdir
        self.graph.node_attr.update(shape="box", style="rounded", fontname="Helvetica")
        for machine in self.model.machines:
            self.machine(self.graph, (machine.name,), machine)
        self.edges()
        return self.graph


def to_agraph(model: Model, opts: Optional[RenderOptions] = None, diagnostics: Iterable = ()) -> pgv.AGraph:
    """
    Build the diagram of ``model`` as a pygraphviz graph.

    Args:
        model: Model to draw
        opts: Highlight and collapse paths, layout direction
        diagnostics: Validator diagnostics; paths of errors are drawn in red

    Raises:
        UnresolvedOption: a highlight path is not a stage or a collapse path
            is not a machine
    """
    error_paths = {d.path for d in diagnostics if getattr(d, "severity", None) == "error"}
    graph = _Renderer(model, opts or RenderOptions(), error_paths).render()
    logger.debug(f"Rendered {model.name!r}: {graph.number_of_nodes()} nodes, {graph.number_of_edges()} edges")
    return graph


def to_dot(model: Model, opts: Optional[RenderOptions] = None, diagnostics: Iterable = ()) -> str:
    """DOT text of :func:`to_agraph`, ending in a newline."""
    text = to_agraph(model, opts, diagnostics).string()
    return text if text.endswith("\n") else text + "\n"
