"""Structural rules V1-V9.

``validate`` never raises for model problems; it returns diagnostics ordered
by rule code, then by declaration order within a rule.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Set, Tuple

from ..model.expr import action_store_uses, is_always_true, store_uses
from ..model.graph import reachable_from_any
from ..model.ops import lookup_state, try_resolve
from ..model.paths import StagePath
from ..model.types import (
    STAGE_ADJACENCY,
    TRIGGER_TARGET_KINDS,
    Model,
    StageKind,
    StateKind,
)

logger = logging.getLogger(__name__)

ERROR = "error"
WARNING = "warning"

_STORE_KINDS = {
    "counter": {StateKind.COUNTER},
    "table": {StateKind.TABLE},
    "collection": {StateKind.TABLE, StateKind.RULES},
}


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: str
    path: str
    message: str

    @property
    def is_error(self) -> bool:
        return self.severity == ERROR

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    def format(self) -> str:
        return f"{self.severity} {self.code} {self.path}: {self.message}"


def _check_adjacency(model: Model) -> List[Diagnostic]:
    out = []
    for flow in model.flows:
        src, dst = try_resolve(model, flow.src), try_resolve(model, flow.dst)
        if src is None or dst is None or flow.src.parent != flow.dst.parent:
            continue
        if (src.kind, dst.kind) not in STAGE_ADJACENCY:
            out.append(Diagnostic(
                "V1", ERROR, str(flow.src),
                f"flow {flow.src} -> {flow.dst}: {src.kind.value} -> {dst.kind.value} is not a legal stage transition",
            ))
    return out


def _check_boundaries(model: Model) -> List[Diagnostic]:
    out = []
    for flow in model.flows:
        src, dst = try_resolve(model, flow.src), try_resolve(model, flow.dst)
        if src is None or dst is None or flow.src.parent == flow.dst.parent:
            continue
        wrong = [str(ref.path) for ref in (src, dst) if ref.kind is not StageKind.TRANSFER]
        if wrong:
            out.append(Diagnostic(
                "V2", ERROR, str(flow.src),
                f"flow {flow.src} -> {flow.dst} crosses a machine boundary but {', '.join(wrong)} is not a transfer stage",
            ))
    return out


def _check_names(model: Model) -> List[Diagnostic]:
    out = []

    def dupes(names: List[str]) -> List[str]:
        seen: Set[str] = set()
        repeated = []
        for name in names:
            if name in seen and name not in repeated:
                repeated.append(name)
            seen.add(name)
        return repeated

    for name in dupes([m.name for m in model.machines]):
        out.append(Diagnostic("V3", ERROR, name, f"duplicate top-level machine `{name}`"))

    inherited: Dict[Tuple[str, ...], Dict[str, str]] = {(): {}}
    for segs, machine in model.iter_machines():
        where = ".".join(segs)
        for what, names in (
            ("stage", [s.name for s in machine.stages]),
            ("submachine", [m.name for m in machine.submachines]),
            ("state", [d.name for d in machine.state]),
        ):
            for name in dupes(names):
                out.append(Diagnostic("V3", ERROR, f"{where}.{name}", f"duplicate {what} name `{name}` in {where}"))
        for name in sorted({s.name for s in machine.stages} & {m.name for m in machine.submachines}):
            out.append(Diagnostic(
                "V3", ERROR, f"{where}.{name}", f"`{name}` in {where} names both a stage and a submachine",
            ))

        visible = dict(inherited.get(segs[:-1], {}))
        for decl in machine.state:
            owner = visible.get(decl.name)
            if owner is not None and owner != where:
                out.append(Diagnostic(
                    "V3", ERROR, f"{where}.{decl.name}",
                    f"state `{decl.name}` in {where} shadows the state declared by {owner}",
                ))
        for decl in machine.state:
            visible[decl.name] = where
        inherited[segs] = visible
    return out


def _check_branches(model: Model) -> List[Diagnostic]:
    out = []
    for path, stage in model.iter_stages():
        targets: List[StagePath] = []
        for flow in model.outgoing(path):
            if flow.dst not in targets:
                targets.append(flow.dst)
        if len(targets) < 2 and not stage.branches:
            continue
        if not stage.branches:
            out.append(Diagnostic(
                "V4", ERROR, str(path),
                f"{stage.kind.value} stage has {len(targets)} outgoing flows but no branches",
            ))
            continue
        covered = {b.target for b in stage.branches}
        for target in targets:
            if target not in covered:
                out.append(Diagnostic("V4", ERROR, str(path), f"no branch leads to {target}"))
        exhaustive = any(b.guard is None or is_always_true(b.guard) for b in stage.branches)
        if not exhaustive:
            out.append(Diagnostic(
                "V4", ERROR, str(path), "branches are not exhaustive; end them with `else` or `when true`",
            ))
        seen_guards = []
        closed = False
        for i, branch in enumerate(stage.branches, start=1):
            if closed:
                out.append(Diagnostic(
                    "V4", WARNING, str(path), f"branch {i} can never fire: an earlier branch always matches",
                ))
            elif branch.guard is not None and branch.guard in seen_guards:
                out.append(Diagnostic("V4", WARNING, str(path), f"branch {i} repeats an earlier guard"))
            if branch.guard is None or is_always_true(branch.guard):
                closed = True
            elif branch.guard not in seen_guards:
                seen_guards.append(branch.guard)
    return out


def _check_dangling(model: Model) -> List[Diagnostic]:
    out = []

    def check(where: StagePath, path: StagePath, role: str):
        if try_resolve(model, path) is None:
            out.append(Diagnostic("V5", ERROR, str(where), f"{role} {path} does not name a stage"))

    for flow in model.flows:
        check(flow.src, flow.src, "flow source")
        check(flow.src, flow.dst, "flow destination")
    for path, stage in model.iter_stages():
        outs = {flow.dst for flow in model.outgoing(path)}
        for branch in stage.branches:
            if try_resolve(model, branch.target) is None:
                check(path, branch.target, "branch target")
            elif branch.target not in outs:
                out.append(Diagnostic(
                    "V5", ERROR, str(path), f"branch target {branch.target} is not reached by a flow from this stage",
                ))
    for trigger in model.triggers:
        check(trigger.src, trigger.src, "trigger source")
        check(trigger.src, trigger.dst, "trigger destination")
    return out


def _check_trigger_targets(model: Model) -> List[Diagnostic]:
    out = []
    for trigger in model.triggers:
        dst = try_resolve(model, trigger.dst)
        if dst is not None and dst.kind not in TRIGGER_TARGET_KINDS:
            out.append(Diagnostic(
                "V6", ERROR, str(trigger.src),
                f"trigger {trigger.src} -> {trigger.dst} targets a {dst.kind.value} stage; only create or transfer stages may be triggered",
            ))
    return out


def _check_stores(model: Model) -> List[Diagnostic]:
    out = []

    def check(stage_path: StagePath, uses):
        for name, need in uses:
            found = lookup_state(model, stage_path, name)
            if found is None:
                out.append(Diagnostic("V7", ERROR, str(stage_path), f"`{name}` is not a declared store"))
            elif found[1].kind not in _STORE_KINDS[need]:
                out.append(Diagnostic(
                    "V7", ERROR, str(stage_path),
                    f"`{name}` is a {found[1].kind.value} but is used as a {need}",
                ))

    for path, stage in model.iter_stages():
        for action in stage.actions:
            check(path, action_store_uses(action))
        for branch in stage.branches:
            if branch.guard is not None:
                check(path, store_uses(branch.guard))
            for action in branch.actions:
                check(path, action_store_uses(action))
    for trigger in model.triggers:
        if try_resolve(model, trigger.src) is None:
            continue
        if trigger.guard is not None:
            check(trigger.src, store_uses(trigger.guard))
        if trigger.template is not None:
            for _, value in trigger.template.attrs:
                check(trigger.src, store_uses(value))
    return out


def _check_receive_inputs(model: Model) -> List[Diagnostic]:
    out = []
    for path, stage in model.iter_stages():
        if stage.kind is not StageKind.RECEIVE:
            continue
        fed = False
        for flow in model.flows:
            if flow.dst != path:
                continue
            src = try_resolve(model, flow.src)
            if src is not None and src.kind is StageKind.TRANSFER:
                fed = True
                break
        if not fed:
            out.append(Diagnostic("V8", WARNING, str(path), "receive stage has no incoming flow from a transfer stage"))
    return out


def _check_reachability(model: Model) -> List[Diagnostic]:
    starts = [p for p, s in model.iter_stages() if s.kind in (StageKind.TRANSFER, StageKind.CREATE)]
    reached = reachable_from_any(model, starts)
    return [
        Diagnostic("V9", WARNING, str(path), "stage is unreachable from every transfer and create stage")
        for path, _ in model.iter_stages()
        if path not in reached
    ]


RULES: List[Tuple[str, Callable[[Model], List[Diagnostic]]]] = [
    ("V1", _check_adjacency),
    ("V2", _check_boundaries),
    ("V3", _check_names),
    ("V4", _check_branches),
    ("V5", _check_dangling),
    ("V6", _check_trigger_targets),
    ("V7", _check_stores),
    ("V8", _check_receive_inputs),
    ("V9", _check_reachability),
]


def validate(model: Model) -> List[Diagnostic]:
    """Check ``model`` against every rule; an empty list means valid."""
    diagnostics: List[Diagnostic] = []
    for _, rule in RULES:
        diagnostics.extend(rule(model))
    errors = sum(1 for d in diagnostics if d.is_error)
    logger.debug(f"Validated {model.name!r}: {errors} errors, {len(diagnostics) - errors} warnings")
    return diagnostics


def errors_only(diagnostics: List[Diagnostic]) -> List[Diagnostic]:
    return [d for d in diagnostics if d.is_error]


def error_codes(diagnostics: List[Diagnostic]) -> Set[str]:
    return {d.code for d in diagnostics if d.is_error}