"""Canonical text form of a model.

Two-space indentation, one declaration per line. Inside a machine the order
is state, stages, submachines; all flows and triggers follow the machines at
model level in declaration order. ``parse(serialize(m))`` equals ``m``.
"""

from __future__ import annotations

from typing import List, Sequence, Tuple

from ..model.expr import (
    Action,
    AttrRef,
    BoolOp,
    Compare,
    Drop,
    Expr,
    HasAttr,
    Incr,
    Insert,
    Literal,
    Log,
    Member,
    NoOp,
    Not,
    Record,
    SetAttr,
    StoreRead,
    Value,
)
from ..model.types import Branch, Machine, Model, Row, Stage, StateDecl, StateKind, TriggerArc

INDENT = "  "

_PREC_OR, _PREC_AND, _PREC_NOT, _PREC_CMP, _PREC_ATOM = 1, 2, 3, 4, 5


def quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_value(value: Value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return quote(value)


def _prec(expr: Expr) -> int:
    if isinstance(expr, BoolOp):
        return _PREC_OR if expr.op == "or" else _PREC_AND
    if isinstance(expr, Not):
        return _PREC_NOT
    if isinstance(expr, (Compare, Member)):
        return _PREC_CMP
    return _PREC_ATOM


def _wrap(expr: Expr, parens: bool) -> str:
    text = format_expr(expr)
    return f"({text})" if parens else text


def format_expr(expr: Expr) -> str:
    """Render an expression with the minimum parentheses that re-parse to the same tree."""
    if isinstance(expr, Literal):
        return format_value(expr.value)
    if isinstance(expr, AttrRef):
        return f"thing.{expr.name}"
    if isinstance(expr, HasAttr):
        return f"has thing.{expr.name}"
    if isinstance(expr, StoreRead):
        return expr.name
    if isinstance(expr, Record):
        return format_record(expr.fields)
    if isinstance(expr, Compare):
        left = _wrap(expr.left, _prec(expr.left) < _PREC_ATOM)
        right = _wrap(expr.right, _prec(expr.right) < _PREC_ATOM)
        return f"{left} {expr.op} {right}"
    if isinstance(expr, Member):
        return f"{_wrap(expr.record, _prec(expr.record) < _PREC_ATOM)} in {expr.store}"
    if isinstance(expr, BoolOp):
        mine = _prec(expr)
        return f" {expr.op} ".join(_wrap(arg, _prec(arg) <= mine) for arg in expr.args)
    if isinstance(expr, Not):
        return f"not {_wrap(expr.arg, _prec(expr.arg) < _PREC_NOT)}"
    raise TypeError(f"not an expression: {expr!r}")


def format_record(fields: Sequence[Tuple[str, Expr]]) -> str:
    return "{" + ", ".join(f"{key}: {format_expr(value)}" for key, value in fields) + "}"


def format_row(row: Row) -> str:
    return "{" + ", ".join(f"{key}: {format_value(value)}" for key, value in row) + "}"


def format_action(action: Action) -> str:
    if isinstance(action, Incr):
        return f"incr {action.store}"
    if isinstance(action, Insert):
        return f"insert {action.store} {format_record(action.record.fields)}"
    if isinstance(action, SetAttr):
        return f"set thing.{action.name} = {format_expr(action.value)}"
    if isinstance(action, Drop):
        return "drop"
    if isinstance(action, Log):
        return f"log {format_expr(action.message)}"
    if isinstance(action, NoOp):
        return "noop"
    raise TypeError(f"not an action: {action!r}")


def format_branch(branch: Branch) -> str:
    head = "else" if branch.guard is None else f"when {format_expr(branch.guard)}"
    text = f"{head} -> {branch.target}"
    if branch.actions:
        text += " do " + ", ".join(format_action(a) for a in branch.actions)
    return text


def _state_lines(decl: StateDecl, pad: str) -> List[str]:
    if decl.kind is StateKind.COUNTER:
        return [f"{pad}state counter {decl.name} = {decl.value}"]
    head = f"{pad}state {decl.kind.value} {decl.name}"
    if not decl.rows:
        return [head] if decl.kind is StateKind.TABLE else [f"{head} = []"]
    if len(decl.rows) == 1:
        return [f"{head} = [{format_row(decl.rows[0])}]"]
    lines = [f"{head} = ["]
    for i, row in enumerate(decl.rows):
        comma = "," if i < len(decl.rows) - 1 else ""
        lines.append(f"{pad}{INDENT}{format_row(row)}{comma}")
    lines.append(f"{pad}]")
    return lines


def _stage_lines(stage: Stage, pad: str) -> List[str]:
    head = f"{pad}stage {stage.kind.value} {stage.name}"
    if not stage.actions and not stage.branches:
        return [head]
    inner = pad + INDENT
    lines = [head + " {"]
    lines.extend(inner + format_action(a) for a in stage.actions)
    lines.extend(inner + format_branch(b) for b in stage.branches)
    lines.append(pad + "}")
    return lines


def _machine_lines(machine: Machine, depth: int) -> List[str]:
    pad = INDENT * depth
    inner = INDENT * (depth + 1)
    lines = [f"{pad}machine {machine.name} {{"]
    for decl in machine.state:
        lines.extend(_state_lines(decl, inner))
    for stage in machine.stages:
        lines.extend(_stage_lines(stage, inner))
    for sub in machine.submachines:
        lines.extend(_machine_lines(sub, depth + 1))
    lines.append(pad + "}")
    return lines


def format_trigger(trigger: TriggerArc) -> str:
    text = f"trigger {trigger.src} -> {trigger.dst}"
    if trigger.guard is not None:
        text += f" when {format_expr(trigger.guard)}"
    if trigger.template is not None:
        text += f" emit {trigger.template.type_name} {format_record(trigger.template.attrs)}"
    return text


def serialize(model: Model) -> str:
    """Canonical ``.tm`` text for ``model`` (LF line endings, trailing newline)."""
    lines = [f"model {quote(model.name)} {{"]
    for machine in model.machines:
        lines.extend(_machine_lines(machine, 1))
    for flow in model.flows:
        lines.append(f"{INDENT}flow {flow.src} -> {flow.dst}")
    for trigger in model.triggers:
        lines.append(INDENT + format_trigger(trigger))
    lines.append("}")
    return "\n".join(lines) + "\n"
