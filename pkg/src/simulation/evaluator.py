"""Evaluation of guards, records and template attributes against a thing."""

from __future__ import annotations

from typing import Union

from ..model.errors import SimulationRuntimeError
from ..model.expr import (
    AttrRef,
    BoolOp,
    Compare,
    Expr,
    HasAttr,
    Literal,
    Member,
    Not,
    Record,
    StoreRead,
    Value,
)
from ..model.paths import StagePath
from ..model.types import Row, StateKind
from .state_store import StateStore, same_value
from .things import Thing

Result = Union[Value, Row]


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


class Evaluator:
    """Evaluates expressions for one thing at one stage.

    Every failure is a SimulationRuntimeError carrying the stage path and
    thing id.
    """

    def __init__(self, store: StateStore, stage: StagePath, thing: Thing):
        self.store = store
        self.stage = stage
        self.thing = thing

    def fail(self, message: str):
        raise SimulationRuntimeError(message, stage=str(self.stage), thing_id=self.thing.id)

    def scalar(self, expr: Expr) -> Value:
        value = self.eval(expr)
        if isinstance(value, tuple):
            self.fail("a record cannot be used as a value here")
        return value

    def truth(self, expr: Expr) -> bool:
        value = self.eval(expr)
        if not isinstance(value, bool):
            self.fail(f"guard evaluated to {value!r}, not a boolean")
        return value

    def record(self, expr: Record) -> Row:
        return tuple((key, self.scalar(value)) for key, value in expr.fields)

    def eval(self, expr: Expr) -> Result:
        if isinstance(expr, Literal):
            return expr.value
        if isinstance(expr, AttrRef):
            if expr.name not in self.thing.attrs:
                self.fail(f"thing has no attribute `{expr.name}`")
            return self.thing.attrs[expr.name]
        if isinstance(expr, HasAttr):
            return expr.name in self.thing.attrs
        if isinstance(expr, StoreRead):
            key = self.store.key_for(self.stage, expr.name, (StateKind.COUNTER,))
            return self.store.read(key)
        if isinstance(expr, Record):
            return self.record(expr)
        if isinstance(expr, Compare):
            return self._compare(expr)
        if isinstance(expr, Member):
            probe = self.eval(expr.record)
            if not isinstance(probe, tuple):
                self.fail("left side of `in` is not a record")
            key = self.store.key_for(self.stage, expr.store, (StateKind.TABLE, StateKind.RULES))
            return self.store.contains(key, probe)
        if isinstance(expr, BoolOp):
            for arg in expr.args:
                value = self.truth(arg)
                if expr.op == "and" and not value:
                    return False
                if expr.op == "or" and value:
                    return True
            return expr.op == "and"
        if isinstance(expr, Not):
            return not self.truth(expr.arg)
        self.fail(f"cannot evaluate {expr!r}")

    def _compare(self, expr: Compare) -> bool:
        left, right = self.scalar(expr.left), self.scalar(expr.right)
        if expr.op == "=":
            return same_value(left, right)
        if expr.op == "!=":
            return not same_value(left, right)
        if not (_is_int(left) and _is_int(right)):
            self.fail(f"`{expr.op}` needs integers, got {left!r} and {right!r}")
        return {
            "<": left < right,
            "<=": left <= right,
            ">": left > right,
            ">=": left >= right,
        }[expr.op]


def render_message(value: Result) -> str:
    """Text of a ``log`` action's message."""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)

