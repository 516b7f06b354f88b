"""Guard expressions, actions and thing templates.

These are pure descriptions. Evaluating a guard or applying an action is
the simulator's job (see ``src.simulation.evaluator``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Tuple, Union

Value = Union[str, int, bool]

COMPARISONS = ("=", "!=", "<", "<=", ">", ">=")
ORDERINGS = ("<", "<=", ">", ">=")


@dataclass(frozen=True)
class Literal:
    value: Value


@dataclass(frozen=True)
class AttrRef:
    """``thing.name``"""

    name: str


@dataclass(frozen=True)
class HasAttr:
    """``has thing.name``"""

    name: str


@dataclass(frozen=True)
class StoreRead:
    """Bare identifier: reads a counter of an enclosing machine."""

    name: str


@dataclass(frozen=True)
class Record:
    fields: Tuple[Tuple[str, "Expr"], ...]


@dataclass(frozen=True)
class Compare:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Member:
    """``record in store`` against a table or a rules list."""

    record: "Expr"
    store: str


@dataclass(frozen=True)
class BoolOp:
    op: str  # "and" | "or"
    args: Tuple["Expr", ...]


@dataclass(frozen=True)
class Not:
    arg: "Expr"


Expr = Union[Literal, AttrRef, HasAttr, StoreRead, Record, Compare, Member, BoolOp, Not]


@dataclass(frozen=True)
class Incr:
    store: str


@dataclass(frozen=True)
class Insert:
    store: str
    record: Record


@dataclass(frozen=True)
class SetAttr:
    name: str
    value: Expr


@dataclass(frozen=True)
class Drop:
    pass


@dataclass(frozen=True)
class Log:
    message: Expr


@dataclass(frozen=True)
class NoOp:
    pass


Action = Union[Incr, Insert, SetAttr, Drop, Log, NoOp]


@dataclass(frozen=True)
class ThingTemplate:
    """Type name plus attribute initializers evaluated on the triggering thing."""

    type_name: str
    attrs: Tuple[Tuple[str, Expr], ...] = ()


TRUE = Literal(True)


def children(expr: Expr) -> Iterator[Expr]:
    if isinstance(expr, Record):
        for _, value in expr.fields:
            yield value
    elif isinstance(expr, Compare):
        yield expr.left
        yield expr.right
    elif isinstance(expr, Member):
        yield expr.record
    elif isinstance(expr, BoolOp):
        yield from expr.args
    elif isinstance(expr, Not):
        yield expr.arg


def walk(expr: Expr) -> Iterator[Expr]:
    """Pre-order traversal."""
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(list(children(node))))


def store_uses(expr: Expr) -> Iterator[Tuple[str, str]]:
    """Yield ``(store name, required kind)`` for every store an expression reads.

    Required kind is ``counter`` for reads and ``collection`` for membership
    (a table or a rules list).
    """
    for node in walk(expr):
        if isinstance(node, StoreRead):
            yield node.name, "counter"
        elif isinstance(node, Member):
            yield node.store, "collection"


def action_exprs(action: Action) -> Iterator[Expr]:
    if isinstance(action, Insert):
        yield action.record
    elif isinstance(action, SetAttr):
        yield action.value
    elif isinstance(action, Log):
        yield action.message


def action_store_uses(action: Action) -> Iterator[Tuple[str, str]]:
    if isinstance(action, Incr):
        yield action.store, "counter"
    elif isinstance(action, Insert):
        yield action.store, "table"
    for expr in action_exprs(action):
        yield from store_uses(expr)


def is_always_true(expr: Expr) -> bool:
    return isinstance(expr, Literal) and expr.value is True
