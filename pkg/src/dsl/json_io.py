"""JSON interchange format ``tm-json/1``.

Records and table rows are lists of ``[key, value]`` pairs so field order
survives the trip. Expressions are objects tagged with ``op``; actions are
tagged with ``action``. Keys are sorted and output is indented by two spaces.
"""

from __future__ import annotations

import json
from typing import Any, Dict, List, Optional

from ..model.errors import SchemaError, UnknownPath
from ..model.expr import (
    Action,
    AttrRef,
    BoolOp,
    Compare,
    COMPARISONS,
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
    ThingTemplate,
)
from ..model.paths import IDENT_RE, StagePath
from ..model.types import (
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

SCHEMA = "tm-json/1"


# -- export -------------------------------------------------------------


def expr_to_json(expr: Expr) -> Dict[str, Any]:
    if isinstance(expr, Literal):
        return {"op": "lit", "value": expr.value}
    if isinstance(expr, AttrRef):
        return {"op": "attr", "name": expr.name}
    if isinstance(expr, HasAttr):
        return {"op": "has", "name": expr.name}
    if isinstance(expr, StoreRead):
        return {"op": "read", "name": expr.name}
    if isinstance(expr, Record):
        return {"op": "record", "fields": [[k, expr_to_json(v)] for k, v in expr.fields]}
    if isinstance(expr, Compare):
        return {"op": "cmp", "cmp": expr.op, "left": expr_to_json(expr.left), "right": expr_to_json(expr.right)}
    if isinstance(expr, Member):
        return {"op": "in", "record": expr_to_json(expr.record), "store": expr.store}
    if isinstance(expr, BoolOp):
        return {"op": expr.op, "args": [expr_to_json(a) for a in expr.args]}
    if isinstance(expr, Not):
        return {"op": "not", "arg": expr_to_json(expr.arg)}
    raise TypeError(f"not an expression: {expr!r}")


def action_to_json(action: Action) -> Dict[str, Any]:
    if isinstance(action, Incr):
        return {"action": "incr", "store": action.store}
    if isinstance(action, Insert):
        return {"action": "insert", "store": action.store, "record": expr_to_json(action.record)}
    if isinstance(action, SetAttr):
        return {"action": "set", "name": action.name, "value": expr_to_json(action.value)}
    if isinstance(action, Drop):
        return {"action": "drop"}
    if isinstance(action, Log):
        return {"action": "log", "message": expr_to_json(action.message)}
    if isinstance(action, NoOp):
        return {"action": "noop"}
    raise TypeError(f"not an action: {action!r}")


def _state_to_json(decl: StateDecl) -> Dict[str, Any]:
    out: Dict[str, Any] = {"name": decl.name, "kind": decl.kind.value}
    if decl.kind is StateKind.COUNTER:
        out["value"] = decl.value
    else:
        out["rows"] = [[[k, v] for k, v in row] for row in decl.rows]
    return out


def _stage_to_json(stage: Stage) -> Dict[str, Any]:
    return {
        "name": stage.name,
        "kind": stage.kind.value,
        "actions": [action_to_json(a) for a in stage.actions],
        "branches": [
            {
                "guard": None if b.guard is None else expr_to_json(b.guard),
                "target": str(b.target),
                "actions": [action_to_json(a) for a in b.actions],
            }
            for b in stage.branches
        ],
    }


def _machine_to_json(machine: Machine) -> Dict[str, Any]:
    return {
        "name": machine.name,
        "state": [_state_to_json(d) for d in machine.state],
        "stages": [_stage_to_json(s) for s in machine.stages],
        "machines": [_machine_to_json(m) for m in machine.submachines],
    }


def _trigger_to_json(trigger: TriggerArc) -> Dict[str, Any]:
    template = None
    if trigger.template is not None:
        template = {
            "type": trigger.template.type_name,
            "attrs": [[k, expr_to_json(v)] for k, v in trigger.template.attrs],
        }
    return {
        "src": str(trigger.src),
        "dst": str(trigger.dst),
        "guard": None if trigger.guard is None else expr_to_json(trigger.guard),
        "template": template,
    }


def to_document(model: Model) -> Dict[str, Any]:
    return {
        "schema": SCHEMA,
        "name": model.name,
        "machines": [_machine_to_json(m) for m in model.machines],
        "flows": [{"src": str(f.src), "dst": str(f.dst)} for f in model.flows],
        "triggers": [_trigger_to_json(t) for t in model.triggers],
    }


def export_json(model: Model) -> str:
    """Serialize ``model`` as a ``tm-json/1`` document."""
    return json.dumps(to_document(model), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# -- import -------------------------------------------------------------


def _need(obj: Any, key: str, kind, where: str):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    value = obj[key]
    if kind is int and isinstance(value, bool):
        raise SchemaError(f"{where}.{key}: expected int")
    if not isinstance(value, kind):
        raise SchemaError(f"{where}.{key}: expected {getattr(kind, '__name__', kind)}")
    return value


def _name(obj: Any, key: str, where: str) -> str:
    value = _need(obj, key, str, where)
    _check_ident(value, f"{where}.{key}")
    return value


def _check_ident(value: str, where: str) -> str:
    if not IDENT_RE.match(value):
        raise SchemaError(f"{where}: {value!r} is not an identifier")
    return value


def _value(raw: Any, where: str):
    if isinstance(raw, (bool, int, str)):
        return raw
    raise SchemaError(f"{where}: values must be string, integer or boolean")


def _path(raw: Any, where: str) -> StagePath:
    try:
        return StagePath.parse(raw)
    except UnknownPath as e:
        raise SchemaError(f"{where}: {e.message}")


def _pairs(raw: Any, where: str) -> List[tuple]:
    if not isinstance(raw, list):
        raise SchemaError(f"{where}: expected a list of [key, value] pairs")
    pairs = []
    for item in raw:
        if not (isinstance(item, list) and len(item) == 2 and isinstance(item[0], str)):
            raise SchemaError(f"{where}: expected a [key, value] pair")
        _check_ident(item[0], where)
        pairs.append((item[0], item[1]))
    return pairs


def expr_from_json(raw: Any, where: str = "expr") -> Expr:
    op = _need(raw, "op", str, where)
    if op == "lit":
        return Literal(_value(raw.get("value"), where))
    if op == "attr":
        return AttrRef(_name(raw, "name", where))
    if op == "has":
        return HasAttr(_name(raw, "name", where))
    if op == "read":
        return StoreRead(_name(raw, "name", where))
    if op == "record":
        fields = _pairs(_need(raw, "fields", list, where), where)
        return Record(tuple((k, expr_from_json(v, f"{where}.{k}")) for k, v in fields))
    if op == "cmp":
        cmp = _need(raw, "cmp", str, where)
        if cmp not in COMPARISONS:
            raise SchemaError(f"{where}: unknown comparison {cmp!r}")
        return Compare(cmp, expr_from_json(raw.get("left"), where), expr_from_json(raw.get("right"), where))
    if op == "in":
        return Member(expr_from_json(raw.get("record"), where), _name(raw, "store", where))
    if op in ("and", "or"):
        args = _need(raw, "args", list, where)
        if len(args) < 2:
            raise SchemaError(f"{where}: `{op}` needs at least two operands")
        return BoolOp(op, tuple(expr_from_json(a, where) for a in args))
    if op == "not":
        return Not(expr_from_json(raw.get("arg"), where))
    raise SchemaError(f"{where}: unknown expression op {op!r}")


def _record_from_json(raw: Any, where: str) -> Record:
    expr = expr_from_json(raw, where)
    if not isinstance(expr, Record):
        raise SchemaError(f"{where}: expected a record")
    return expr


def action_from_json(raw: Any, where: str = "action") -> Action:
    kind = _need(raw, "action", str, where)
    if kind == "incr":
        return Incr(_name(raw, "store", where))
    if kind == "insert":
        return Insert(_name(raw, "store", where), _record_from_json(raw.get("record"), where))
    if kind == "set":
        return SetAttr(_name(raw, "name", where), expr_from_json(raw.get("value"), where))
    if kind == "drop":
        return Drop()
    if kind == "log":
        return Log(expr_from_json(raw.get("message"), where))
    if kind == "noop":
        return NoOp()
    raise SchemaError(f"{where}: unknown action {kind!r}")


def _optional_expr(raw: Any, where: str) -> Optional[Expr]:
    return None if raw is None else expr_from_json(raw, where)


def _enum(cls, raw: Any, where: str):
    try:
        return cls(raw)
    except ValueError:
        raise SchemaError(f"{where}: unknown kind {raw!r}")


def _state_from_json(raw: Any, where: str) -> StateDecl:
    name = _name(raw, "name", where)
    kind = _enum(StateKind, _need(raw, "kind", str, where), where)
    if kind is StateKind.COUNTER:
        return StateDecl(name, kind, value=_need(raw, "value", int, where))
    rows = tuple(
        tuple((k, _value(v, f"{where}.{k}")) for k, v in _pairs(row, where))
        for row in _need(raw, "rows", list, where)
    )
    return StateDecl(name, kind, rows=rows)


def _stage_from_json(raw: Any, where: str) -> Stage:
    name = _name(raw, "name", where)
    where = f"{where}.{name}"
    kind = _enum(StageKind, _need(raw, "kind", str, where), where)
    branches = []
    for b in _need(raw, "branches", list, where):
        branches.append(
            Branch(
                _optional_expr(_need(b, "guard", (dict, type(None)), where), where),
                _path(_need(b, "target", str, where), where),
                tuple(action_from_json(a, where) for a in _need(b, "actions", list, where)),
            )
        )
    actions = [action_from_json(a, where) for a in _need(raw, "actions", list, where)]
    return Stage(name, kind, branches, actions)


def _machine_from_json(raw: Any, where: str) -> Machine:
    name = _name(raw, "name", where)
    where = f"{where}.{name}" if where else name
    return Machine(
        name=name,
        stages=[_stage_from_json(s, where) for s in _need(raw, "stages", list, where)],
        submachines=[_machine_from_json(m, where) for m in _need(raw, "machines", list, where)],
        state=[_state_from_json(d, where) for d in _need(raw, "state", list, where)],
    )


def _trigger_from_json(raw: Any) -> TriggerArc:
    where = "trigger"
    template = None
    raw_template = _need(raw, "template", (dict, type(None)), where)
    if raw_template is not None:
        attrs = _pairs(_need(raw_template, "attrs", list, where), where)
        template = ThingTemplate(
            _name(raw_template, "type", where),
            tuple((k, expr_from_json(v, where)) for k, v in attrs),
        )
    return TriggerArc(
        _path(_need(raw, "src", str, where), where),
        _path(_need(raw, "dst", str, where), where),
        _optional_expr(_need(raw, "guard", (dict, type(None)), where), where),
        template,
    )


def from_document(doc: Any) -> Model:
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object")
    if "schema" not in doc:
        raise SchemaError("missing schema version field")
    if doc["schema"] != SCHEMA:
        raise SchemaError(f"unsupported schema {doc['schema']!r} (expected {SCHEMA})")
    model = Model(name=_need(doc, "name", str, "model"))
    model.machines = [_machine_from_json(m, "") for m in _need(doc, "machines", list, "model")]
    model.flows = [
        FlowArc(_path(_need(f, "src", str, "flow"), "flow"), _path(_need(f, "dst", str, "flow"), "flow"))
        for f in _need(doc, "flows", list, "model")
    ]
    model.triggers = [_trigger_from_json(t) for t in _need(doc, "triggers", list, "model")]
    return model


def import_json(text: str) -> Model:
    """Inverse of :func:`export_json`.

    Raises:
        SchemaError: the text is not JSON, has no or a different ``schema``
            value, or a field is missing or of the wrong type
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"malformed JSON: {e}")
    return from_document(doc)
