import pytest

from src.model import (
    DuplicateName,
    Machine,
    Model,
    PathIsMachine,
    Stage,
    StageKind,
    StagePath,
    StateDecl,
    StateKind,
    UnknownParent,
    UnknownPath,
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
from src.model.ops import lookup_state
from src.dsl.parser import parse_file
from tests.conftest import CORPUS


def _skeleton() -> Model:
    model = Model(name="net")
    add_machine(model, None, Machine("fw"))
    add_machine(model, "fw", Machine("ingress"))
    add_stage(model, "fw.ingress", Stage("transfer_in", StageKind.TRANSFER))
    add_stage(model, "fw.ingress", Stage("receive", StageKind.RECEIVE))
    return model


def test_build_and_resolve():
    """Stages added through the ops resolve by absolute path"""
    model = _skeleton()
    ref = resolve(model, "fw.ingress.receive")

    assert ref.kind is StageKind.RECEIVE
    assert ref.machine.name == "ingress"
    assert ref.path == StagePath(("fw", "ingress", "receive"))
    assert path_of(model, ref.stage) == ref.path


def test_add_flow_returns_arc_index():
    model = _skeleton()
    first = add_flow(model, "fw.ingress.transfer_in", "fw.ingress.receive")

    assert first == 0
    assert model.flows[0].dst == StagePath.parse("fw.ingress.receive")


def test_duplicate_names_rejected():
    model = _skeleton()

    with pytest.raises(DuplicateName):
        add_machine(model, "fw", Machine("ingress"))
    with pytest.raises(DuplicateName):
        add_stage(model, "fw.ingress", Stage("receive", StageKind.PROCESS))
    add_state(model, "fw", StateDecl("hits", StateKind.COUNTER))
    with pytest.raises(DuplicateName):
        add_state(model, "fw", StateDecl("hits", StateKind.TABLE))


def test_unknown_parent():
    with pytest.raises(UnknownParent):
        add_machine(_skeleton(), "nope", Machine("x"))


def test_resolve_errors():
    """A machine path is not a stage, and a missing path is unknown"""
    model = _skeleton()

    with pytest.raises(PathIsMachine):
        resolve(model, "fw.ingress")
    with pytest.raises(UnknownPath):
        resolve(model, "fw.ingress.nothing")
    with pytest.raises(UnknownPath):
        resolve(model, "")
    with pytest.raises(UnknownPath):
        add_flow(model, "fw.ingress.receive", "fw.egress.transfer_in")
    assert try_resolve(model, "fw.bad-segment.x") is None


def test_add_trigger_resolves_both_ends():
    model = _skeleton()
    add_machine(model, None, Machine("log", stages=[Stage("entry", StageKind.CREATE)]))

    assert add_trigger(model, "fw.ingress.receive", "log.entry") == 0
    with pytest.raises(UnknownPath):
        add_trigger(model, "fw.ingress.receive", "log.missing")


def test_path_helpers():
    path = StagePath.parse("asa.ingress.check")

    assert path.parent == ("asa", "ingress")
    assert path.name == "check"
    assert str(path.child("x")) == "asa.ingress.check.x"
    assert path.is_within(("asa",))
    assert not path.is_within(("asa", "ingress", "check"))


def test_declaration_order_is_kept():
    model = _skeleton()
    names = [str(p) for p, _ in model.iter_stages()]

    assert names == ["fw.ingress.transfer_in", "fw.ingress.receive"]
    assert [segs for segs, _ in model.iter_machines()] == [("fw",), ("fw", "ingress")]


def test_state_lookup_walks_enclosing_machines(asa_model):
    """Stages see their machine's stores first, then their ancestors'"""
    found = lookup_state(asa_model, StagePath.parse("asa.acl.check"), "acl_hit_count")

    assert found is not None
    assert found[0] == ("asa",)
    assert lookup_state(asa_model, StagePath.parse("asa.acl.check"), "entries") is None
    assert resolve_machine(asa_model, "asa.log").state_decl("entries") is not None


def test_generic_model_stats():
    stats = model_stats(parse_file(CORPUS / "generic" / "thinging_machine.tm"))

    assert stats["machines"] == 1
    assert stats["stages"] == 5
    assert stats["flows"] == 8
    assert stats["triggers"] == 0
    assert stats["max_depth"] == 1
    assert stats["stages_by_kind"] == {"create": 1, "process": 1, "release": 1, "transfer": 1, "receive": 1}


def test_depth():
    assert depth(Model("empty")) == 0
    assert depth(_skeleton()) == 2
