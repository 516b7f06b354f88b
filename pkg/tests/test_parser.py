import pytest

from src.dsl import parse
from src.dsl.parser import MAX_DEPTH
from src.model.errors import ParseError
from src.model.expr import BoolOp, Compare, HasAttr, Incr, Insert, Literal, Member, Not, SetAttr, StoreRead
from src.model.paths import StagePath
from src.model.types import StageKind, StateKind


def _errors(text: str):
    with pytest.raises(ParseError) as info:
        parse(text)
    return info.value.diagnostics


def test_parse_relay(relay_model):
    """Machines, stores, branches, flows and triggers keep textual order"""
    link = relay_model.machines[0]

    assert relay_model.name == "relay"
    assert [s.name for s in link.stages] == ["inbound", "receive", "check", "accepted", "outbound", "rejected"]
    assert [d.kind for d in link.state] == [StateKind.COUNTER, StateKind.TABLE]
    assert link.state[1].rows == ((("name", "h1"),),)
    assert len(relay_model.flows) == 5
    assert relay_model.triggers[0].template.type_name == "alert"

    check = link.stage("check")
    assert check.kind is StageKind.PROCESS
    assert check.actions == [Incr("seen")]
    assert isinstance(check.branches[0].guard, Member)
    assert check.branches[1].guard is None
    assert check.branches[1].target == StagePath.parse("link.rejected")


def test_expression_precedence():
    text = '''
    model "p" {
      machine m {
        state counter limit = 3
        stage process s {
          when not thing.a = 1 or thing.b < limit and has thing.c -> m.t
          else -> m.t
        }
        stage release t
        flow m.s -> m.t
      }
    }
    '''
    guard = parse(text).machines[0].stage("s").branches[0].guard

    assert isinstance(guard, BoolOp) and guard.op == "or"
    left, right = guard.args
    assert isinstance(left, Not) and isinstance(left.arg, Compare)
    assert isinstance(right, BoolOp) and right.op == "and"
    assert right.args[0] == Compare("<", right.args[0].left, StoreRead("limit"))
    assert isinstance(right.args[1], HasAttr)


def test_branch_action_list_and_negative_integers():
    text = '''
    model "p" {
      machine m {
        state counter n = -4
        state table t
        stage process s {
          when true -> m.r do incr n, insert t {k: -1}, set thing.x = "y"
        }
        stage release r
        flow m.s -> m.r
      }
    }
    '''
    machine = parse(text).machines[0]
    actions = machine.stage("s").branches[0].actions

    assert machine.state[0].value == -4
    assert isinstance(actions[0], Incr)
    assert isinstance(actions[1], Insert)
    assert actions[1].record.fields[0][1] == Literal(-1)
    assert actions[2] == SetAttr("x", Literal("y"))


def test_flows_inside_machines_join_model_list():
    text = '''
    model "p" {
      machine a {
        stage transfer x
        flow a.x -> b.y
      }
      machine b {
        stage transfer y
      }
      flow b.y -> a.x
    }
    '''
    flows = parse(text).flows

    assert [(str(f.src), str(f.dst)) for f in flows] == [("a.x", "b.y"), ("b.y", "a.x")]


def test_comments_and_string_escapes():
    text = 'model "q\\"uote" {  # trailing comment\n  machine m {\n  }\n}\n'

    assert parse(text).name == 'q"uote'


def test_syntax_error_has_position():
    diagnostics = _errors('model "x" {\n  machine m {\n    stage teleport s\n  }\n}\n')

    assert len(diagnostics) == 1
    assert diagnostics[0].span.line == 3
    assert diagnostics[0].span.column == 11
    assert "teleport" in diagnostics[0].message
    assert "`create`" in diagnostics[0].expected


def test_unknown_keyword():
    diagnostics = _errors('model "x" {\n  gadget g\n}\n')

    assert "unknown keyword `gadget`" in diagnostics[0].message
    assert diagnostics[0].format("m.tm") == "m.tm:2:3: unknown keyword `gadget`"


def test_unterminated_string():
    diagnostics = _errors('model "x {\n}\n')

    assert diagnostics[0].message == "unterminated string literal"
    assert diagnostics[0].span.line == 1


def test_oversized_integer_literal():
    text = 'model "m" { machine a { state counter c = ' + "9" * 5000 + " } }"
    diagnostics = _errors(text)

    assert diagnostics[0].message == "integer literal too large"
    assert diagnostics[0].span.column == 43
    assert diagnostics[0].span.length == 5000


def test_second_pass_reports_every_problem():
    """Duplicate names, reserved words and type errors are all collected"""
    text = '''
    model "x" {
      machine m {
        state counter c = 0
        stage process s {
          when c = "text" -> m.r
          else -> m.r
        }
        stage release r
        stage release r
        stage release thing_ok
      }
      machine in_use {
      }
    }
    '''
    messages = [d.message for d in _errors(text)]

    assert "cannot compare int with str" in messages
    assert "duplicate stage name `r` in m" in messages
    assert len(messages) == 2


def test_reserved_word_cannot_name_a_stage():
    messages = [d.message for d in _errors('model "x" {\n  machine m {\n    stage release has\n  }\n}\n')]

    assert messages == ["`has` is a reserved word and cannot name a stage"]


def test_type_errors():
    text = '''
    model "x" {
      machine m {
        state counter c = 0
        stage process s {
          when thing.a < "b" -> m.r
          when c and true -> m.r
          else -> m.r do set thing.z = {k: 1}
        }
        stage release r
      }
    }
    '''
    messages = [d.message for d in _errors(text)]

    assert "`<` needs integer operands" in messages
    assert "`and` needs boolean operands, found int" in messages
    assert "thing attributes cannot hold records" in messages


def test_nesting_limit():
    deep = "(" * (MAX_DEPTH + 5) + "true" + ")" * (MAX_DEPTH + 5)
    text = f'model "x" {{\n  machine m {{\n    stage process s {{\n      when {deep} -> m.s\n    }}\n  }}\n}}\n'
    diagnostics = _errors(text)

    assert len(diagnostics) == 1
    assert diagnostics[0].span.line == 4


def test_trailing_input_rejected():
    diagnostics = _errors('model "x" {\n}\nmachine extra {}\n')

    assert "after the model" in diagnostics[0].message


def test_corpus_files_parse(corpus_file):
    model = parse(corpus_file.read_text(encoding="utf-8"))

    assert model.machines
