import json

import pytest

from src.dsl import parse
from src.validate import ERROR, WARNING, Diagnostic, error_codes, errors_only, validate

# Each mutation breaks exactly one rule of the ASA model.
MUTATIONS = {
    "V1": (
        "flow asa.ingress.release_new -> asa.ingress.to_tcp_state",
        "flow asa.ingress.release_new -> asa.ingress.check",
    ),
    "V2": (
        "flow asa.ingress.to_tcp_state -> asa.tcp_state.transfer_in",
        "flow asa.ingress.to_tcp_state -> asa.tcp_state.receive",
    ),
    "V3": (
        "    machine ingress {\n",
        "    machine ingress {\n      state counter input_count = 0\n",
    ),
    "V4": (
        "        else -> asa.acl.dropped\n",
        "",
    ),
    "V5": (
        "  trigger asa.tcp_state.dropped",
        "  flow asa.nope.x -> asa.egress.transfer_in\n  trigger asa.tcp_state.dropped",
    ),
    "V6": (
        "trigger asa.acl.dropped -> asa.log.entry",
        "trigger asa.acl.dropped -> asa.log.archived",
    ),
    "V7": (
        "incr input_count",
        "incr input_cnt",
    ),
}


def _mutate(text: str, old: str, new: str) -> str:
    assert text.count(old) == 1, f"mutation anchor {old!r} is not unique"
    return text.replace(old, new)


def test_corpus_models_have_no_diagnostics(corpus_file):
    """Corpus models validate clean, warnings included"""
    diagnostics = validate(parse(corpus_file.read_text(encoding="utf-8")))

    assert [d.format() for d in diagnostics] == []


@pytest.mark.parametrize("code", sorted(MUTATIONS))
def test_mutation_triggers_exactly_one_rule(asa_text, code):
    old, new = MUTATIONS[code]
    diagnostics = validate(parse(_mutate(asa_text, old, new)))

    assert error_codes(diagnostics) == {code}


def test_v1_message_names_the_kinds(asa_text):
    old, new = MUTATIONS["V1"]
    errors = errors_only(validate(parse(_mutate(asa_text, old, new))))

    assert errors[0].path == "asa.ingress.release_new"
    assert "release -> process" in errors[0].message


def test_v4_reports_missing_branch_and_exhaustiveness(asa_text):
    old, new = MUTATIONS["V4"]
    messages = [d.message for d in errors_only(validate(parse(_mutate(asa_text, old, new))))]

    assert "no branch leads to asa.acl.dropped" in messages
    assert any("not exhaustive" in m for m in messages)


def test_branch_target_without_flow_is_dangling():
    model = parse('''
    model "x" {
      machine m {
        stage transfer t
        stage receive r {
          when thing.ok = true -> m.p
          else -> m.q
        }
        stage process p
        stage release q
        flow m.t -> m.r
        flow m.r -> m.p
      }
    }
    ''')
    errors = errors_only(validate(model))

    assert [d.code for d in errors] == ["V5"]
    assert "not reached by a flow" in errors[0].message


def test_state_type_mismatch_is_v7():
    model = parse('''
    model "x" {
      machine m {
        state table seen
        stage transfer t
        stage receive r {
          incr seen
        }
        flow m.t -> m.r
      }
    }
    ''')

    assert [d.message for d in errors_only(validate(model))] == ["`seen` is a table but is used as a counter"]


def test_stage_and_submachine_clash():
    model = parse('''
    model "x" {
      machine m {
        stage transfer sub
        machine sub {
          stage transfer t
        }
      }
      machine m2 {
      }
    }
    ''')

    assert "`sub` in m names both a stage and a submachine" in [d.message for d in validate(model)]


def test_warnings_for_unfed_receive_and_unreachable_stage():
    model = parse('''
    model "x" {
      machine m {
        stage receive r
        stage process p
        stage release q
        flow m.r -> m.p
        flow m.p -> m.q
      }
    }
    ''')
    diagnostics = validate(model)

    assert error_codes(diagnostics) == set()
    assert [(d.code, d.path) for d in diagnostics] == [
        ("V8", "m.r"),
        ("V9", "m.r"),
        ("V9", "m.p"),
        ("V9", "m.q"),
    ]
    assert all(d.severity == WARNING for d in diagnostics)


def test_overlapping_guards_warn():
    model = parse('''
    model "x" {
      machine m {
        stage transfer t
        stage receive r {
          when thing.a = 1 -> m.p
          when thing.a = 1 -> m.q
          else -> m.q
        }
        stage process p
        stage release q
        flow m.t -> m.r
        flow m.r -> m.p
        flow m.r -> m.q
      }
    }
    ''')
    diagnostics = validate(model)

    assert [(d.code, d.severity, d.message) for d in diagnostics] == [
        ("V4", WARNING, "branch 2 repeats an earlier guard"),
    ]


def test_diagnostics_ordered_by_rule(asa_text):
    text = asa_text
    for code in ("V7", "V2", "V6"):
        text = _mutate(text, *MUTATIONS[code])
    codes = [d.code for d in errors_only(validate(parse(text)))]

    assert codes == sorted(codes)
    assert set(codes) == {"V2", "V6", "V7"}


def test_diagnostic_formats():
    diagnostic = Diagnostic("V6", ERROR, "asa.acl.dropped", "bad target")

    assert diagnostic.format() == "error V6 asa.acl.dropped: bad target"
    assert json.loads(diagnostic.to_json()) == {
        "code": "V6",
        "severity": "error",
        "path": "asa.acl.dropped",
        "message": "bad target",
    }
    assert diagnostic.to_json().index('"code"') < diagnostic.to_json().index('"path"')
