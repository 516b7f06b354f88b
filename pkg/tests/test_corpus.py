import textwrap

import pytest

from src.corpus import (
    find_scenario,
    load_all_scenarios,
    load_corpus,
    load_model,
    parse_scenarios,
    run_all,
    run_scenario,
)
from src.model.errors import CorpusIntegrityError, ScenarioError
from src.model.ops import resolve


@pytest.fixture(scope="module")
def scenarios():
    return load_all_scenarios()


@pytest.fixture(scope="module")
def reports(scenarios):
    return run_all(scenarios)


def test_load_corpus():
    entries = load_corpus()
    names = [model.name for model, _ in entries]

    assert sorted(names) == ["asa", "internal", "servers", "thinging_machine"]
    assert sum(len(s) for _, s in entries) >= 15
    generic = dict((m.name, s) for m, s in entries)["thinging_machine"]
    assert generic == []


def test_every_scenario_passes(reports):
    failures = [r.summary() + " " + "; ".join(f"{f.note}: {f.detail}" for f in r.failures) for r in reports if not r.passed]

    assert failures == []


def test_every_report_checks_conservation(reports):
    for report in reports:
        assert report.results[-1].kind == "conservation"
        assert report.outcome.conserved


@pytest.fixture(scope="module")
def models_by_scenario():
    return {s.name: model for model, scenarios in load_corpus() for s in scenarios}


def test_every_branching_visit_takes_exactly_one_branch(reports, models_by_scenario):
    for report in reports:
        model = models_by_scenario[report.scenario]
        for event in report.trace.events:
            if not event.is_visit:
                continue
            stage = resolve(model, event.stage).stage
            branches = [e for e in event.effects if e.kind == "branch"]
            where = f"{report.scenario} step {event.step} at {event.stage}"
            if not stage.branches:
                assert branches == [], where
            elif event.verb == "drop":
                assert len(branches) <= 1, where
            else:
                assert len(branches) == 1, where
                assert branches[0].after in {str(b.target) for b in stage.branches}, where


def test_things_keep_their_identity(reports):
    for report in reports:
        trace = report.trace
        known = {i.thing for i in trace.injections}
        ended = set()
        for event in trace.events:
            where = f"{report.scenario} step {event.step}"
            for effect in event.effects:
                if effect.kind == "set":
                    assert event.verb in ("process", "create"), where
                    assert effect.target.startswith("thing."), where
                if effect.kind in ("derive", "fire"):
                    assert effect.after not in known, where
                    assert effect.after > max(known), where
                    assert effect.before != effect.after, where
                    known.add(effect.after)
                if effect.kind == "derive":
                    assert event.thing == effect.after, where
                    ended.add(effect.before)
            assert event.thing in known, where
            if event.is_visit:
                assert event.thing not in ended, where


def test_asa_scenarios_cover_the_narrated_paths(scenarios):
    names = {s.name for s in scenarios}

    for required in (
        "syn_new_connection_acl_pass",
        "non_syn_drop",
        "acl_drop",
        "existing_connection_bypass",
        "three_syn_counter_ledger",
    ):
        assert required in names


def test_scenario_traces_are_deterministic(scenarios):
    first = [r.trace.to_jsonl() for r in run_all(scenarios)]
    second = [r.trace.to_jsonl() for r in run_all(scenarios)]

    assert first == second


def test_parallel_run_keeps_order(scenarios, reports):
    parallel = run_all(scenarios, workers=4)

    assert [r.scenario for r in parallel] == [s.name for s in scenarios]
    assert [r.trace.to_jsonl() for r in parallel] == [r.trace.to_jsonl() for r in reports]


def test_failing_expectation_is_reported(corpus_root):
    [scenario] = parse_scenarios(textwrap.dedent('''
        model: part_a/asa.tm
        scenarios:
          - name: wrong_counter
            inject:
              - at: asa.ingress.transfer_in
                attrs: {src: "203.0.113.1", dst: "10.1.2.10", proto: tcp, tcp_flag: syn}
            expect:
              - kind: counters
                note: deliberately wrong
                values: {asa.input_count: 2}
              - kind: attrs
                thing: 1
                note: egress route chosen by address translation
                values: {egress: "global_route", translated: true}
    '''), corpus_root)
    report = run_scenario(scenario)

    assert not report.passed
    assert [r.passed for r in report.results] == [False, True, True]
    assert report.failures[0].detail == "asa.input_count=1 (want 2)"
    assert report.summary() == "wrong_counter: FAILED (2/3 checks)"


def test_runtime_error_becomes_report_error(corpus_root):
    [scenario] = parse_scenarios(textwrap.dedent('''
        model: part_a/asa.tm
        scenarios:
          - name: missing_attribute
            inject:
              - at: asa.ingress.transfer_in
                attrs: {dst: "10.1.2.10"}
            expect:
              - kind: drops
                count: 0
    '''), corpus_root)
    report = run_scenario(scenario)

    assert not report.passed
    assert "no attribute `src`" in report.error
    assert report.trace is not None and report.trace.result == "error"


def test_scenario_max_steps_overrides_config(corpus_root):
    [scenario] = parse_scenarios(textwrap.dedent('''
        model: generic/thinging_machine.tm
        scenarios:
          - name: cycle
            max_steps: 7
            inject:
              - at: thimac.transfer_in
                attrs: {accepted: false}
            expect:
              - kind: fate
                thing: 1
                status: queued
    '''), corpus_root)
    report = run_scenario(scenario)

    assert report.passed
    assert report.trace.steps == 7


@pytest.mark.parametrize(
    "body, message",
    [
        ("model: x.tm\n", "missing `scenarios`"),
        ("- just a list\n", "expected a mapping"),
        ("model: x.tm\nscenarios:\n  - name: a\n    inject: []\n", "missing `expect`"),
        ("model: x.tm\nscenarios:\n  - name: a\n    inject: []\n    expect: [{kind: smell}]\n", "unknown expectation kind"),
        ("model: x.tm\nscenarios:\n  - name: a\n    inject: []\n    expect: [{kind: drops, count: yes}]\n", "must be an integer"),
        (
            "model: x.tm\nscenarios:\n  - name: a\n    inject: []\n    expect: [{kind: fate, thing: 1, status: lost}]\n",
            "status must be one of",
        ),
        (
            "model: x.tm\nscenarios:\n  - {name: a, inject: [], expect: []}\n  - {name: a, inject: [], expect: []}\n",
            "duplicate scenario name",
        ),
        ("model: [unclosed\n", "invalid YAML"),
    ],
)
def test_malformed_scenarios(corpus_root, body, message):
    with pytest.raises(ScenarioError, match=message):
        parse_scenarios(body, corpus_root)


def test_find_scenario():
    scenario = find_scenario("acl_drop")

    assert scenario is not None
    assert scenario.model_file == "part_a/asa.tm"
    assert find_scenario("no_such_scenario") is None


def test_invalid_corpus_model_is_an_integrity_error(tmp_path):
    path = tmp_path / "bad.tm"
    path.write_text('model "bad" {\n  machine m {\n    stage receive r {\n      incr nothing\n    }\n  }\n}\n')

    with pytest.raises(CorpusIntegrityError, match="V7"):
        load_model(path)
    with pytest.raises(CorpusIntegrityError):
        load_model(tmp_path / "missing.tm")


def test_orphan_scenarios_are_rejected(tmp_path):
    (tmp_path / "scenarios").mkdir()
    (tmp_path / "scenarios" / "s.yaml").write_text(
        "model: gone.tm\nscenarios:\n  - {name: a, inject: [], expect: []}\n"
    )

    with pytest.raises(CorpusIntegrityError, match="gone.tm"):
        load_corpus(tmp_path)
    with pytest.raises(CorpusIntegrityError):
        load_corpus(tmp_path / "nowhere")


def test_corpus_runs_quickly(reports):
    assert sum(r.elapsed for r in reports) < 5.0
