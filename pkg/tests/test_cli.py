import pygraphviz as pgv
import pytest

from src.cli import ExitCode, main, parse_injection
from src.cli import UsageError
from src.simulation import init
from tests.conftest import ASA, CORPUS, RELAY


@pytest.fixture(autouse=True)
def plain_environment(monkeypatch):
    monkeypatch.delenv("TM_CONFIG", raising=False)
    monkeypatch.delenv("TM_LOG_LEVEL", raising=False)
    monkeypatch.setenv("TM_NO_COLOR", "1")


def test_validate_corpus_model(capsys):
    assert main(["validate", str(ASA)]) == ExitCode.OK
    assert capsys.readouterr().err == ""


def test_validate_reports_errors(tmp_path, capsys, asa_text):
    broken = tmp_path / "broken.tm"
    broken.write_text(asa_text.replace(
        "flow asa.ingress.release_new -> asa.ingress.to_tcp_state",
        "flow asa.ingress.release_new -> asa.ingress.check",
    ))

    assert main(["validate", str(broken)]) == ExitCode.INVALID
    assert "error V1 asa.ingress.release_new" in capsys.readouterr().err


def test_exit_codes_for_unreadable_and_unparsable_files(tmp_path, capsys):
    bad = tmp_path / "bad.tm"
    bad.write_text("model {\n")

    assert main(["validate", str(tmp_path / "missing.tm")]) == ExitCode.USAGE
    assert "cannot read" in capsys.readouterr().err
    assert main(["validate", str(bad)]) == ExitCode.PARSE_ERROR
    assert f"{bad}:1:" in capsys.readouterr().err

    huge = tmp_path / "huge.tm"
    huge.write_text('model "m" { machine a { state counter c = ' + "9" * 5000 + " } }")
    assert main(["validate", str(huge)]) == ExitCode.PARSE_ERROR
    assert "integer literal too large" in capsys.readouterr().err


def test_bad_arguments_exit_with_usage_code(capsys):
    with pytest.raises(SystemExit) as info:
        main(["explode"])
    assert info.value.code == ExitCode.USAGE
    with pytest.raises(SystemExit) as info:
        main(["sim", str(ASA), "--max-steps", "-1"])
    assert info.value.code == ExitCode.USAGE


def test_render_to_stdout_and_file(tmp_path, capsys):
    assert main(["render", str(ASA), "--collapse", "asa.acl", "--rankdir", "TB"]) == ExitCode.OK
    graph = pgv.AGraph(string=capsys.readouterr().out)
    assert graph.name == "asa"
    assert graph.graph_attr["rankdir"] == "TB"
    assert graph.get_node("asa.acl").attr["shape"] == "box3d"

    target = tmp_path / "out" / "asa.dot"
    assert main(["render", str(ASA), "-o", str(target)]) == ExitCode.OK
    assert pgv.AGraph(filename=str(target)).graph_attr["rankdir"] == "LR"


def test_render_unknown_option_is_usage_error(capsys):
    assert main(["render", str(ASA), "--collapse", "asa.nothing"]) == ExitCode.USAGE


def test_render_highlight_from_trace(tmp_path, capsys):
    trace = tmp_path / "drop.jsonl"

    assert main(["sim", str(ASA), "--scenario", "non_syn_drop", "--trace", str(trace)]) == ExitCode.OK
    capsys.readouterr()
    assert main(["render", str(ASA), "--highlight", str(trace)]) == ExitCode.OK
    graph = pgv.AGraph(string=capsys.readouterr().out)
    assert graph.get_node("asa.tcp_state.dropped").attr["fillcolor"] == "gold"
    assert graph.get_node("asa.acl.dropped").attr["style"] == "rounded"


def test_highlight_trace_for_another_model(tmp_path, forge_model):
    sim = init(forge_model)
    sim.inject("m.inbound")
    trace = tmp_path / "forge.jsonl"
    trace.write_text(sim.run().to_jsonl())

    assert main(["render", str(ASA), "--highlight", str(trace)]) == ExitCode.USAGE


def test_sim_scenario(capsys):
    assert main(["sim", str(ASA), "--scenario", "non_syn_drop"]) == ExitCode.OK
    out = capsys.readouterr().out

    assert "scenario non_syn_drop: passed" in out
    assert "dropped at asa.tcp_state.dropped" in out
    assert "asa.log.entries = 1" in out


def test_sim_scenario_for_another_file(capsys):
    assert main(["sim", str(CORPUS / "part_b" / "internal.tm"), "--scenario", "non_syn_drop"]) == ExitCode.USAGE
    assert "written for part_a/asa.tm" in capsys.readouterr().err


def test_sim_inject(capsys):
    argv = ["sim", str(ASA), "--inject", "asa.ingress.transfer_in src=203.0.113.5,dst=10.1.2.10,tcp_flag=syn,proto=tcp"]

    assert main(argv) == ExitCode.OK
    out = capsys.readouterr().out
    assert "result: idle" in out
    assert "asa.input_count = 1" in out


def test_sim_inject_at_receive_stage(capsys):
    assert main(["sim", str(ASA), "--inject", "asa.ingress.receive src=a"]) == ExitCode.USAGE


def test_sim_needs_scenario_or_injection(capsys):
    assert main(["sim", str(ASA)]) == ExitCode.USAGE


def test_sim_zero_steps(capsys):
    argv = ["sim", str(ASA), "--max-steps", "0", "--inject", "asa.ingress.transfer_in src=a,dst=b"]

    assert main(argv) == ExitCode.OK
    assert "result: halted after 0 steps, 0 events" in capsys.readouterr().out


def test_sim_runtime_error(capsys):
    assert main(["sim", str(ASA), "--inject", "asa.ingress.transfer_in dst=10.1.2.10"]) == ExitCode.RUNTIME_ERROR
    assert "simulation error" in capsys.readouterr().err


def test_fmt_check_and_rewrite(tmp_path, capsys):
    path = tmp_path / "m.tm"
    path.write_text('model "m" {\n   machine m {  stage transfer t\n\n\n  }\n}\n')

    assert main(["fmt", "--check", str(path)]) == ExitCode.INVALID
    assert "not in canonical form" in capsys.readouterr().err
    assert main(["fmt", str(path)]) == ExitCode.OK
    assert main(["fmt", "--check", str(path)]) == ExitCode.OK
    assert list(tmp_path.iterdir()) == [path]


def test_stats(capsys):
    assert main(["stats", str(CORPUS / "generic" / "thinging_machine.tm")]) == ExitCode.OK
    out = capsys.readouterr().out

    assert "model thinging_machine" in out
    assert "triggers" in out


def test_strict_config_turns_warnings_into_failures(tmp_path, capsys):
    model = tmp_path / "warn.tm"
    model.write_text('model "w" {\n  machine m {\n    stage transfer t\n    stage release orphan\n  }\n}\n')
    config = tmp_path / "strict.yaml"
    config.write_text("validation:\n  strict: true\n")

    assert main(["validate", str(model)]) == ExitCode.OK
    assert main(["--config", str(config), "validate", str(model)]) == ExitCode.INVALID
    assert main(["validate", "--strict", str(model)]) == ExitCode.INVALID


def test_bad_config_is_usage_error(tmp_path, capsys):
    config = tmp_path / "bad.yaml"
    config.write_text("render:\n  rankdir: RL\n")

    assert main(["--config", str(config), "validate", str(ASA)]) == ExitCode.USAGE
    assert "bad configuration" in capsys.readouterr().err


def test_parse_injection():
    path, attrs = parse_injection('a.b x=1, y=true,z="q,r",w=tcp')

    assert path == "a.b"
    assert attrs == {"x": 1, "y": True, "z": "q,r", "w": "tcp"}
    assert parse_injection("a.b") == ("a.b", {})
    with pytest.raises(UsageError):
        parse_injection("a.b =1")
    with pytest.raises(UsageError):
        parse_injection("   ")


def test_failed_scenario_writes_no_trace(tmp_path, monkeypatch, capsys):
    corpus = tmp_path / "corpus"
    (corpus / "scenarios").mkdir(parents=True)
    model = corpus / "relay.tm"
    model.write_text(RELAY)
    (corpus / "scenarios" / "relay.yaml").write_text(
        "model: relay.tm\n"
        "scenarios:\n"
        "  - name: wrong_drop_count\n"
        "    inject:\n"
        "      - at: link.inbound\n"
        "        attrs: {host: h9}\n"
        "    expect:\n"
        "      - kind: drops\n"
        "        count: 0\n"
    )
    monkeypatch.setenv("TM_CORPUS_DIR", str(corpus))
    trace = tmp_path / "run.jsonl"

    assert main(["sim", str(model), "--scenario", "wrong_drop_count", "--trace", str(trace)]) == ExitCode.INVALID
    assert "scenario wrong_drop_count: FAILED" in capsys.readouterr().out
    assert not trace.exists()
