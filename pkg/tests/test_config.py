"""Test configuration sections, presets and environment settings"""

from pathlib import Path

import pytest

from src.config import (
    EnvConfig,
    PerformanceLogger,
    SimulationSection,
    TimingContext,
    ToolConfig,
    get_logger,
    setup_logging,
)

PRESETS = Path(__file__).resolve().parents[1] / "config"


def test_default_config():
    """Defaults need no file"""
    config = ToolConfig.default()

    assert config.simulation.max_steps == 10000
    assert config.render.rankdir == "LR"
    assert config.corpus.workers == 1
    assert config.corpus.root_path is None
    assert config.validation.strict is False


def test_presets_load():
    """The shipped presets are valid"""
    default = ToolConfig.from_yaml(PRESETS / "default.yaml")
    ci = ToolConfig.from_yaml(PRESETS / "ci.yaml")

    assert default.simulation.max_steps == 10000
    assert default.log_level == "WARNING"
    assert ci.validation.strict is True
    assert ci.corpus.workers == 4
    assert ci.simulation.max_steps == 5000


def test_yaml_round_trip(tmp_path):
    config = ToolConfig.from_dict({"simulation": {"max_steps": 42}, "render": {"rankdir": "TB"}, "log_level": "debug"})
    path = tmp_path / "saved" / "config.yaml"
    config.to_yaml(path)

    assert ToolConfig.from_yaml(path) == config
    assert config.log_level == "DEBUG"


@pytest.mark.parametrize(
    "data, message",
    [
        ({"simulation": {"max_steps": -1}}, "non-negative"),
        ({"simulation": {"max_steps": True}}, "must be an integer"),
        ({"corpus": {"workers": "4"}}, "Workers must be an integer"),
        ({"corpus": {"workers": True}}, "Workers must be an integer"),
        ({"render": {"rankdir": "RL"}}, "Rankdir"),
        ({"corpus": {"workers": 0}}, "at least 1"),
        ({"validation": {"strict": "yes"}}, "boolean"),
        ({"log_level": "LOUD"}, "Log level"),
        ({"colour": True}, "Unknown configuration keys"),
        ({"render": {"shape": "box"}}, "Unknown keys in section 'render'"),
        ({"render": "LR"}, "must be a mapping"),
    ],
)
def test_invalid_config(data, message):
    with pytest.raises(ValueError, match=message):
        ToolConfig.from_dict(data)


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(FileNotFoundError):
        ToolConfig.from_yaml(tmp_path / "nope.yaml")

    bad = tmp_path / "bad.yaml"
    bad.write_text("simulation: [unclosed\n")
    with pytest.raises(ValueError, match="Invalid YAML"):
        ToolConfig.from_yaml(bad)


def test_empty_file_means_defaults(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")

    assert ToolConfig.from_yaml(path) == ToolConfig.default()


def test_simulation_section_direct():
    assert SimulationSection(max_steps=0).max_steps == 0
    with pytest.raises(ValueError):
        SimulationSection(seed="x")


def test_env_config(monkeypatch, tmp_path):
    """Environment values are read on every call"""
    for name in ("TM_NO_COLOR", "TM_CORPUS_DIR", "TM_LOG_LEVEL", "TM_CONFIG", "TM_FUZZ_EXAMPLES", "TM_PROPERTY_EXAMPLES"):
        monkeypatch.delenv(name, raising=False)

    assert EnvConfig.no_color() is False
    assert EnvConfig.corpus_dir().name == "corpus"
    assert EnvConfig.log_level() == "WARNING"
    assert EnvConfig.config_path() is None
    assert EnvConfig.fuzz_examples() == 2000
    assert EnvConfig.property_examples() == 100

    monkeypatch.setenv("TM_NO_COLOR", "1")
    monkeypatch.setenv("TM_CORPUS_DIR", str(tmp_path))
    monkeypatch.setenv("TM_LOG_LEVEL", "debug")
    monkeypatch.setenv("TM_FUZZ_EXAMPLES", "50000")
    assert EnvConfig.no_color() is True
    assert EnvConfig.corpus_dir() == tmp_path
    assert EnvConfig.log_level() == "DEBUG"
    assert EnvConfig.fuzz_examples() == 50000

    monkeypatch.setenv("TM_PROPERTY_EXAMPLES", "many")
    with pytest.raises(ValueError, match="TM_PROPERTY_EXAMPLES"):
        EnvConfig.property_examples()


def test_setup_logging_writes_to_file(tmp_path):
    log_file = tmp_path / "logs" / "tm.log"
    logger = setup_logging(level="DEBUG", log_file=log_file, console_output=False)
    get_logger("cli").info("hello from the cli")

    for handler in logger.handlers:
        handler.flush()
    assert logger.name == "src"
    assert "src.cli - INFO - hello from the cli" in log_file.read_text()
    setup_logging(level="WARNING", console_output=False)


def test_timing_context_records_metric():
    perf = PerformanceLogger()
    with TimingContext(perf, "step") as timer:
        pass
    with TimingContext(perf, "step"):
        pass

    assert timer.elapsed >= 0
    assert len(perf.metrics["step"]) == 2
    assert perf.total("step") >= timer.elapsed
    perf.clear_metrics()
    assert perf.metrics == {}
