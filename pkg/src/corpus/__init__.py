from .loader import corpus_root, find_scenario, load_all_scenarios, load_corpus, load_model, model_files
from .scenario import (
    Expectation,
    ExpectationResult,
    InjectionSpec,
    Scenario,
    ScenarioReport,
    check_expectations,
    load_scenarios,
    parse_scenarios,
    run_all,
    run_scenario,
)

__all__ = [
    "Expectation",
    "ExpectationResult",
    "InjectionSpec",
    "Scenario",
    "ScenarioReport",
    "check_expectations",
    "corpus_root",
    "find_scenario",
    "load_all_scenarios",
    "load_corpus",
    "load_model",
    "load_scenarios",
    "model_files",
    "parse_scenarios",
    "run_all",
    "run_scenario",
]
