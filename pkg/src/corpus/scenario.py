"""Declarative simulation scenarios and the harness that checks them.

A scenario file is YAML: a ``model`` path relative to the corpus root and a
list of ``scenarios``, each with injections and expectations. See
``corpus/README.md`` for the full schema.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import yaml

from ..config.config_schema import SimulationSection
from ..config.logging_config import PerformanceLogger, TimingContext
from ..dsl.parser import parse_file
from ..model.errors import ScenarioError, TMError, UnknownThing
from ..model.types import Model
from ..simulation.engine import Outcome, SimState, init
from ..simulation.trace import Trace, stage_sequence

logger = logging.getLogger(__name__)

EXPECTATION_KINDS = ("sequence", "excludes", "counters", "drops", "logs", "fate", "attrs")
FATE_STATUSES = ("dropped", "terminal", "queued")
SEQUENCE_MATCHES = ("full", "prefix")


@dataclass(frozen=True)
class InjectionSpec:
    at: str
    attrs: Tuple[Tuple[str, Any], ...] = ()
    type_name: str = "packet"


@dataclass(frozen=True)
class Expectation:
    """One check against a finished run; ``params`` depend on ``kind``."""

    kind: str
    note: str
    params: Tuple[Tuple[str, Any], ...] = ()

    def get(self, key: str, default: Any = None) -> Any:
        return dict(self.params).get(key, default)


@dataclass(frozen=True)
class Scenario:
    name: str
    model_file: str
    model_path: Path
    description: str = ""
    injections: Tuple[InjectionSpec, ...] = ()
    expectations: Tuple[Expectation, ...] = ()
    max_steps: Optional[int] = None


@dataclass(frozen=True)
class ExpectationResult:
    kind: str
    note: str
    passed: bool
    detail: str = ""


@dataclass
class ScenarioReport:
    """Outcome of running one scenario."""

    scenario: str
    model: str
    results: List[ExpectationResult] = field(default_factory=list)
    error: Optional[str] = None
    trace: Optional[Trace] = None
    outcome: Optional[Outcome] = None
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return self.error is None and all(r.passed for r in self.results)

    @property
    def failures(self) -> List[ExpectationResult]:
        return [r for r in self.results if not r.passed]

    def summary(self) -> str:
        if self.error is not None:
            return f"{self.scenario}: ERROR {self.error}"
        status = "ok" if self.passed else "FAILED"
        ok = sum(1 for r in self.results if r.passed)
        return f"{self.scenario}: {status} ({ok}/{len(self.results)} checks)"


# -- loading ----------------------------------------------------------------


def _require(data: Mapping[str, Any], key: str, kind: type, where: str) -> Any:
    if key not in data:
        raise ScenarioError(f"{where}: missing `{key}`")
    value = data[key]
    if kind is int and isinstance(value, bool):
        raise ScenarioError(f"{where}: `{key}` must be an integer")
    if not isinstance(value, kind):
        raise ScenarioError(f"{where}: `{key}` must be a {kind.__name__}")
    return value


def _string_list(data: Mapping[str, Any], key: str, where: str) -> Tuple[str, ...]:
    values = _require(data, key, list, where)
    if not all(isinstance(v, str) for v in values):
        raise ScenarioError(f"{where}: `{key}` must list stage paths")
    return tuple(values)


def _expectation(data: Any, where: str) -> Expectation:
    if not isinstance(data, dict):
        raise ScenarioError(f"{where}: expectation must be a mapping")
    kind = _require(data, "kind", str, where)
    if kind not in EXPECTATION_KINDS:
        raise ScenarioError(f"{where}: unknown expectation kind `{kind}`")
    note = str(data.get("note", ""))
    params: Dict[str, Any] = {}
    if kind in ("sequence", "excludes", "fate", "attrs"):
        params["thing"] = _require(data, "thing", int, where)
    if kind in ("sequence", "excludes"):
        params["stages"] = _string_list(data, "stages", where)
    if kind == "sequence":
        match = data.get("match", "full")
        if match not in SEQUENCE_MATCHES:
            raise ScenarioError(f"{where}: match must be one of {list(SEQUENCE_MATCHES)}, got {match!r}")
        params["match"] = match
    if kind in ("counters", "attrs"):
        values = _require(data, "values", dict, where)
        params["values"] = tuple(sorted(values.items()))
    if kind in ("drops", "logs"):
        params["count"] = _require(data, "count", int, where)
    if kind == "fate":
        status = _require(data, "status", str, where)
        if status not in FATE_STATUSES:
            raise ScenarioError(f"{where}: status must be one of {list(FATE_STATUSES)}, got {status!r}")
        params["status"] = status
        if "stage" in data:
            params["stage"] = _require(data, "stage", str, where)
    return Expectation(kind, note, tuple(params.items()))


def _injection(data: Any, where: str) -> InjectionSpec:
    if not isinstance(data, dict):
        raise ScenarioError(f"{where}: injection must be a mapping")
    at = _require(data, "at", str, where)
    attrs = data.get("attrs") or {}
    if not isinstance(attrs, dict):
        raise ScenarioError(f"{where}: `attrs` must be a mapping")
    return InjectionSpec(at, tuple(attrs.items()), str(data.get("type", "packet")))


def parse_scenarios(text: str, root: Path, source: str = "<scenarios>") -> List[Scenario]:
    """
    Build scenarios from the YAML text of one scenario file.

    Args:
        text: YAML document
        root: Corpus root the ``model`` path is relative to
        source: Name used in error messages

    Returns:
        Scenarios in file order

    Raises:
        ScenarioError: malformed YAML or a missing or mistyped field
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ScenarioError(f"{source}: invalid YAML: {e}")
    if not isinstance(data, dict):
        raise ScenarioError(f"{source}: expected a mapping with `model` and `scenarios`")
    model_file = _require(data, "model", str, source)
    items = _require(data, "scenarios", list, source)

    scenarios: List[Scenario] = []
    seen = set()
    for index, item in enumerate(items, start=1):
        where = f"{source} scenario {index}"
        if not isinstance(item, dict):
            raise ScenarioError(f"{where}: must be a mapping")
        name = _require(item, "name", str, where)
        if name in seen:
            raise ScenarioError(f"{where}: duplicate scenario name `{name}`")
        seen.add(name)
        where = f"{source} scenario `{name}`"
        injections = tuple(
            _injection(x, f"{where} injection {i}")
            for i, x in enumerate(_require(item, "inject", list, where), start=1)
        )
        expectations = tuple(
            _expectation(x, f"{where} expectation {i}")
            for i, x in enumerate(_require(item, "expect", list, where), start=1)
        )
        max_steps = item.get("max_steps")
        if max_steps is not None and (isinstance(max_steps, bool) or not isinstance(max_steps, int)):
            raise ScenarioError(f"{where}: `max_steps` must be an integer")
        scenarios.append(Scenario(
            name=name,
            model_file=model_file,
            model_path=root / model_file,
            description=str(item.get("description", "")),
            injections=injections,
            expectations=expectations,
            max_steps=max_steps,
        ))
    return scenarios


def load_scenarios(path: Path, root: Optional[Path] = None) -> List[Scenario]:
    """Read one scenario file; ``root`` defaults to the file's grandparent."""
    path = Path(path)
    root = Path(root) if root is not None else path.parent.parent
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"cannot read {path}: {e}")
    return parse_scenarios(text, root, str(path))


# -- checking ---------------------------------------------------------------


def _check_sequence(exp: Expectation, sim: SimState) -> Tuple[bool, str]:
    want = list(exp.get("stages"))
    got = stage_sequence(sim.trace, exp.get("thing"))
    if exp.get("match") == "prefix":
        ok = got[: len(want)] == want
    else:
        ok = got == want
    return ok, "" if ok else f"thing #{exp.get('thing')} visited {got}"


def _check_excludes(exp: Expectation, sim: SimState) -> Tuple[bool, str]:
    got = stage_sequence(sim.trace, exp.get("thing"))
    hit = [s for s in exp.get("stages") if s in got]
    return not hit, f"visited {hit}" if hit else ""


def _check_counters(exp: Expectation, sim: SimState) -> Tuple[bool, str]:
    stores = sim.store.snapshot()
    wrong = []
    for key, want in exp.get("values"):
        have = stores.get(key, "<undeclared>")
        if have != want:
            wrong.append(f"{key}={have} (want {want})")
    return not wrong, ", ".join(wrong)


def _check_count(verb: str) -> Callable[[Expectation, SimState], Tuple[bool, str]]:
    def check(exp: Expectation, sim: SimState) -> Tuple[bool, str]:
        have = len(sim.trace.verbs(verb))
        return have == exp.get("count"), f"{have} {verb} events (want {exp.get('count')})"

    return check


def _check_fate(exp: Expectation, sim: SimState) -> Tuple[bool, str]:
    thing = exp.get("thing")
    fate = sim.fates.get(thing)
    if fate is None:
        return False, f"thing #{thing} never existed"
    ok = fate.status == exp.get("status") and exp.get("stage", fate.stage) == fate.stage
    return ok, "" if ok else f"thing #{thing} is {fate.status} at {fate.stage}"


def _check_attrs(exp: Expectation, sim: SimState) -> Tuple[bool, str]:
    thing = sim.things.get(exp.get("thing"))
    if thing is None:
        return False, f"thing #{exp.get('thing')} never existed"
    wrong = []
    for key, want in exp.get("values"):
        have = thing.attrs.get(key, "<unset>")
        if type(have) is not type(want) or have != want:
            wrong.append(f"{key}={have!r} (want {want!r})")
    return not wrong, ", ".join(wrong)


_CHECKS: Dict[str, Callable[[Expectation, SimState], Tuple[bool, str]]] = {
    "sequence": _check_sequence,
    "excludes": _check_excludes,
    "counters": _check_counters,
    "drops": _check_count("drop"),
    "logs": _check_count("log"),
    "fate": _check_fate,
    "attrs": _check_attrs,
}


def check_expectations(scenario: Scenario, sim: SimState) -> List[ExpectationResult]:
    """Check every expectation of ``scenario`` against a finished run, then
    conservation: injected plus created things equal dropped plus terminal
    plus queued things."""
    results = []
    for exp in scenario.expectations:
        try:
            ok, detail = _CHECKS[exp.kind](exp, sim)
        except UnknownThing as e:
            ok, detail = False, str(e)
        results.append(ExpectationResult(exp.kind, exp.note, ok, "" if ok else detail))
    outcome = sim.outcome()
    results.append(ExpectationResult(
        "conservation",
        "injected + created = dropped + terminal + queued",
        outcome.conserved,
        "" if outcome.conserved else str(outcome.counts),
    ))
    return results


def run_scenario(
    scenario: Scenario,
    model: Optional[Model] = None,
    config: Optional[SimulationSection] = None,
    perf: Optional[PerformanceLogger] = None,
) -> ScenarioReport:
    """
    Run one scenario and check its expectations.

    Args:
        scenario: Scenario to run
        model: Already parsed model; read from ``scenario.model_path`` when omitted
        config: Simulation limits; a scenario's own ``max_steps`` wins
        perf: Collects the run time under ``scenario``

    Returns:
        The report; simulator and model errors are recorded, not raised
    """
    perf = perf or PerformanceLogger()
    report = ScenarioReport(scenario.name, scenario.model_file)
    base = config or SimulationSection()
    if scenario.max_steps is not None:
        base = SimulationSection(max_steps=scenario.max_steps, seed=base.seed)

    with TimingContext(perf, "scenario") as timer:
        try:
            if model is None:
                model = parse_file(scenario.model_path)
            sim = init(model, base)
            for spec in scenario.injections:
                sim.inject(spec.at, dict(spec.attrs), spec.type_name)
            report.trace = sim.run()
        except (TMError, OSError, ValueError) as e:
            report.error = str(e)
            report.trace = getattr(e, "trace", None)
            logger.warning(f"Scenario {scenario.name!r} failed to run: {e}")
        else:
            report.results = check_expectations(scenario, sim)
            report.outcome = sim.outcome()
    report.elapsed = timer.elapsed
    logger.info(f"Scenario {report.summary()} in {report.elapsed:.3f}s")
    return report


def run_all(
    scenarios: Sequence[Scenario],
    workers: int = 1,
    config: Optional[SimulationSection] = None,
) -> List[ScenarioReport]:
    """
    Run many scenarios, in a thread pool when ``workers`` > 1.

    Each model file is parsed once and shared read-only between runs.

    Returns:
        Reports in the order of ``scenarios``
    """
    perf = PerformanceLogger()
    models: Dict[Path, Optional[Model]] = {}
    for scenario in scenarios:
        if scenario.model_path not in models:
            try:
                models[scenario.model_path] = parse_file(scenario.model_path)
            except (TMError, OSError) as e:
                logger.error(f"Cannot load {scenario.model_path}: {e}")
                models[scenario.model_path] = None

    def one(scenario: Scenario) -> ScenarioReport:
        model = models[scenario.model_path]
        if model is None:
            return ScenarioReport(scenario.name, scenario.model_file, error=f"model {scenario.model_file} does not parse")
        return run_scenario(scenario, model, config, perf)

    if workers <= 1:
        reports = [one(s) for s in scenarios]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(one, scenarios))

    passed = sum(1 for r in reports if r.passed)
    logger.info(f"Scenarios: {passed}/{len(reports)} passed in {perf.total('scenario'):.3f}s")
    perf.log_metrics()
    return reports
