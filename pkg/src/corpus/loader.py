"""Loading the case-study corpus: ``.tm`` models plus their scenarios."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from ..config.env_config import EnvConfig
from ..dsl.parser import parse_file
from ..model.errors import CorpusIntegrityError, ParseError
from ..model.types import Model
from ..validate.rules import errors_only, validate
from .scenario import Scenario, load_scenarios

logger = logging.getLogger(__name__)

SCENARIO_DIR = "scenarios"


def corpus_root(root: Optional[Path] = None) -> Path:
    """``root`` if given, otherwise ``TM_CORPUS_DIR`` or the repository ``corpus/``."""
    return Path(root) if root is not None else EnvConfig.corpus_dir()


def model_files(root: Optional[Path] = None) -> List[Path]:
    """Every ``.tm`` file under the corpus root, sorted by relative path."""
    base = corpus_root(root)
    return sorted(base.rglob("*.tm"), key=lambda p: p.relative_to(base).as_posix())


def scenario_files(root: Optional[Path] = None) -> List[Path]:
    return sorted((corpus_root(root) / SCENARIO_DIR).glob("*.yaml"))


def load_model(path: Path) -> Model:
    """
    Parse one corpus model and require it to validate without errors.

    Raises:
        CorpusIntegrityError: the file is missing, does not parse or has
            validation errors
    """
    try:
        model = parse_file(path)
    except OSError as e:
        raise CorpusIntegrityError(f"{path}: {e}")
    except ParseError as e:
        raise CorpusIntegrityError(f"{path}: {e.diagnostics[0].format() if e.diagnostics else e}")
    errors = errors_only(validate(model))
    if errors:
        listed = "; ".join(d.format() for d in errors)
        raise CorpusIntegrityError(f"{path}: {len(errors)} validation errors: {listed}")
    return model


def load_all_scenarios(root: Optional[Path] = None) -> List[Scenario]:
    """Scenarios of every scenario file, in file order.

    Raises:
        CorpusIntegrityError: two files define the same scenario name
    """
    base = corpus_root(root)
    scenarios: List[Scenario] = []
    names: Dict[str, Path] = {}
    for path in scenario_files(base):
        for scenario in load_scenarios(path, base):
            if scenario.name in names:
                raise CorpusIntegrityError(
                    f"scenario `{scenario.name}` is defined in both {names[scenario.name]} and {path}"
                )
            names[scenario.name] = path
            scenarios.append(scenario)
    return scenarios


def find_scenario(name: str, root: Optional[Path] = None) -> Optional[Scenario]:
    for scenario in load_all_scenarios(root):
        if scenario.name == name:
            return scenario
    return None


def load_corpus(root: Optional[Path] = None) -> List[Tuple[Model, List[Scenario]]]:
    """
    Load every corpus model with the scenarios written against it.

    Args:
        root: Corpus directory; see ``corpus_root``

    Returns:
        (model, scenarios) pairs in model file order

    Raises:
        CorpusIntegrityError: a model fails to parse or validate, or a
            scenario names a model file that does not exist
        ScenarioError: a scenario file is malformed
    """
    base = corpus_root(root)
    if not base.is_dir():
        raise CorpusIntegrityError(f"corpus directory not found: {base}")

    by_file: Dict[str, List[Scenario]] = {}
    for scenario in load_all_scenarios(base):
        by_file.setdefault(scenario.model_file, []).append(scenario)

    entries: List[Tuple[Model, List[Scenario]]] = []
    known = set()
    for path in model_files(base):
        relative = path.relative_to(base).as_posix()
        known.add(relative)
        model = load_model(path)
        entries.append((model, by_file.get(relative, [])))
        logger.debug(f"Loaded corpus model {relative}: {len(model.machines)} top-level machines")

    orphans = sorted(set(by_file) - known)
    if orphans:
        raise CorpusIntegrityError(f"scenarios refer to missing models: {', '.join(orphans)}")
    logger.info(f"Corpus at {base}: {len(entries)} models, {sum(len(s) for _, s in entries)} scenarios")
    return entries
