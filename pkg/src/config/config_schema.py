"""Configuration schema for the thinging-machine toolkit."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

logger = logging.getLogger(__name__)

VALID_LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
VALID_RANKDIRS = ["LR", "TB"]


@dataclass
class SimulationSection:
    """Simulator limits.

    ``seed`` is carried into every trace header; guards are deterministic, so
    it only matters to the random model factory.
    """

    max_steps: int = 10000
    seed: int = 0

    def __post_init__(self):
        """Validate configuration values."""
        if isinstance(self.max_steps, bool) or not isinstance(self.max_steps, int):
            raise ValueError(f"Max steps must be an integer, got {self.max_steps!r}")
        if self.max_steps < 0:
            raise ValueError(f"Max steps must be non-negative, got {self.max_steps}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise ValueError(f"Seed must be an integer, got {self.seed!r}")


@dataclass
class RenderSection:
    """Diagram defaults."""

    rankdir: str = "LR"

    def __post_init__(self):
        if self.rankdir not in VALID_RANKDIRS:
            raise ValueError(f"Rankdir must be one of {VALID_RANKDIRS}, got {self.rankdir}")


@dataclass
class CorpusSection:
    """Where the case-study corpus lives and how scenarios are run."""

    root: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.workers, bool) or not isinstance(self.workers, int):
            raise ValueError(f"Workers must be an integer, got {self.workers!r}")
        if self.workers < 1:
            raise ValueError(f"Workers must be at least 1, got {self.workers}")

    @property
    def root_path(self) -> Optional[Path]:
        return Path(self.root) if self.root else None


@dataclass
class ValidationSection:
    strict: bool = False

    def __post_init__(self):
        if not isinstance(self.strict, bool):
            raise ValueError(f"Strict must be a boolean, got {self.strict!r}")


_SECTIONS = {
    "simulation": SimulationSection,
    "render": RenderSection,
    "corpus": CorpusSection,
    "validation": ValidationSection,
}


def _section(name: str, data: Any):
    cls = _SECTIONS[name]
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ValueError(f"Section '{name}' must be a mapping, got {type(data).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"Unknown keys in section '{name}': {', '.join(unknown)}")
    return cls(**data)


@dataclass
class ToolConfig:
    """Complete toolkit configuration."""

    simulation: SimulationSection = field(default_factory=SimulationSection)
    render: RenderSection = field(default_factory=RenderSection)
    corpus: CorpusSection = field(default_factory=CorpusSection)
    validation: ValidationSection = field(default_factory=ValidationSection)

    log_level: str = "INFO"

    def __post_init__(self):
        """Validate configuration values."""
        if str(self.log_level).upper() not in VALID_LOG_LEVELS:
            raise ValueError(f"Log level must be one of {VALID_LOG_LEVELS}, got {self.log_level}")
        self.log_level = str(self.log_level).upper()

    @classmethod
    def from_yaml(cls, path: Path) -> ToolConfig:
        """
        Load configuration from a YAML file.

        Args:
            path: Path to YAML configuration file

        Returns:
            ToolConfig instance

        Raises:
            FileNotFoundError: If file doesn't exist
            ValueError: If configuration is invalid
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Configuration file not found: {path}")

        try:
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            logger.error(f"Error parsing YAML file: {e}")
            raise ValueError(f"Invalid YAML configuration: {e}")

        return cls.from_dict(data or {})

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> ToolConfig:
        if not isinstance(data, dict):
            raise ValueError("Configuration must be a mapping")
        unknown = sorted(set(data) - set(_SECTIONS) - {"log_level"})
        if unknown:
            raise ValueError(f"Unknown configuration keys: {', '.join(unknown)}")
        try:
            sections = {name: _section(name, data.get(name)) for name in _SECTIONS}
            return cls(log_level=data.get("log_level", "INFO"), **sections)
        except TypeError as e:
            logger.error(f"Error creating configuration: {e}")
            raise ValueError(f"Invalid configuration parameters: {e}")

    @classmethod
    def default(cls) -> ToolConfig:
        """Create a default configuration."""
        return cls()

    def to_yaml(self, path: Path):
        """
        Save configuration to a YAML file.

        Args:
            path: Path to save YAML configuration
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(self.to_dict(), f, default_flow_style=False, sort_keys=False)
        logger.info(f"Configuration saved to {path}")

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary."""
        return {
            "simulation": asdict(self.simulation),
            "render": asdict(self.render),
            "corpus": asdict(self.corpus),
            "validation": asdict(self.validation),
            "log_level": self.log_level,
        }

    def __str__(self) -> str:
        return (
            f"ToolConfig("
            f"max_steps={self.simulation.max_steps}, "
            f"rankdir={self.render.rankdir}, "
            f"strict={self.validation.strict}, "
            f"workers={self.corpus.workers})"
        )
