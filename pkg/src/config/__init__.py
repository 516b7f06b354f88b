# Configuration module
from .config_schema import (
    CorpusSection,
    RenderSection,
    SimulationSection,
    ToolConfig,
    ValidationSection,
)
from .env_config import EnvConfig
from .logging_config import PerformanceLogger, TimingContext, get_logger, setup_logging

__all__ = [
    "CorpusSection",
    "EnvConfig",
    "PerformanceLogger",
    "RenderSection",
    "SimulationSection",
    "TimingContext",
    "ToolConfig",
    "ValidationSection",
    "get_logger",
    "setup_logging",
]
