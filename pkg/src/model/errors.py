"""Exception hierarchy shared by every layer of the toolkit."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any, List, Optional, Sequence

if TYPE_CHECKING:
    from ..dsl.diagnostics import ParseDiagnostic
    from ..validate.rules import Diagnostic


class TMError(Exception):
    """Base class for all toolkit errors."""

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class ModelError(TMError):
    """Structural problem while building or addressing a model."""


class DuplicateName(ModelError):
    """A machine, stage or state name is already used in the same scope."""


class UnknownParent(ModelError):
    """The parent machine path given to add_machine does not resolve."""


class UnknownPath(ModelError):
    """A path resolves to nothing."""


class PathIsMachine(ModelError):
    """A stage path was expected but the path names a machine."""


class ParseError(TMError):
    """The DSL text was rejected; carries every diagnostic found."""

    def __init__(self, diagnostics: Sequence['ParseDiagnostic']):
        self.diagnostics: List['ParseDiagnostic'] = list(diagnostics)
        first = self.diagnostics[0].format() if self.diagnostics else "parse failed"
        super().__init__(first)


class SchemaError(TMError):
    """A tm-json document is malformed or has the wrong schema version."""


class InvalidModel(TMError):
    """The model has validation errors and cannot be simulated."""

    def __init__(self, diagnostics: Sequence['Diagnostic']):
        self.diagnostics: List['Diagnostic'] = list(diagnostics)
        codes = ", ".join(sorted({d.code for d in self.diagnostics}))
        super().__init__(f"model has validation errors ({codes})")


class BadInjectionPoint(TMError):
    """Things may only be injected at transfer or create stages."""


class SimulationRuntimeError(TMError, RuntimeError):
    """A stage could not be executed for a thing.

    Carries the stage path and thing id; ``trace`` is attached by ``run()``
    so the events leading up to the failure are not lost.
    """

    def __init__(
        self,
        message: str,
        stage: Optional[str] = None,
        thing_id: Optional[int] = None,
    ):
        self.stage = stage
        self.thing_id = thing_id
        self.trace: Optional[Any] = None
        where = []
        if stage is not None:
            where.append(f"stage {stage}")
        if thing_id is not None:
            where.append(f"thing #{thing_id}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")


class UnknownThing(TMError):
    """The requested thing id never appears in the trace."""


class UnresolvedOption(TMError):
    """A render option names a path that does not resolve in the model."""


class CorpusIntegrityError(TMError):
    """A corpus model fails to parse or validate."""


class ScenarioError(TMError):
    """A scenario file is malformed."""
