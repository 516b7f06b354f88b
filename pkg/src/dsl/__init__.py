"""Text and JSON front ends for models."""

from .diagnostics import ParseDiagnostic, SourceSpan
from .formatter import format_expr, serialize
from .json_io import SCHEMA, export_json, import_json
from .parser import parse, parse_file

__all__ = [
    "ParseDiagnostic",
    "SCHEMA",
    "SourceSpan",
    "export_json",
    "format_expr",
    "import_json",
    "parse",
    "parse_file",
    "serialize",
]
