"""Command-line interface for the thinging-machine toolkit."""

import argparse
import contextlib
import dataclasses
import logging
import os
import re
import sys
import tempfile
from enum import IntEnum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from rich.console import Console
from rich.table import Table

from .config.config_schema import ToolConfig
from .config.env_config import EnvConfig
from .config.logging_config import setup_logging
from .corpus.loader import corpus_root, find_scenario
from .corpus.scenario import Scenario, ScenarioReport, check_expectations
from .dsl.formatter import serialize
from .dsl.parser import parse
from .model.errors import (
    BadInjectionPoint,
    InvalidModel,
    ModelError,
    ParseError,
    ScenarioError,
    SimulationRuntimeError,
    UnresolvedOption,
)
from .model.ops import model_stats
from .model.types import Model
from .render.dot import RenderOptions, to_dot
from .simulation.engine import SimState, init
from .simulation.trace import read_jsonl, visited_stages
from .validate.rules import errors_only, validate

logger = logging.getLogger(__name__)


class ExitCode(IntEnum):
    OK = 0
    INVALID = 1
    PARSE_ERROR = 2
    RUNTIME_ERROR = 3
    USAGE = 4


class UsageError(Exception):
    """Bad arguments or unreadable input; exits with ExitCode.USAGE."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(ExitCode.USAGE, f"{self.prog}: error: {message}\n")


def _consoles() -> Tuple[Console, Console]:
    no_color = EnvConfig.no_color()
    out = Console(no_color=no_color, highlight=False, soft_wrap=True)
    err = Console(stderr=True, no_color=no_color, highlight=False, soft_wrap=True)
    return out, err


def write_atomic(path: Path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror or e}")


def _parse_model(path: str, err: Console) -> Optional[Model]:
    """Parse a model file; prints diagnostics and returns None on a parse error."""
    text = _read(path)
    try:
        return parse(text)
    except ParseError as e:
        for diagnostic in e.diagnostics:
            err.print(diagnostic.format(path), style="red", markup=False)
        return None


_ATTR = re.compile(r'\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*("(?:[^"\\]|\\.)*"|[^,]*?)\s*(?:,|$)')


def _value(raw: str):
    if len(raw) >= 2 and raw[0] == raw[-1] == '"':
        return raw[1:-1].replace('\\"', '"').replace("\\\\", "\\")
    if raw in ("true", "false"):
        return raw == "true"
    if re.fullmatch(r"-?\d+", raw):
        return int(raw)
    return raw


def parse_injection(text: str) -> Tuple[str, Dict[str, object]]:
    """
    Split ``"path attr=v,attr=v"`` into a stage path and attributes.

    Values become integers, booleans (``true``/``false``) or strings;
    double quotes keep a value a string.

    Raises:
        UsageError: the text is not in that form
    """
    parts = text.strip().split(None, 1)
    if not parts:
        raise UsageError("empty --inject value")
    path = parts[0]
    attrs: Dict[str, object] = {}
    rest = parts[1] if len(parts) > 1 else ""
    pos = 0
    while pos < len(rest):
        m = _ATTR.match(rest, pos)
        if m is None or m.end() == pos:
            raise UsageError(f"cannot parse attributes in --inject {text!r}; expected attr=value,...")
        attrs[m.group(1)] = _value(m.group(2))
        pos = m.end()
    return path, attrs


def _non_negative(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {value}")
    return value


# -- commands ---------------------------------------------------------------


def cmd_validate(args, config: ToolConfig, out: Console, err: Console) -> ExitCode:
    model = _parse_model(args.file, err)
    if model is None:
        return ExitCode.PARSE_ERROR
    diagnostics = validate(model)
    for d in diagnostics:
        if args.json:
            err.print(d.to_json(), markup=False)
        else:
            err.print(d.format(), style="red" if d.is_error else "yellow", markup=False)
    strict = args.strict or config.validation.strict
    if errors_only(diagnostics) or (strict and diagnostics):
        return ExitCode.INVALID
    logger.info(f"{args.file}: valid ({len(diagnostics)} warnings)")
    return ExitCode.OK


def _highlight_from_trace(path: str, model: Model) -> List[str]:
    try:
        text = _read(path)
        header, _, _ = read_jsonl(text)
    except ValueError as e:
        raise UsageError(f"{path}: {e}")
    if header.get("model") != model.name:
        raise UsageError(f"trace {path} is for model {header.get('model')!r}, not {model.name!r}")
    return visited_stages(text)


def cmd_render(args, config: ToolConfig, out: Console, err: Console) -> ExitCode:
    model = _parse_model(args.file, err)
    if model is None:
        return ExitCode.PARSE_ERROR
    diagnostics = validate(model)
    errors = errors_only(diagnostics)
    if errors and not args.force:
        for d in errors:
            err.print(d.format(), style="red", markup=False)
        err.print("refusing to render an invalid model (use --force)", markup=False)
        return ExitCode.INVALID
    highlight = _highlight_from_trace(args.highlight, model) if args.highlight else []
    opts = RenderOptions.build(highlight, args.collapse or (), args.rankdir or config.render.rankdir)
    try:
        dot = to_dot(model, opts, diagnostics)
    except UnresolvedOption as e:
        raise UsageError(str(e))
    if args.output:
        write_atomic(Path(args.output), dot)
        logger.info(f"Wrote {args.output}")
    else:
        sys.stdout.write(dot)
    return ExitCode.OK


def _print_run(sim: SimState, out: Console, report: Optional[ScenarioReport] = None):
    if report is not None:
        out.print(f"scenario {report.scenario}: {'passed' if report.passed else 'FAILED'}", markup=False)
        for r in report.results:
            mark = "ok  " if r.passed else "FAIL"
            line = f"  {mark} {r.kind}: {r.note}"
            if r.detail:
                line += f" ({r.detail})"
            out.print(line, style=None if r.passed else "red", markup=False)
    outcome = sim.outcome()
    out.print(f"result: {sim.trace.result} after {sim.trace.steps} steps, {len(sim.trace)} events", markup=False)
    out.print("things:", markup=False)
    for thing_id, fate in sorted(outcome.fates.items()):
        out.print(f"  #{thing_id} {sim.things[thing_id].type}: {fate.status} at {fate.stage}", markup=False)
    out.print(f"drops: {len(sim.trace.verbs('drop'))}, log entries: {len(sim.trace.verbs('log'))}", markup=False)
    out.print("stores:", markup=False)
    for key, value in outcome.stores.items():
        out.print(f"  {key} = {value}", markup=False)


def _scenario_for(name: str, file: str, config: ToolConfig) -> Scenario:
    try:
        scenario = find_scenario(name, config.corpus.root_path or corpus_root())
    except ScenarioError as e:
        raise UsageError(str(e))
    if scenario is None:
        raise UsageError(f"no scenario named {name!r}")
    if scenario.model_path.resolve() != Path(file).resolve():
        raise UsageError(f"scenario {scenario.name!r} is written for {scenario.model_file}")
    return scenario


def cmd_sim(args, config: ToolConfig, out: Console, err: Console) -> ExitCode:
    if bool(args.scenario) == bool(args.inject):
        raise UsageError("give either --scenario NAME or at least one --inject")
    model = _parse_model(args.file, err)
    if model is None:
        return ExitCode.PARSE_ERROR

    scenario = _scenario_for(args.scenario, args.file, config) if args.scenario else None
    section = config.simulation
    if args.max_steps is not None:
        section = dataclasses.replace(section, max_steps=args.max_steps)
    elif scenario is not None and scenario.max_steps is not None:
        section = dataclasses.replace(section, max_steps=scenario.max_steps)

    try:
        sim = init(model, section)
        if scenario is not None:
            for spec in scenario.injections:
                sim.inject(spec.at, dict(spec.attrs), spec.type_name)
        else:
            for text in args.inject:
                path, attrs = parse_injection(text)
                sim.inject(path, attrs)
        sim.run()
    except InvalidModel as e:
        for d in e.diagnostics:
            err.print(d.format(), style="red", markup=False)
        return ExitCode.INVALID
    except (BadInjectionPoint, ModelError, ValueError) as e:
        raise UsageError(str(e))
    except SimulationRuntimeError as e:
        err.print(f"simulation error: {e}", style="red", markup=False)
        return ExitCode.RUNTIME_ERROR

    report: Optional[ScenarioReport] = None
    if scenario is not None:
        report = ScenarioReport(scenario.name, scenario.model_file, check_expectations(scenario, sim), trace=sim.trace)
    _print_run(sim, out, report)
    if report is not None and not report.passed:
        return ExitCode.INVALID
    if args.trace:
        write_atomic(Path(args.trace), sim.trace.to_jsonl())
    return ExitCode.OK


def cmd_fmt(args, config: ToolConfig, out: Console, err: Console) -> ExitCode:
    text = _read(args.file)
    model = _parse_model(args.file, err)
    if model is None:
        return ExitCode.PARSE_ERROR
    canonical = serialize(model)
    if canonical == text:
        return ExitCode.OK
    if args.check:
        err.print(f"{args.file}: not in canonical form", markup=False)
        return ExitCode.INVALID
    write_atomic(Path(args.file), canonical)
    logger.info(f"Reformatted {args.file}")
    return ExitCode.OK


def cmd_stats(args, config: ToolConfig, out: Console, err: Console) -> ExitCode:
    model = _parse_model(args.file, err)
    if model is None:
        return ExitCode.PARSE_ERROR
    stats = model_stats(model)
    table = Table(title=f"model {stats['model']}", show_header=False)
    table.add_column("item")
    table.add_column("count", justify="right")
    table.add_row("machines", str(stats["machines"]))
    table.add_row("stages", str(stats["stages"]))
    for kind, count in stats["stages_by_kind"].items():
        table.add_row(f"  {kind}", str(count))
    table.add_row("flows", str(stats["flows"]))
    table.add_row("triggers", str(stats["triggers"]))
    table.add_row("max depth", str(stats["max_depth"]))
    out.print(table)
    return ExitCode.OK


COMMANDS = {
    "validate": cmd_validate,
    "render": cmd_render,
    "sim": cmd_sim,
    "fmt": cmd_fmt,
    "stats": cmd_stats,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="tm",
        description="Thinging-machine models: validate, render, simulate",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  tm validate corpus/part_a/asa.tm
  tm render corpus/part_a/asa.tm -o asa.dot --collapse asa.log
  tm sim corpus/part_a/asa.tm --scenario non_syn_drop --trace drop.jsonl
  tm render corpus/part_a/asa.tm --highlight drop.jsonl
  tm sim corpus/part_a/asa.tm --inject "asa.ingress.transfer_in src=203.0.113.5,dst=10.1.2.10,tcp_flag=syn,proto=tcp"
  tm fmt --check corpus/part_b/internal.tm
  tm stats corpus/generic/thinging_machine.tm

Exit codes: 0 ok, 1 validation errors or failed check, 2 parse error,
3 simulation runtime error, 4 usage error
        """,
    )
    parser.add_argument("--config", type=str, default=None, help="YAML configuration preset")
    parser.add_argument("--log-level", type=str, default=None,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    parser.add_argument("--log-file", type=str, default=None)
    parser.add_argument("--log-format", type=str, default="text", choices=["text", "json"])

    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("validate", help="check structural rules")
    p.add_argument("file")
    p.add_argument("--strict", action="store_true", help="treat warnings as errors")
    p.add_argument("--json", action="store_true", help="one JSON object per diagnostic")

    p = sub.add_parser("render", help="write a DOT diagram")
    p.add_argument("file")
    p.add_argument("-o", "--output", type=str, default=None)
    p.add_argument("--highlight", type=str, default=None, metavar="TRACE", help="fill stages visited in a trace")
    p.add_argument("--collapse", action="append", default=[], metavar="PATH", help="draw a machine as one node")
    p.add_argument("--rankdir", type=str, default=None, choices=["LR", "TB"])
    p.add_argument("--force", action="store_true", help="render even with validation errors")

    p = sub.add_parser("sim", help="run a scenario or ad-hoc injections")
    p.add_argument("file")
    p.add_argument("--scenario", type=str, default=None, metavar="NAME")
    p.add_argument("--inject", action="append", default=[], metavar='"PATH attr=v,..."')
    p.add_argument("--max-steps", type=_non_negative, default=None)
    p.add_argument("--trace", type=str, default=None, metavar="OUT", help="write the trace as JSON lines")

    p = sub.add_parser("fmt", help="rewrite in canonical form")
    p.add_argument("file")
    p.add_argument("--check", action="store_true", help="only report whether the file would change")

    p = sub.add_parser("stats", help="count machines, stages and arcs")
    p.add_argument("file")
    return parser


def _load_config(path: Optional[str]) -> ToolConfig:
    chosen = Path(path) if path else EnvConfig.config_path()
    if chosen is None:
        return ToolConfig.default()
    try:
        return ToolConfig.from_yaml(chosen)
    except (OSError, ValueError) as e:
        raise UsageError(f"bad configuration {chosen}: {e}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """CLI entry point for the ``tm`` command; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    out, err = _consoles()

    try:
        config = _load_config(args.config)
    except UsageError as e:
        err.print(f"tm: error: {e}", style="red", markup=False)
        return ExitCode.USAGE

    level = args.log_level or (config.log_level if (args.config or EnvConfig.config_path()) else EnvConfig.log_level())
    setup_logging(
        level=level,
        log_file=Path(args.log_file) if args.log_file else None,
        format_style=args.log_format,
    )
    logger.debug(f"Running {args.command} with {config}")

    try:
        return int(COMMANDS[args.command](args, config, out, err))
    except UsageError as e:
        err.print(f"tm {args.command}: error: {e}", style="red", markup=False)
        return ExitCode.USAGE
    except Exception as e:
        logger.error(f"Unexpected failure in {args.command}: {e}", exc_info=True)
        err.print(f"tm {args.command}: internal error: {e}", style="red", markup=False)
        return ExitCode.RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
