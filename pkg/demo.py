#!/usr/bin/env python3
"""
Quick demo of the toolkit over the case-study corpus.
Validates every model, runs every scenario and writes a diagram per model.
"""

import sys
import tempfile
from pathlib import Path

from rich.console import Console
from rich.table import Table

from src.config import setup_logging
from src.corpus import load_corpus, run_all
from src.model.ops import model_stats
from src.render import to_agraph
from src.validate import validate

console = Console(highlight=False)


def demo_models(entries):
    """Structure and validation results per model"""
    console.rule("1. Models")
    table = Table()
    for column in ("model", "machines", "stages", "flows", "triggers", "warnings"):
        table.add_column(column, justify="left" if column == "model" else "right")
    for model, _ in entries:
        stats = model_stats(model)
        table.add_row(
            model.name,
            str(stats["machines"]),
            str(stats["stages"]),
            str(stats["flows"]),
            str(stats["triggers"]),
            str(len(validate(model))),
        )
    console.print(table)


def demo_scenarios(entries) -> bool:
    """Run every scenario of the corpus"""
    console.rule("2. Scenarios")
    scenarios = [s for _, batch in entries for s in batch]
    reports = run_all(scenarios, workers=4)
    for report in reports:
        style = "green" if report.passed else "red"
        console.print(f"  {report.summary()}", style=style, markup=False)
        for failure in report.failures:
            console.print(f"      {failure.note}: {failure.detail}", style="red", markup=False)
        if report.error:
            console.print(f"      {report.error}", style="red", markup=False)
    passed = sum(1 for r in reports if r.passed)
    console.print(f"\n{passed}/{len(reports)} scenarios passed")
    return passed == len(reports)


def demo_diagrams(entries):
    """DOT files for Graphviz"""
    console.rule("3. Diagrams")
    out_dir = Path(tempfile.gettempdir()) / "tm_demo"
    out_dir.mkdir(parents=True, exist_ok=True)
    for model, _ in entries:
        path = out_dir / f"{model.name}.dot"
        to_agraph(model).write(str(path))
        console.print(f"  wrote {path}")
    console.print("\nRender with: dot -Tsvg <file>.dot -o <file>.svg")


def main() -> int:
    setup_logging(level="WARNING")
    entries = load_corpus()
    demo_models(entries)
    ok = demo_scenarios(entries)
    demo_diagrams(entries)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
