"""
Result artifacts: CSV tables and static SVG error curves.

Both writers are deterministic: numbers are printed with 10 significant
digits and the SVG carries no timestamp and fixed element ids, so equal
records give byte-identical files.
"""

import csv
import io
import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

import matplotlib
from matplotlib.figure import Figure

from nmfbench.errors import IoError, ParseError
from nmfbench.schemas import RunRecord

logger = logging.getLogger(__name__)

CSV_HEADER = ["dataset", "init", "solver", "seed", "iteration",
              "objective", "rel_error", "elapsed_ms", "stop_reason"]

SVG_RC = {"svg.hashsalt": "nmfbench", "svg.fonttype": "path"}


def format_number(value: float) -> str:
    return f"{value:.10g}"

# ===== CSV =====

def render_csv(records: Iterable[RunRecord]) -> str:
    """Serialize records to CSV text with the fixed header."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for record in records:
        writer.writerow([
            record.dataset,
            record.init,
            record.solver,
            record.seed,
            record.iteration,
            format_number(record.objective),
            format_number(record.rel_error),
            format_number(record.elapsed_ms),
            record.stop_reason,
        ])
    return buffer.getvalue()


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8", newline="")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}")


def emit_csv(records: Iterable[RunRecord], path) -> None:
    """
    Write records as CSV.

    Header: dataset,init,solver,seed,iteration,objective,rel_error,elapsed_ms,stop_reason.
    An empty record list gives a header-only file.

    Raises:
        IoError: If the file cannot be written
    """
    records = list(records)
    _write_text(path, render_csv(records))
    logger.info("Wrote %d records to %s", len(records), path)


def read_csv_records(path) -> List[RunRecord]:
    """
    Parse a CSV written by emit_csv back into records.

    Raises:
        ParseError: If the header or a row is malformed (1-based line)
        IoError: If the file cannot be read
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}")

    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != CSV_HEADER:
        raise ParseError("unexpected CSV header", 1)

    records = []
    for row in reader:
        if len(row) != len(CSV_HEADER):
            raise ParseError(f"expected {len(CSV_HEADER)} fields, got {len(row)}", reader.line_num)
        fields = dict(zip(CSV_HEADER, row))
        try:
            records.append(RunRecord(**fields))
        except ValueError as e:
            raise ParseError(f"invalid record: {e}", reader.line_num)
    return records

# ===== SVG =====

def _series(records: Iterable[RunRecord]) -> Dict[Tuple[str, str], Tuple[List[int], List[float]]]:
    # Seed-averaged relative error per (init, solver)
    sums: Dict[Tuple[str, str], Dict[int, List[float]]] = defaultdict(lambda: defaultdict(list))
    for record in records:
        sums[(record.init, record.solver)][record.iteration].append(record.rel_error)
    series = {}
    for key in sorted(sums):
        iterations = sorted(sums[key])
        series[key] = (iterations, [sum(sums[key][i]) / len(sums[key][i]) for i in iterations])
    return series


def render_svg_plot(records: Sequence[RunRecord], log_y: bool = True, title: str = "") -> str:
    """
    Draw relative error against iteration, one curve per initializer.

    Replicates are averaged per iteration. When several solvers appear, the
    legend names the solver next to the initializer.

    Args:
        records: Benchmark records
        log_y: Logarithmic y axis
        title: Optional figure title

    Returns:
        str: Self-contained SVG document
    """
    series = _series(records)
    solvers = {solver for _, solver in series}

    with matplotlib.rc_context(SVG_RC):
        fig = Figure(figsize=(8, 5))
        ax = fig.add_subplot()
        for (init, solver), (iterations, errors) in series.items():
            label = init if len(solvers) <= 1 else f"{init} ({solver})"
            ax.plot(iterations, errors, label=label, linewidth=1.5)
        ax.set_xlabel("Iteration")
        ax.set_ylabel("Relative error")
        if log_y:
            ax.set_yscale("log")
        if title:
            ax.set_title(title)
        if series:
            ax.legend(fontsize="small")
        ax.grid(True, which="both", ls="--", alpha=0.4)
        fig.tight_layout()

        buffer = io.StringIO()
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()


def emit_svg_plot(records: Sequence[RunRecord], path, log_y: bool = True, title: str = "") -> None:
    """
    Write the error-curve plot of render_svg_plot to a file.

    Raises:
        IoError: If the file cannot be written
    """
    _write_text(path, render_svg_plot(records, log_y=log_y, title=title))
    logger.info("Wrote plot to %s", path)
