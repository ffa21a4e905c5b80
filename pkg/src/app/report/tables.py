"""
Result tables: mean ± 1SD per (dataset combination, model) with significance
letters and the column maximum in bold.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging
import math
import re
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path

import numpy as np
import pandas as pd
from tabulate import tabulate

from ..errors import DataError, IoFailure, MalformedRow
from ..stats.types import LetterGroups

logger = logging.getLogger(__name__)

ROW_HEADER = "Dataset"
UNDEFINED_CELL = "n/a"
CELL_PATTERN = re.compile(
    r"^(?:\*\*)?(-?\d+\.\d{3}) ± (\d+\.\d{3})(?:\^([A-Za-z][A-Za-z0-9]*))?(?: \(n=(\d+)/(\d+)\))?(?:\*\*)?$"
)


class TableFormat(StrEnum):
    MARKDOWN = "markdown"
    CSV = "csv"
    LATEX = "latex"


@dataclass(frozen=True, slots=True)
class MetricSample:
    model: str
    dataset_combination: str
    replicate: int
    metric: str
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise DataError(
                f"non-finite {self.metric} for {self.model}/{self.dataset_combination} replicate {self.replicate}"
            )


@dataclass(frozen=True, slots=True)
class CellStats:
    mean: float
    sd: float
    n: int


@dataclass(frozen=True, slots=True)
class Cell:
    """`mean` and `sd` are None when no replicate of the cell has a defined value."""

    mean: float | None
    sd: float | None
    letters: str
    is_column_max: bool = False
    n: int = 0
    expected: int = 0

    @property
    def defined(self) -> bool:
        return self.mean is not None

    def coverage(self) -> str:
        """Suffix such as " (n=7/10)" when replicates were dropped, else empty."""
        return f" (n={self.n}/{self.expected})" if self.defined and self.n < self.expected else ""

    def text(self) -> str:
        if not self.defined:
            return UNDEFINED_CELL
        out = f"{self.mean:.3f} ± {self.sd:.3f}"
        if self.letters:
            out += f"^{self.letters}"
        return out + self.coverage()


@dataclass(frozen=True)
class ResultTable:
    metric: str
    rows: tuple[str, ...]
    columns: tuple[str, ...]
    cells: Mapping[tuple[str, str], Cell]

    def cell(self, row: str, column: str) -> Cell:
        return self.cells[(row, column)]


def samples_from_frame(frame: pd.DataFrame) -> list[MetricSample]:
    """Long-format rows (model, dataset_combination, replicate, metric, value) as samples; keys must be unique."""
    samples = [
        MetricSample(str(r.model), str(r.dataset_combination), int(r.replicate), str(r.metric), float(r.value))
        for r in frame.itertuples(index=False)
    ]
    seen: set[tuple] = set()
    for row_no, s in enumerate(samples, start=2):
        key = (s.model, s.dataset_combination, s.replicate, s.metric)
        if key in seen:
            raise MalformedRow(row_no, f"duplicate sample {key}")
        seen.add(key)
    return samples


def aggregate(samples: Sequence[MetricSample]) -> dict[tuple[str, str, str], CellStats]:
    """(model, combination, metric) -> mean and sample SD (n - 1); a single replicate has SD 0."""
    groups: dict[tuple[str, str, str], list[float]] = {}
    for s in samples:
        groups.setdefault((s.model, s.dataset_combination, s.metric), []).append(s.value)
    out = {}
    for key, values in groups.items():
        arr = np.asarray(values)
        sd = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
        out[key] = CellStats(float(arr.mean()), sd, len(arr))
    return out


def _unique(values) -> tuple[str, ...]:
    return tuple(dict.fromkeys(values))


def build_result_table(
    samples: Sequence[MetricSample],
    metric: str,
    letters: Mapping[str, LetterGroups] | None = None,
    rows: Sequence[str] | None = None,
    columns: Sequence[str] | None = None,
    replicates: int | None = None,
) -> ResultTable:
    """
    Rows are dataset combinations, columns are models, both in first-appearance order
    unless given. `letters` maps model -> combination -> letters.

    A cell without any defined replicate renders as "n/a" and never takes the bold.
    A cell with fewer than `replicates` values (default: the number of distinct
    replicate ids among the metric's samples) carries its coverage, e.g. " (n=7/10)".
    """
    picked = [s for s in samples if s.metric == metric]
    rows = tuple(rows) if rows is not None else _unique(s.dataset_combination for s in picked)
    columns = tuple(columns) if columns is not None else _unique(s.model for s in picked)
    expected = replicates if replicates is not None else len({s.replicate for s in picked})
    stats = aggregate(picked)
    letters = letters or {}

    cells: dict[tuple[str, str], Cell] = {}
    for col in columns:
        col_stats = [stats.get((col, row, metric)) for row in rows]
        undefined = [row for row, cs in zip(rows, col_stats, strict=True) if cs is None]
        if undefined:
            logger.warning(f"⚠️ {metric}/{col}: no defined value for {', '.join(undefined)}. Rendered as n/a.")

        defined = [(i, cs.mean) for i, cs in enumerate(col_stats) if cs is not None]
        winner = None
        if defined:
            best = max(m for _, m in defined)
            winners = [i for i, m in defined if m == best]
            if len(winners) > 1:
                first = rows[winners[0]]
                logger.warning(f"⚠️ {metric}/{col}: {len(winners)} rows tie for the maximum. Bolding '{first}'.")
            winner = winners[0]

        for i, (row, cs) in enumerate(zip(rows, col_stats, strict=True)):
            if cs is None:
                cells[(row, col)] = Cell(None, None, "", expected=expected)
                continue
            row_letters = letters.get(col, {}).get(row, "")
            cells[(row, col)] = Cell(cs.mean, cs.sd, row_letters, i == winner, cs.n, expected)
    return ResultTable(metric, rows, columns, cells)


def _plain_cell(cell: Cell) -> str:
    return f"**{cell.text()}**" if cell.is_column_max else cell.text()


def _latex_cell(cell: Cell) -> str:
    if not cell.defined:
        return UNDEFINED_CELL
    body = f"{cell.mean:.3f} $\\pm$ {cell.sd:.3f}"
    if cell.letters:
        body += f"$^{{{cell.letters}}}$"
    body += cell.coverage()
    return f"\\textbf{{{body}}}" if cell.is_column_max else body


def _grid(table: ResultTable, render_cell) -> list[list[str]]:
    return [[row, *(render_cell(table.cell(row, col)) for col in table.columns)] for row in table.rows]


def render_table(table: ResultTable, fmt: TableFormat | str = TableFormat.MARKDOWN) -> str:
    """
    Cells read "m.mmm ± s.sss^LETTERS". Markdown and CSV mark the column maximum
    with **...**, LaTeX with \\textbf{...}. Output always ends with a newline.
    """
    fmt = TableFormat(fmt)
    headers = [ROW_HEADER, *table.columns]
    if fmt is TableFormat.MARKDOWN:
        return tabulate(_grid(table, _plain_cell), headers=headers, tablefmt="github", disable_numparse=True) + "\n"
    if fmt is TableFormat.CSV:
        return pd.DataFrame(_grid(table, _plain_cell), columns=headers).to_csv(index=False, lineterminator="\n")
    return tabulate(_grid(table, _latex_cell), headers=headers, tablefmt="latex_raw", disable_numparse=True) + "\n"


def parse_cell(text: str) -> tuple[float, float, str, bool]:
    """
    Inverse of the markdown/CSV cell rendering: (mean, sd, letters, bold).
    An "n/a" cell parses to NaN mean and SD; a coverage suffix is accepted and dropped.
    """
    text = text.strip()
    if text == UNDEFINED_CELL:
        return math.nan, math.nan, "", False
    match = CELL_PATTERN.match(text)
    if not match:
        raise DataError(f"not a rendered cell: '{text}'")
    mean, sd, letters, _, _ = match.groups()
    return float(mean), float(sd), letters or "", text.startswith("**")


def write_table_files(table: ResultTable, directory: Path, stem: str | None = None) -> list[Path]:
    """Writes <stem>.md, <stem>.csv and <stem>.tex; the stem defaults to the metric name."""
    stem = stem or table.metric
    suffixes = {TableFormat.MARKDOWN: ".md", TableFormat.CSV: ".csv", TableFormat.LATEX: ".tex"}
    paths = []
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for fmt, suffix in suffixes.items():
            path = directory / f"{stem}{suffix}"
            path.write_text(render_table(table, fmt), encoding="utf-8")
            paths.append(path)
    except OSError as e:
        raise IoFailure(f"cannot write tables to '{directory}': {e}") from e
    logger.info(f"📝 Wrote {table.metric} table ({len(table.rows)}x{len(table.columns)}) to {directory}")
    return paths
