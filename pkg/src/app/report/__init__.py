"""Result tables, boxplot summaries and data-efficiency summaries."""

from .boxplot import box_stats, boxplot_export, write_boxplot_csv
from .efficiency import Efficiency, data_efficiency, efficiency_frame, write_efficiency_csv
from .tables import (
    Cell,
    CellStats,
    MetricSample,
    ResultTable,
    TableFormat,
    aggregate,
    build_result_table,
    parse_cell,
    render_table,
    samples_from_frame,
    write_table_files,
)

__all__ = [
    "Cell",
    "CellStats",
    "Efficiency",
    "MetricSample",
    "ResultTable",
    "TableFormat",
    "aggregate",
    "box_stats",
    "boxplot_export",
    "build_result_table",
    "data_efficiency",
    "efficiency_frame",
    "parse_cell",
    "render_table",
    "samples_from_frame",
    "write_boxplot_csv",
    "write_efficiency_csv",
    "write_table_files",
]
