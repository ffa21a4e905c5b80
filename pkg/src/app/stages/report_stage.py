"""
Report Stage.
Renders one results table per metric (markdown, CSV, LaTeX), the data-efficiency
summary and boxplot data for the replicate distributions.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging

from ..report.boxplot import boxplot_export, write_boxplot_csv
from ..report.efficiency import data_efficiency, write_efficiency_csv
from ..report.tables import build_result_table, samples_from_frame, write_table_files
from ..sampling.mixtures import combination_label
from .base_stage import Stage

logger = logging.getLogger(__name__)

TABLES_DIR = "tables"
EFFICIENCY_FILE = "efficiency.csv"
BOXPLOT_FILE = "boxplot.csv"


class ReportStage(Stage):
    name = "report"

    def run(self):
        ctx = self._context
        frame = ctx.metrics
        samples = samples_from_frame(frame)
        models = ctx.config.model_names()
        rows = [combination_label(p) for p in sorted({plan.p for plan in ctx.plans})]
        present = set(frame["metric"])

        for metric in ctx.config.evaluation.metrics:
            if metric not in present:
                logger.warning(f"⚠️ No defined values for {metric}. Every cell reads n/a.")
            letters = {r.model: r.letters for r in ctx.reports if r.metric == metric}
            table = build_result_table(
                samples, metric, letters, rows=rows, columns=models, replicates=ctx.config.replicates
            )
            write_table_files(table, self.directory / TABLES_DIR)

        if ctx.reports:
            write_efficiency_csv(data_efficiency(ctx.reports), self.directory / EFFICIENCY_FILE)
        summary = boxplot_export(frame, ["model", "metric", "dataset_combination"])
        write_boxplot_csv(summary, self.directory / BOXPLOT_FILE)

    def load(self):
        # Terminal stage; nothing downstream reads its outputs.
        pass
