"""
Stats Stage.
Runs the normality-branched comparison for every (model, metric) and stores the
reports and letter groups. A run with a single dataset combination has nothing to
compare and is skipped with a notice.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging

from ..stats.pipeline import read_stat_reports, run_long_format, write_letters_csv, write_stat_reports
from .base_stage import Stage

logger = logging.getLogger(__name__)

REPORTS_FILE = "stat_reports.json"
LETTERS_FILE = "letters.csv"
NOTICE_FILE = "NOTICE.txt"


class StatsStage(Stage):
    name = "stats"

    def run(self):
        ctx = self._context
        combinations = ctx.metrics["dataset_combination"].nunique()
        if combinations < 2:
            notice = f"statistics skipped: {combinations} dataset combination(s), at least 2 are needed\n"
            (self.directory / NOTICE_FILE).write_text(notice)
            logger.info(f"⏭️ {notice.strip().capitalize()}.")
            ctx.reports = []
            return

        ctx.reports = run_long_format(ctx.metrics, ctx.config.alpha)
        write_stat_reports(ctx.reports, self.directory / REPORTS_FILE)
        write_letters_csv(ctx.reports, self.directory / LETTERS_FILE)

    def load(self):
        path = self.directory / REPORTS_FILE
        self._context.reports = read_stat_reports(path) if path.exists() else []
