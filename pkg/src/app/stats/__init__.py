"""Hypothesis tests, post-hoc procedures and compact letter display."""

from .letters import compact_letter_display, letters_consistent, share_letter, split_letters
from .normality import shapiro_wilk
from .pipeline import (
    Branch,
    StatReport,
    branch_pipeline,
    read_long_csv,
    read_stat_reports,
    run_long_format,
    samples_from_frame,
    write_letters_csv,
    write_stat_reports,
)
from .posthoc import dunn_bonferroni, dunn_raw, studentized_range_sf, tukey_hsd
from .tests import anova_oneway, kruskal_wallis, mann_whitney_u
from .types import LetterGroups, PairwiseMatrix, Sample, TestResult

__all__ = [
    "Branch",
    "LetterGroups",
    "PairwiseMatrix",
    "Sample",
    "StatReport",
    "TestResult",
    "anova_oneway",
    "branch_pipeline",
    "compact_letter_display",
    "dunn_bonferroni",
    "dunn_raw",
    "kruskal_wallis",
    "letters_consistent",
    "mann_whitney_u",
    "read_long_csv",
    "read_stat_reports",
    "run_long_format",
    "samples_from_frame",
    "shapiro_wilk",
    "share_letter",
    "split_letters",
    "studentized_range_sf",
    "tukey_hsd",
    "write_letters_csv",
    "write_stat_reports",
]
