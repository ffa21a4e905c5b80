"""
Significance pipeline: normality per group, then the parametric or the
nonparametric omnibus test, then the matching post-hoc procedure and letters.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import json
import logging
from collections.abc import Sequence
from enum import StrEnum
from pathlib import Path

import pandas as pd
from pydantic import BaseModel, Field

from ..errors import ConstantSample, IoFailure, MalformedRow, SampleTooSmall
from .letters import all_same_letter, compact_letter_display
from .normality import shapiro_wilk
from .posthoc import dunn_bonferroni, tukey_hsd
from .tests import anova_oneway, kruskal_wallis
from .types import PairwiseMatrix, Sample

logger = logging.getLogger(__name__)

LONG_COLUMNS = ["model", "dataset_combination", "replicate", "metric", "value"]
LETTER_COLUMNS = ["model", "metric", "dataset_combination", "n", "dropped", "mean", "sd", "letters"]


class Branch(StrEnum):
    PARAMETRIC = "parametric"
    NONPARAMETRIC = "nonparametric"


class TrailStep(BaseModel):
    """One decision in the trail: a test run on one group or on all of them."""

    test: str
    group: str | None = None
    statistic: float | None = None
    p_value: float | None = None
    outcome: str


class GroupSummary(BaseModel):
    label: str
    n: int
    # Replicates whose metric was undefined and left out of the group.
    dropped: int = 0
    mean: float
    sd: float


class StatReport(BaseModel):
    model: str = ""
    metric: str = ""
    alpha: float
    branch: Branch
    omnibus_significant: bool
    trail: list[TrailStep]
    groups: list[GroupSummary]
    pairwise_method: str | None = None
    pairwise: dict[str, dict[str, float]] = Field(default_factory=dict)
    letters: dict[str, str]
    expected_replicates: int | None = None
    # Combinations with no defined value at all; they take no part in the comparison.
    undefined_groups: list[str] = Field(default_factory=list)

    @property
    def dropped_replicates(self) -> int:
        missing = len(self.undefined_groups) * (self.expected_replicates or 0)
        return missing + sum(g.dropped for g in self.groups)


def _normality_step(sample: Sample, alpha: float) -> tuple[TrailStep, bool]:
    try:
        res = shapiro_wilk(sample.values)
    except ConstantSample:
        return TrailStep(test="shapiro_wilk", group=sample.label, outcome="constant"), False
    except SampleTooSmall:
        return TrailStep(test="shapiro_wilk", group=sample.label, outcome="too_small"), False
    normal = res.p_value >= alpha
    step = TrailStep(
        test="shapiro_wilk",
        group=sample.label,
        statistic=res.statistic,
        p_value=res.p_value,
        outcome="normal" if normal else "non_normal",
    )
    return step, normal


def _pairwise_dict(matrix: PairwiseMatrix) -> dict[str, dict[str, float]]:
    return {a: {b: float(matrix.p(a, b)) for b in matrix.labels} for a in matrix.labels}


def branch_pipeline(samples: Sequence[Sample], alpha: float = 0.05) -> StatReport:
    """
    Every group normal -> one-way ANOVA, Tukey HSD when significant.
    Any group non-normal, constant or too small -> Kruskal-Wallis, Dunn-Bonferroni
    when significant. A non-significant omnibus test labels every group "A".
    """
    trail: list[TrailStep] = []
    all_normal = True
    for s in samples:
        step, normal = _normality_step(s, alpha)
        trail.append(step)
        all_normal &= normal

    branch = Branch.PARAMETRIC if all_normal else Branch.NONPARAMETRIC
    omnibus = anova_oneway(samples) if all_normal else kruskal_wallis(samples)
    significant = omnibus.p_value < alpha
    trail.append(
        TrailStep(
            test=omnibus.test_name,
            statistic=omnibus.statistic,
            p_value=omnibus.p_value,
            outcome="significant" if significant else "not_significant",
        )
    )

    labels = [s.label for s in samples]
    pairwise: PairwiseMatrix | None = None
    if significant:
        pairwise = tukey_hsd(samples) if all_normal else dunn_bonferroni(samples)
        letters = compact_letter_display(pairwise, alpha)
        trail.append(TrailStep(test=pairwise.method, outcome="letters"))
    else:
        letters = all_same_letter(labels)

    logger.debug(f"📊 {branch} branch, {omnibus.test_name} p={omnibus.p_value:.4g}.")
    return StatReport(
        alpha=alpha,
        branch=branch,
        omnibus_significant=significant,
        trail=trail,
        groups=[GroupSummary(label=s.label, n=s.n, mean=s.mean, sd=s.sd) for s in samples],
        pairwise_method=pairwise.method if pairwise else None,
        pairwise=_pairwise_dict(pairwise) if pairwise else {},
        letters=letters,
    )


def samples_from_frame(frame: pd.DataFrame) -> dict[tuple[str, str], list[Sample]]:
    """
    Groups a long-format table into (model, metric) -> samples, combinations in order
    of first appearance and values in replicate order.
    """
    missing = [c for c in LONG_COLUMNS if c not in frame.columns]
    if missing:
        raise MalformedRow(1, f"missing columns {missing}")
    values = pd.to_numeric(frame["value"], errors="coerce")
    bad = values.isna()
    if bad.any():
        raise MalformedRow(int(bad.to_numpy().argmax()) + 2, "value is not a number")
    frame = frame.assign(value=values)

    dup = frame.duplicated(["model", "dataset_combination", "replicate", "metric"])
    if dup.any():
        raise MalformedRow(int(dup.to_numpy().argmax()) + 2, "duplicate (model, combination, replicate, metric)")

    out: dict[tuple[str, str], list[Sample]] = {}
    for (model, metric), block in frame.groupby(["model", "metric"], sort=False):
        samples = []
        for combination, rows in block.groupby("dataset_combination", sort=False):
            rows = rows.sort_values("replicate", kind="stable")
            samples.append(Sample(str(combination), tuple(float(v) for v in rows["value"])))
        out[(str(model), str(metric))] = samples
    return out


def run_long_format(frame: pd.DataFrame, alpha: float = 0.05) -> list[StatReport]:
    """
    One report per (model, metric). Undefined metric values are absent from the long
    table; the expected replicate count is the number of distinct replicate ids in
    `frame`, and each group records how many of its replicates are missing.
    """
    grouped = samples_from_frame(frame)
    expected = int(frame["replicate"].nunique()) if len(frame) else 0
    combinations = [str(c) for c in dict.fromkeys(frame["dataset_combination"])]
    reports = []
    for (model, metric), samples in grouped.items():
        present = {s.label for s in samples}
        undefined = [c for c in combinations if c not in present]
        short = {s.label: expected - s.n for s in samples if s.n < expected}
        if undefined or short:
            logger.warning(
                f"⚠️ {model}/{metric}: {len(undefined)} combination(s) undefined, "
                f"{sum(short.values())} replicate(s) missing from the rest."
            )
        if len(samples) < 2:
            logger.warning(f"⚠️ {model}/{metric} has a single combination. Skipping statistics.")
            continue
        report = branch_pipeline(samples, alpha)
        groups = [g.model_copy(update={"dropped": short.get(g.label, 0)}) for g in report.groups]
        update = {
            "model": model,
            "metric": metric,
            "groups": groups,
            "expected_replicates": expected,
            "undefined_groups": undefined,
        }
        reports.append(report.model_copy(update=update))
        logger.info(f"✅ {model}/{metric}: {report.branch} branch, letters {report.letters}.")
    return reports


def read_long_csv(path: Path) -> pd.DataFrame:
    try:
        dtype = {"model": str, "dataset_combination": str, "metric": str}
        return pd.read_csv(path, dtype=dtype, float_precision="round_trip")
    except (OSError, pd.errors.ParserError) as e:
        raise IoFailure(f"cannot read metric table '{path}': {e}") from e


def write_stat_reports(reports: Sequence[StatReport], path: Path):
    payload = [r.model_dump(mode="json") for r in reports]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"cannot write stat report '{path}': {e}") from e


def read_stat_reports(path: Path) -> list[StatReport]:
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise IoFailure(f"cannot read stat report '{path}': {e}") from e
    return [StatReport.model_validate(item) for item in payload]


def letters_frame(reports: Sequence[StatReport]) -> pd.DataFrame:
    rows = [
        (r.model, r.metric, g.label, g.n, g.dropped, g.mean, g.sd, r.letters[g.label])
        for r in reports
        for g in r.groups
    ]
    return pd.DataFrame(rows, columns=LETTER_COLUMNS)


def write_letters_csv(reports: Sequence[StatReport], path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        letters_frame(reports).to_csv(path, index=False, lineterminator="\n", float_format="%.6f")
    except OSError as e:
        raise IoFailure(f"cannot write letters '{path}': {e}") from e
