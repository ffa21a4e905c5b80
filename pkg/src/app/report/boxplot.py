"""
Boxplot summaries for plotting tools: type-7 quartiles, 1.5 IQR whiskers, outliers listed apart.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd

from ..errors import EmptyGroup, IoFailure

logger = logging.getLogger(__name__)

BOXPLOT_COLUMNS = ["group", "n", "min", "q1", "median", "q3", "max", "outliers"]
WHISKER_IQR = 1.5
GROUP_SEPARATOR = " / "


def box_stats(values) -> dict:
    """
    min/max are the whisker ends: the most extreme values within 1.5 IQR of the box.
    Values beyond them are outliers, sorted and joined with ';'.
    """
    x = np.sort(np.asarray(values, dtype=np.float64))
    q1, median, q3 = np.quantile(x, [0.25, 0.5, 0.75], method="linear")
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - WHISKER_IQR * iqr, q3 + WHISKER_IQR * iqr
    inside = x[(x >= lo_fence) & (x <= hi_fence)]
    outliers = x[(x < lo_fence) | (x > hi_fence)]
    return {
        "n": len(x),
        "min": float(inside.min()),
        "q1": float(q1),
        "median": float(median),
        "q3": float(q3),
        "max": float(inside.max()),
        "outliers": ";".join(f"{v:.6g}" for v in outliers),
    }


def boxplot_export(
    frame: pd.DataFrame,
    group_by: str | Sequence[str],
    value: str = "value",
    groups: Sequence[str] | None = None,
) -> pd.DataFrame:
    """
    One row per group of `frame`; multi-column groups are labeled "a / b".
    Groups come out in first-appearance order, or in the order of `groups`.

    :raises EmptyGroup: a group (listed or present) has no finite value.
    """
    keys = [group_by] if isinstance(group_by, str) else list(group_by)
    labels = frame[keys].astype(str).agg(GROUP_SEPARATOR.join, axis=1)
    values = pd.to_numeric(frame[value], errors="coerce")

    by_group: dict[str, list[float]] = {}
    for label, v in zip(labels, values, strict=True):
        by_group.setdefault(label, [])
        if np.isfinite(v):
            by_group[label].append(float(v))

    order = list(groups) if groups is not None else list(by_group)
    rows = []
    for label in order:
        if not by_group.get(label):
            raise EmptyGroup(label)
        rows.append({"group": label, **box_stats(by_group[label])})
    return pd.DataFrame(rows, columns=BOXPLOT_COLUMNS)


def write_boxplot_csv(summary: pd.DataFrame, path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        summary.to_csv(path, index=False, lineterminator="\n", float_format="%.6f")
    except OSError as e:
        raise IoFailure(f"cannot write boxplot data '{path}': {e}") from e
    logger.info(f"📦 Boxplot data for {len(summary)} groups written to {path}")
