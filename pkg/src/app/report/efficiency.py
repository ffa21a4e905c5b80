"""
Data efficiency: how much of the real training data synthetic images can replace
without a significant loss, read off the letter groups.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging
from collections.abc import Sequence
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import pandas as pd

from ..errors import IoFailure
from ..sampling.mixtures import BASELINE_LABEL, proportion_from_label
from ..stats.letters import share_letter
from ..stats.pipeline import StatReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Efficiency:
    model: str
    metric: str
    baseline_mean: float
    max_replaceable_p: float
    max_replaceable_combination: str
    better_than_baseline: str
    # Replicates with an undefined metric, summed over every group of the report.
    dropped_replicates: int = 0


def data_efficiency(reports: Sequence[StatReport], baseline: str = BASELINE_LABEL) -> list[Efficiency]:
    """
    Per (model, metric): the largest synthetic proportion whose combination shares a
    letter with the baseline, and the combinations with a higher mean and no shared letter.
    Reports without the baseline group are skipped.
    """
    out = []
    for report in reports:
        means = {g.label: g.mean for g in report.groups}
        if baseline not in means:
            logger.warning(f"⚠️ {report.model}/{report.metric} has no '{baseline}' group. Skipping.")
            continue
        base_letters = report.letters[baseline]

        best_p, best_label = 0.0, baseline
        better = []
        for label, mean in means.items():
            p = proportion_from_label(label)
            if label == baseline or p is None:
                continue
            same = share_letter(report.letters[label], base_letters)
            if same and p > best_p:
                best_p, best_label = p, label
            if not same and mean > means[baseline]:
                better.append(label)

        out.append(
            Efficiency(
                report.model,
                report.metric,
                means[baseline],
                best_p,
                best_label,
                ";".join(better),
                report.dropped_replicates,
            )
        )
    return out


def efficiency_frame(rows: Sequence[Efficiency]) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in rows], columns=[f.name for f in fields(Efficiency)])


def write_efficiency_csv(rows: Sequence[Efficiency], path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        efficiency_frame(rows).to_csv(path, index=False, lineterminator="\n", float_format="%.6f")
    except OSError as e:
        raise IoFailure(f"cannot write efficiency table '{path}': {e}") from e
