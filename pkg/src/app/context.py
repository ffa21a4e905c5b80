"""
Defines the shared context passed between experiment stages.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

from .annotations.types import LabeledImage
from .manifest import Manifest
from .sampling.mixtures import MixturePlan
from .sampling.splitter import DatasetSplit
from .settings import ExperimentConfig
from .stats.pipeline import StatReport

SUCCESS_MARKER = "_SUCCESS"


@dataclass
class ExperimentContext:
    """
    Shared state passed between Stages of the experiment.
    Acts as the 'Bus': each stage fills its part, either by running or by reloading
    its persisted outputs when resumed.
    """

    config: ExperimentConfig
    root: Path

    # --- Ingest ---
    real: Manifest | None = None
    labeled: dict[str, LabeledImage] = field(default_factory=dict)

    # --- Split / Synthesize / Mix ---
    split: DatasetSplit | None = None
    synthetic: Manifest | None = None
    plans: list[MixturePlan] = field(default_factory=list)

    # --- Detect / Evaluate ---
    # (model, plan_id) -> canonical detections file
    detections: dict[tuple[str, str], Path] = field(default_factory=dict)
    metrics: pd.DataFrame | None = None

    # --- Stats ---
    reports: list[StatReport] = field(default_factory=list)

    # Non-fatal per-item problems, by kind (e.g. "segmentation_failures").
    warnings: Counter = field(default_factory=Counter)

    def stage_dir(self, name: str) -> Path:
        return self.root / name

    def is_complete(self, name: str) -> bool:
        return (self.stage_dir(name) / SUCCESS_MARKER).exists()

    def mark_complete(self, name: str):
        (self.stage_dir(name) / SUCCESS_MARKER).write_text("")
