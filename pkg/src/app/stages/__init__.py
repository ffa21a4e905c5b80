"""Experiment stages, in execution order."""

from .base_stage import Stage
from .detect_stage import DetectStage
from .evaluate_stage import EvaluateStage
from .ingest_stage import IngestStage, segment_dataset
from .mix_stage import MixStage
from .report_stage import ReportStage
from .split_stage import SplitStage
from .stats_stage import StatsStage
from .synthesize_stage import SynthesizeStage, annotate_images, generate_images, generation_requests

STAGES: tuple[type[Stage], ...] = (
    IngestStage,
    SplitStage,
    SynthesizeStage,
    MixStage,
    DetectStage,
    EvaluateStage,
    StatsStage,
    ReportStage,
)
STAGE_NAMES: tuple[str, ...] = tuple(s.name for s in STAGES)

__all__ = [
    "STAGES",
    "STAGE_NAMES",
    "DetectStage",
    "EvaluateStage",
    "IngestStage",
    "MixStage",
    "ReportStage",
    "SplitStage",
    "Stage",
    "StatsStage",
    "SynthesizeStage",
    "annotate_images",
    "generate_images",
    "generation_requests",
    "segment_dataset",
]
