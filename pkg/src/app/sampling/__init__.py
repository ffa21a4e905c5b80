from .mixtures import (
    BASELINE_LABEL,
    BaselineMode,
    MixturePlan,
    build_mixture_plans,
    combination_label,
    derive_seed,
    emit_mixture_manifest,
    evaluated_plan,
    load_mixture_manifest,
    plans_to_run,
    proportion_from_label,
    proportion_percent,
)
from .splitter import DatasetSplit, SplitSpec, scaled_count, split_dataset

__all__ = [
    "BASELINE_LABEL",
    "BaselineMode",
    "DatasetSplit",
    "MixturePlan",
    "SplitSpec",
    "build_mixture_plans",
    "combination_label",
    "derive_seed",
    "emit_mixture_manifest",
    "evaluated_plan",
    "load_mixture_manifest",
    "plans_to_run",
    "proportion_from_label",
    "proportion_percent",
    "scaled_count",
    "split_dataset",
]
