"""
Settings loading Env Vars and the YAML experiment file.
Supports YAML Variable Interpolation.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging
import os
import re
from enum import StrEnum
from functools import lru_cache
from pathlib import Path
from typing import Any

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .annotations.types import TARGET_CLASSES
from .errors import ConfigError, InvalidSpec
from .sampling.mixtures import BaselineMode, proportion_percent
from .sampling.splitter import FRACTION_TOLERANCE, SplitSpec

logger = logging.getLogger(__name__)

DEFAULT_P_VALUES = [round(0.1 * i, 1) for i in range(1, 10)]
FIXED_CLASS_PROMPT = "A Photo of HoPla Echinochloa, HoPla Plot in the Background"
PLACEHOLDER = re.compile(r"\{(\w+)\}")


# --- YAML Schema Models ---


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SplitConfig(_Strict):
    train_frac: float = 0.70
    val_frac: float = 0.15
    test_frac: float = 0.15
    seed: int = 0

    @model_validator(mode="after")
    def _fractions(self):
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if any(f <= 0 for f in fracs) or abs(sum(fracs) - 1.0) > FRACTION_TOLERANCE:
            raise ValueError(f"split fractions must be positive and sum to 1, got {fracs}")
        return self

    def to_spec(self) -> SplitSpec:
        return SplitSpec(self.train_frac, self.val_frac, self.test_frac, self.seed)


class AdapterRole(StrEnum):
    SEGMENTER = "segmenter"
    GENERATOR = "generator"
    ANNOTATOR = "annotator"
    DETECTOR = "detector"


class AdapterSpec(_Strict):
    role: AdapterRole
    # Detector adapters are keyed by model name (e.g. "yolov8s"); other roles leave it unset.
    name: str | None = None
    # Argument list; "{python}", "{request}" and "{output_dir}" are substituted per call.
    command: list[str] = Field(min_length=1)
    workdir: Path | None = None
    timeout: float = Field(600.0, gt=0)
    retry_attempts: int = Field(1, ge=1)

    @property
    def label(self) -> str:
        return f"{self.role}:{self.name}" if self.name else str(self.role)


class GenerationConfig(_Strict):
    prompts: list[str] = Field(default_factory=lambda: [FIXED_CLASS_PROMPT])
    images_per_prompt: int = Field(10, ge=1)
    steps: int = Field(50, ge=1)
    guidance: float = Field(7.5, gt=0)
    scheduler: str = "euler-ancestral"
    width: int = Field(640, gt=0)
    height: int = Field(640, gt=0)
    seed: int = 0


class TrainingHyperparameters(_Strict):
    """Recorded and forwarded to detector adapters; nothing here trains a model."""

    epochs: int = 300
    patience: int = 30
    batch_size: int = 16
    learning_rate: float = 0.01
    lr_schedule: str = "cosine"
    augmentation: bool = False


class EvaluationConfig(_Strict):
    confidence_threshold: float = Field(0.25, ge=0, le=1)
    annotation_threshold: float = Field(0.25, ge=0, le=1)
    apply_nms: bool = False
    nms_iou: float = Field(0.7, gt=0, le=1)
    per_class: bool = True
    metrics: list[str] = Field(default_factory=lambda: ["mAP50", "mAP50_95", "precision", "recall", "F1"])


class ExperimentConfig(_Strict):
    variables: dict[str, Any] = Field(default_factory=dict)

    name: str = "experiment"
    dataset_root: Path
    manifest: str = "manifest.json"
    class_names: list[str] = Field(default_factory=lambda: list(TARGET_CLASSES))
    # Source vocabulary of the label files; when set, labels are remapped onto class_names.
    source_classes: list[str] | None = None
    class_map: dict[str, str] | None = None

    split: SplitConfig = SplitConfig()
    p_values: list[float] = Field(default_factory=lambda: list(DEFAULT_P_VALUES))
    replicates: int = Field(10, ge=1)
    base_seed: int = 0
    n_training: int | None = Field(None, ge=1)
    baseline_mode: BaselineMode = BaselineMode.SINGLE
    alpha: float = Field(0.05, gt=0, lt=1)

    # Offline mode: detection files are read from `detections_dir/<model>/<plan_id>.txt`.
    offline: bool = False
    detections_dir: Path | None = None
    models: list[str] = Field(default_factory=list)
    # Pre-built synthetic pool; replaces generation + annotation.
    synthetic_manifest: Path | None = None

    adapters: list[AdapterSpec] = Field(default_factory=list)
    generation: GenerationConfig = GenerationConfig()
    training: TrainingHyperparameters = TrainingHyperparameters()
    evaluation: EvaluationConfig = EvaluationConfig()
    workers: int = Field(4, ge=1)

    @field_validator("p_values")
    @classmethod
    def _proportions(cls, values: list[float]) -> list[float]:
        bad = [p for p in values if not 0.0 <= p < 1.0]
        if bad:
            raise ValueError(f"synthetic proportions must lie in (0, 1), got {bad}")
        # p = 0 is the baseline, which every run includes anyway.
        proportions = sorted({p for p in values if p > 0})
        # Rows and plan ids name a proportion by its whole percentage; 0% is the baseline.
        named: dict[int, float] = {0: 0.0}
        for p in proportions:
            pct = proportion_percent(p)
            if pct in named:
                raise ValueError(f"proportions {named[pct]} and {p} both name the {pct}% mixture")
            named[pct] = p
        return proportions

    @model_validator(mode="after")
    def _offline_inputs(self):
        if self.offline and self.detections_dir is None:
            raise ValueError("offline mode needs 'detections_dir'")
        if self.offline and not self.models:
            raise ValueError("offline mode needs the list of 'models' whose detections are supplied")
        names = [a.name for a in self.adapters if a.role is AdapterRole.DETECTOR]
        if None in names or len(set(names)) != len(names):
            raise ValueError("every detector adapter needs a unique 'name'")
        return self

    def adapter(self, role: AdapterRole) -> AdapterSpec | None:
        return next((a for a in self.adapters if a.role is role), None)

    def detector_adapters(self) -> dict[str, AdapterSpec]:
        return {a.name: a for a in self.adapters if a.role is AdapterRole.DETECTOR and a.name}

    def model_names(self) -> list[str]:
        return list(self.models) if self.offline else sorted(self.detector_adapters())

    def split_spec(self) -> SplitSpec:
        return self.split.to_spec()


# --- Main Settings Class ---


def inject_variables(node: Any, variables: dict[str, Any]) -> Any:
    """Recursively injects variables into strings; unknown placeholders are left for the adapters."""
    if isinstance(node, dict):
        return {k: inject_variables(v, variables) for k, v in node.items()}
    elif isinstance(node, list):
        return [inject_variables(i, variables) for i in node]
    elif isinstance(node, str):
        return PLACEHOLDER.sub(lambda m: str(variables[m[1]]) if m[1] in variables else m[0], node)
    else:
        return node


def _relative_to(base: Path, value: Path | None) -> Path | None:
    if value is None or value.is_absolute():
        return value
    return base / value


class AppSettings(BaseSettings):
    """
    Combines Env Vars (log levels, default paths) and YAML (the experiment).
    """

    # --- Logging Levels (Controlled via .env) ---
    LOG_LEVEL_MAIN: str = "INFO"
    LOG_LEVEL_STAGES: str = "INFO"
    LOG_LEVEL_SERVICES: str = "INFO"
    LOG_LEVEL_STATS: str = "INFO"
    LOG_LEVEL_IQA: str = "INFO"
    LOG_LEVEL_DETECTION: str = "INFO"

    # --- Defaults ---
    EXPERIMENT_CONFIG: str = "experiment.yaml"

    # --- Configuration ---
    CONFIG: ExperimentConfig | None = None

    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")

    def load_experiment_file(self, path: str | Path | None = None) -> ExperimentConfig:
        """
        Loads YAML, injects variables, and validates.
        Relative paths inside the file are resolved against the file's directory.

        :raises ConfigError: missing file, YAML syntax error or schema violation.
        """
        load_dotenv()

        p = Path(path or self.EXPERIMENT_CONFIG)
        if not p.exists():
            raise ConfigError(f"experiment file '{p}' not found")
        try:
            with open(p) as f:
                raw_data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"experiment file '{p}' is not valid YAML: {e}") from e
        if not isinstance(raw_data, dict):
            raise ConfigError(f"experiment file '{p}' must hold a mapping")

        # 1. Variable Substitution
        yaml_vars = raw_data.get("variables", {}) or {}
        combined_vars = {**os.environ, **yaml_vars}
        processed_data = inject_variables(raw_data, combined_vars)

        # 2. Validate
        config = parse_experiment(processed_data)
        base = p.resolve().parent
        self.CONFIG = config.model_copy(
            update={
                "dataset_root": _relative_to(base, config.dataset_root),
                "detections_dir": _relative_to(base, config.detections_dir),
                "synthetic_manifest": _relative_to(base, config.synthetic_manifest),
            }
        )
        logger.info(f"📄 Loaded experiment '{self.CONFIG.name}' from {p}")

        # 3. Apply Log Levels (from Env Vars, not YAML)
        self._apply_logging_config()
        return self.CONFIG

    def _apply_logging_config(self):
        """Sets log levels based on .env variables defined in this class."""

        # Map .env fields to module paths
        log_map = {
            "__main__": self.LOG_LEVEL_MAIN,
            "app.main": self.LOG_LEVEL_MAIN,
            "app.pipeline": self.LOG_LEVEL_MAIN,
            "app.stages": self.LOG_LEVEL_STAGES,
            "app.services": self.LOG_LEVEL_SERVICES,
            "app.stats": self.LOG_LEVEL_STATS,
            "app.iqa": self.LOG_LEVEL_IQA,
            "app.detection": self.LOG_LEVEL_DETECTION,
        }

        for module_name, level_str in log_map.items():
            logger_instance = logging.getLogger(module_name)
            level_value = getattr(logging, level_str.upper(), logging.INFO)
            logger_instance.setLevel(level_value)
            logger.debug(f"🔧 Log Level set to {level_str} for '{module_name}'")


def parse_experiment(data: dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise InvalidSpec(f"invalid experiment configuration: {e}") from e


@lru_cache
def get_settings() -> AppSettings:
    return AppSettings()


settings = get_settings()
