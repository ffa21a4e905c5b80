"""
Experiment runner: ingest -> split -> synthesize -> mix -> detect -> evaluate -> stats -> report.
Every stage persists its outputs under the experiment directory, so a run can resume
after a failure or recompute from any stage onwards.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import json
import logging
from pathlib import Path

from .context import ExperimentContext
from .errors import ConfigError
from .manifest import dump_json
from .settings import ExperimentConfig
from .stages import STAGE_NAMES, STAGES

logger = logging.getLogger(__name__)

EXPERIMENT_FILE = "experiment.json"


def experiment_record(config: ExperimentConfig) -> dict:
    """The resolved configuration, training hyperparameters and baseline mode included."""
    return {"config": config.model_dump(mode="json"), "stages": list(STAGE_NAMES)}


def _write_record(config: ExperimentConfig, root: Path):
    path = root / EXPERIMENT_FILE
    record = experiment_record(config)
    if path.exists():
        try:
            previous = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError):
            previous = None
        if previous != record:
            raise ConfigError(f"'{root}' holds an experiment with a different configuration")
        return
    dump_json(record, path)


def run_experiment(
    config: ExperimentConfig,
    output_dir: Path,
    resume: bool = False,
    from_stage: str | None = None,
) -> ExperimentContext:
    """
    Runs every stage in order.

    :param resume: Load completed stages instead of refusing to overwrite them.
    :param from_stage: Recompute this stage and every later one; earlier stages are loaded.
    :raises ConfigError: unknown stage, or a completed stage without resume/from_stage.
    """
    if from_stage is not None and from_stage not in STAGE_NAMES:
        raise ConfigError(f"unknown stage '{from_stage}'; choose one of {', '.join(STAGE_NAMES)}")

    output_dir.mkdir(parents=True, exist_ok=True)
    _write_record(config, output_dir)
    ctx = ExperimentContext(config=config, root=output_dir)
    mode = "offline" if config.offline else "adapters"
    logger.info(f"🚀 Experiment '{config.name}' ({mode}) -> {output_dir}")

    first_recomputed = STAGE_NAMES.index(from_stage) if from_stage is not None else len(STAGE_NAMES)
    for index, stage_cls in enumerate(STAGES):
        recompute = index >= first_recomputed
        stage_cls(ctx).execute(resume=resume or from_stage is not None, recompute=recompute)

    for kind, count in sorted(ctx.warnings.items()):
        logger.warning(f"⚠️ {count} {kind.replace('_', ' ')} during the run.")
    logger.info(f"✅ Experiment '{config.name}' finished. Tables in {output_dir / 'report'}.")
    return ctx
