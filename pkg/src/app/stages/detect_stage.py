"""
Detect Stage.
Produces one detections file on the fixed test split per (model, mixture plan): either
through the model's detector adapter, which trains on the plan and predicts, or by
copying pre-computed files in offline mode.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from ..adapters.schemas import DetectionRequest, DetectionResponse
from ..detection.io import read_detections_file, write_detections_file
from ..errors import ConfigError, IoFailure, SchemaViolation
from ..sampling.mixtures import MixturePlan, plans_to_run
from ..services.adapter_service import AdapterService
from .base_stage import Stage

logger = logging.getLogger(__name__)


class DetectStage(Stage):
    name = "detect"

    def detections_path(self, model: str, plan_id: str) -> Path:
        return self.directory / model / f"{plan_id}.txt"

    def _units(self) -> list[tuple[str, MixturePlan]]:
        ctx = self._context
        models = ctx.config.model_names()
        if not models:
            raise ConfigError("no detector models: configure detector adapters, or 'models' in offline mode")
        return [(m, p) for m in models for p in plans_to_run(ctx.plans, ctx.config.baseline_mode)]

    def _offline(self, model: str, plan: MixturePlan) -> Path:
        source = self._context.config.detections_dir / model / f"{plan.plan_id}.txt"
        if not source.is_file():
            raise IoFailure(f"offline detections missing for {model}/{plan.plan_id}: '{source}'")
        target = self.detections_path(model, plan.plan_id)
        write_detections_file(read_detections_file(source), target)
        return target

    def _adapter(self, model: str, plan: MixturePlan) -> Path:
        ctx = self._context
        config = ctx.config
        split_dir = ctx.stage_dir("split").resolve()
        request = DetectionRequest(
            model=model,
            plan_id=plan.plan_id,
            seed=plan.seed,
            train_manifest=str((ctx.stage_dir("mix") / f"{plan.plan_id}.json").resolve()),
            val_manifest=str(split_dir / "val.json"),
            test_manifest=str(split_dir / "test.json"),
            class_names=list(config.class_names),
            hyperparameters=config.training.model_dump(mode="json"),
        )
        run_dir = self.directory / model / "runs" / plan.plan_id
        service = AdapterService(config.detector_adapters()[model])
        response = service.run(request, DetectionResponse, run_dir)
        try:
            dets = read_detections_file(run_dir / response.detections)
        except (IoFailure, ValueError) as e:
            raise SchemaViolation(f"{model}/{plan.plan_id} detections are malformed: {e}") from e
        target = self.detections_path(model, plan.plan_id)
        write_detections_file(dets, target)
        return target

    def run(self):
        ctx = self._context
        units = self._units()
        produce = self._offline if ctx.config.offline else self._adapter
        mode = "offline files" if ctx.config.offline else "detector adapters"
        logger.info(f"🔍 Collecting detections for {len(units)} (model, plan) units from {mode}.")

        with ThreadPoolExecutor(max_workers=ctx.config.workers) as pool:
            paths = list(pool.map(lambda unit: produce(*unit), units))
        ctx.detections = {(m, p.plan_id): path for (m, p), path in zip(units, paths, strict=True)}

    def load(self):
        ctx = self._context
        detections = {}
        for model, plan in self._units():
            path = self.detections_path(model, plan.plan_id)
            if not path.is_file():
                raise IoFailure(f"completed detect stage lacks '{path}'")
            detections[(model, plan.plan_id)] = path
        ctx.detections = detections
