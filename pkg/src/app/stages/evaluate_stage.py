"""
Evaluate Stage.
Scores every detections file against the test split and gathers the aggregate metrics
into the long-format table (model, dataset_combination, replicate, metric, value).

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging
from concurrent.futures import ThreadPoolExecutor

import pandas as pd

from ..detection.io import read_detections_file, truths_from_labels, write_metric_csv
from ..detection.metrics import evaluate_detections
from ..detection.types import EvalConfig, MetricRow
from ..errors import IoFailure
from ..sampling.mixtures import evaluated_plan
from ..stats.pipeline import LONG_COLUMNS, read_long_csv
from .base_stage import Stage

logger = logging.getLogger(__name__)

LONG_FILE = "metrics_long.csv"
UNDEFINED_FILE = "undefined.csv"
UNDEFINED_COLUMNS = LONG_COLUMNS[:-1]
AGGREGATE_CLASS = "all"


class EvaluateStage(Stage):
    name = "evaluate"

    def _eval_config(self) -> EvalConfig:
        cfg = self._context.config.evaluation
        return EvalConfig(
            nms_iou=cfg.nms_iou,
            apply_nms=cfg.apply_nms,
            per_class=cfg.per_class,
            confidence_threshold=cfg.confidence_threshold,
        )

    def run(self):
        ctx = self._context
        config = ctx.config
        test = [ctx.labeled[i] for i in ctx.split.test]
        truths = truths_from_labels(test)
        eval_config = self._eval_config()

        def score(unit: tuple[str, str]) -> list[MetricRow]:
            model, plan_id = unit
            dets = read_detections_file(ctx.detections[unit])
            rows = evaluate_detections(dets, truths, eval_config, config.class_names)
            write_metric_csv(rows, self.directory / model / f"{plan_id}.csv")
            return rows

        units = sorted(ctx.detections)
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            scored = dict(zip(units, pool.map(score, units), strict=True))

        records, undefined = [], []
        for model in config.model_names():
            for plan in ctx.plans:
                source = evaluated_plan(plan, ctx.plans, config.baseline_mode)
                rows = scored[(model, source.plan_id)]
                values = {r.metric: r.value for r in rows if r.class_name == AGGREGATE_CLASS}
                for metric in config.evaluation.metrics:
                    value = values.get(metric)
                    if value is None:
                        undefined.append((model, plan.combination, plan.replicate_id, metric))
                        continue
                    records.append((model, plan.combination, plan.replicate_id, metric, value))

        frame = pd.DataFrame(records, columns=LONG_COLUMNS)
        missing = pd.DataFrame(undefined, columns=UNDEFINED_COLUMNS)
        try:
            frame.to_csv(self.directory / LONG_FILE, index=False, lineterminator="\n")
            missing.to_csv(self.directory / UNDEFINED_FILE, index=False, lineterminator="\n")
        except OSError as e:
            raise IoFailure(f"cannot write metric tables in '{self.directory}': {e}") from e
        if undefined:
            logger.warning(
                f"⚠️ {len(undefined)} metric value(s) undefined "
                "(no detections or no matches at the operating point). "
                f"Listed in {UNDEFINED_FILE} and left out of the long table."
            )
        ctx.metrics = read_long_csv(self.directory / LONG_FILE)
        logger.info(f"📊 Evaluated {len(units)} detection files into {len(frame)} metric values.")

    def load(self):
        self._context.metrics = read_long_csv(self.directory / LONG_FILE)
