"""
Mix Stage.
Draws one fixed-size training mixture per (synthetic proportion, replicate) and writes
its manifest. The baseline (real data only) is always included.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import json
import logging

from ..errors import IoFailure
from ..manifest import dump_json, rebase_entry
from ..sampling.mixtures import (
    build_mixture_plans,
    emit_mixture_manifest,
    evaluated_plan,
    load_mixture_manifest,
)
from .base_stage import Stage

logger = logging.getLogger(__name__)

PLANS_FILE = "plans.json"


class MixStage(Stage):
    name = "mix"

    def manifest_path(self, plan_id: str):
        return self.directory / f"{plan_id}.json"

    def run(self):
        ctx = self._context
        config = ctx.config
        synthetic = ctx.synthetic.images if ctx.synthetic is not None else []

        plans = build_mixture_plans(
            real_train_ids=ctx.split.train,
            synthetic_pool_ids=[e.id for e in synthetic],
            p_values=[0.0, *config.p_values],
            replicates=config.replicates,
            base_seed=config.base_seed,
            n_training=config.n_training,
            held_out_ids=ctx.split.held_out(),
        )

        # Common base for entries coming from two stage directories.
        entries = {e.id: rebase_entry(e, ctx.stage_dir("ingest"), ctx.root) for e in ctx.real.images}
        entries |= {e.id: rebase_entry(e, ctx.stage_dir("synthesize"), ctx.root) for e in synthetic}
        for plan in plans:
            emit_mixture_manifest(plan, entries, ctx.root, self.manifest_path(plan.plan_id))

        dump_json(
            [
                {
                    "plan_id": plan.plan_id,
                    "combination": plan.combination,
                    "p": plan.p,
                    "replicate_id": plan.replicate_id,
                    "seed": plan.seed,
                    "evaluated_by": evaluated_plan(plan, plans, config.baseline_mode).plan_id,
                }
                for plan in plans
            ],
            self.directory / PLANS_FILE,
        )
        ctx.plans = plans

    def load(self):
        path = self.directory / PLANS_FILE
        try:
            listed = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise IoFailure(f"cannot read plan list '{path}': {e}") from e
        self._context.plans = [load_mixture_manifest(self.manifest_path(item["plan_id"]))[0] for item in listed]
