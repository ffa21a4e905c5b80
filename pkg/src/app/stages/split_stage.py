"""
Split Stage.
Partitions the real images into train/val/test. Val and test are real-only and fixed
for the whole experiment.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import json
import logging

from ..errors import IoFailure
from ..manifest import dump_json, write_subset_manifest
from ..sampling.splitter import DatasetSplit, split_dataset
from .base_stage import Stage

logger = logging.getLogger(__name__)

SPLIT_FILE = "split.json"
SUBSETS = ("train", "val", "test")


class SplitStage(Stage):
    name = "split"

    def manifest_path(self, subset: str):
        return self.directory / f"{subset}.json"

    def run(self):
        ctx = self._context
        spec = ctx.config.split_spec()
        split = split_dataset([e.id for e in ctx.real.images], spec)

        entries = ctx.real.by_id()
        source_base = ctx.stage_dir("ingest")
        for subset in SUBSETS:
            ids = getattr(split, subset)
            write_subset_manifest(entries, ids, source_base, self.manifest_path(subset), {"subset": subset})

        dump_json(
            {
                "seed": spec.seed,
                "fractions": {"train": spec.train_frac, "val": spec.val_frac, "test": spec.test_frac},
                **{subset: getattr(split, subset) for subset in SUBSETS},
            },
            self.directory / SPLIT_FILE,
        )
        ctx.split = split

    def load(self):
        path = self.directory / SPLIT_FILE
        try:
            raw = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise IoFailure(f"cannot read split '{path}': {e}") from e
        self._context.split = DatasetSplit(train=raw["train"], val=raw["val"], test=raw["test"])
