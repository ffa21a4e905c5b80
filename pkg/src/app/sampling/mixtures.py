"""
Real/synthetic training mixtures.
For each synthetic proportion p and replicate, a fixed-size training set is drawn:
round(p * n_training) synthetic images plus a real complement, both without replacement.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import hashlib
import logging
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path

import numpy as np

from ..annotations.types import Provenance
from ..errors import DataError, InsufficientRealPool, InsufficientSyntheticPool, InvalidSpec
from ..manifest import Manifest, ManifestEntry, load_manifest, write_subset_manifest
from .splitter import scaled_count

logger = logging.getLogger(__name__)

BASELINE_LABEL = "Real data only"
LABEL_PATTERN = re.compile(r"^Syn(\d+) Real(\d+)$")


class BaselineMode(StrEnum):
    # Baseline (p = 0) trained once; its value fills every replicate slot.
    SINGLE = "single"
    PER_REPLICATE = "per_replicate"


@dataclass(frozen=True)
class MixturePlan:
    p: float
    n_training: int
    n_synthetic: int
    replicate_id: int
    seed: int
    real_ids: tuple[str, ...]
    synthetic_ids: tuple[str, ...]

    def __post_init__(self):
        if len(self.synthetic_ids) != self.n_synthetic:
            found = len(self.synthetic_ids)
            raise DataError(f"plan {self.plan_id}: {found} synthetic ids, expected {self.n_synthetic}")
        size = len(self.real_ids) + len(self.synthetic_ids)
        if size != self.n_training:
            raise DataError(f"plan {self.plan_id}: size {size} != {self.n_training}")
        overlap = set(self.real_ids) & set(self.synthetic_ids)
        if overlap:
            raise DataError(f"plan {self.plan_id}: ids in both pools: {sorted(overlap)[:5]}")

    @property
    def plan_id(self) -> str:
        return f"p{proportion_percent(self.p):03d}_r{self.replicate_id:02d}"

    @property
    def is_baseline(self) -> bool:
        return self.n_synthetic == 0 and self.p == 0.0

    @property
    def combination(self) -> str:
        return combination_label(self.p)


def proportion_percent(p: float) -> int:
    """Whole percentage naming a proportion in plan ids and row labels."""
    return round(p * 100)


def combination_label(p: float) -> str:
    """Table row label: 'Real data only' for p = 0, otherwise e.g. 'Syn10 Real90'."""
    if p == 0:
        return BASELINE_LABEL
    syn = proportion_percent(p)
    return f"Syn{syn} Real{100 - syn}"


def proportion_from_label(label: str) -> float | None:
    """Synthetic proportion encoded in a combination label; None for labels of another shape."""
    if label == BASELINE_LABEL:
        return 0.0
    match = LABEL_PATTERN.match(label)
    if not match or int(match[1]) + int(match[2]) != 100:
        return None
    return int(match[1]) / 100


def derive_seed(base_seed: int, p: float, replicate_id: int) -> int:
    """64-bit seed for one (p, replicate) stream: first 8 bytes of sha256 over the triple."""
    digest = hashlib.sha256(f"{base_seed}:{p:.6f}:{replicate_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _validate_p_values(p_values: Sequence[float], replicates: int):
    if replicates < 1:
        raise InvalidSpec(f"replicates must be >= 1, got {replicates}")
    if not p_values:
        raise InvalidSpec("at least one synthetic proportion is required")
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise InvalidSpec(f"synthetic proportion {p} outside [0, 1]")


def build_mixture_plans(
    real_train_ids: Sequence[str],
    synthetic_pool_ids: Sequence[str],
    p_values: Sequence[float],
    replicates: int,
    base_seed: int,
    n_training: int | None = None,
    held_out_ids: Iterable[str] = (),
) -> list[MixturePlan]:
    """
    Builds one plan per (p, replicate), ordered by p then replicate.

    :param real_train_ids: Real images of the training split.
    :param synthetic_pool_ids: Every synthetic image available for mixing.
    :param p_values: Synthetic proportions in [0, 1].
    :param replicates: Independent draws per proportion.
    :param base_seed: Root of all derived seeds.
    :param n_training: Constant training-set size; defaults to the number of real training images.
    :param held_out_ids: Validation/test ids, which must never enter a training plan.
    """
    _validate_p_values(p_values, replicates)

    real_pool = sorted(set(real_train_ids))
    syn_pool = sorted(set(synthetic_pool_ids))
    n_training = len(real_pool) if n_training is None else n_training
    if n_training < 1:
        raise InvalidSpec(f"n_training must be positive, got {n_training}")

    leaked = (set(real_pool) | set(syn_pool)) & set(held_out_ids)
    if leaked:
        raise DataError(f"held-out ids present in the training pools: {sorted(leaked)[:5]}")

    shared = set(real_pool) & set(syn_pool)
    if shared:
        raise DataError(f"ids present in both the real and the synthetic pool: {sorted(shared)[:5]}")

    need_syn = max(scaled_count(p, n_training) for p in p_values)
    if need_syn > len(syn_pool):
        raise InsufficientSyntheticPool(f"need {need_syn} synthetic images, pool has {len(syn_pool)}")
    need_real = max(n_training - scaled_count(p, n_training) for p in p_values)
    if need_real > len(real_pool):
        raise InsufficientRealPool(f"need {need_real} real images, training split has {len(real_pool)}")

    real_arr = np.array(real_pool, dtype=object)
    syn_arr = np.array(syn_pool, dtype=object)

    plans = []
    for p in sorted(p_values):
        n_syn = scaled_count(p, n_training)
        for rep in range(replicates):
            seed = derive_seed(base_seed, p, rep)
            rng = np.random.default_rng(seed)
            syn_ids = rng.choice(syn_arr, size=n_syn, replace=False) if n_syn else []
            real_ids = rng.choice(real_arr, size=n_training - n_syn, replace=False)
            plans.append(
                MixturePlan(
                    p=float(p),
                    n_training=n_training,
                    n_synthetic=n_syn,
                    replicate_id=rep,
                    seed=seed,
                    real_ids=tuple(sorted(real_ids)),
                    synthetic_ids=tuple(sorted(syn_ids)),
                )
            )
        logger.debug(f"p={p:.2f}: {replicates} plans with {n_syn} synthetic + {n_training - n_syn} real")

    logger.info(f"🧪 Built {len(plans)} mixture plans (n_training={n_training}, base_seed={base_seed})")
    return plans


def evaluated_plan(plan: MixturePlan, plans: Sequence[MixturePlan], mode: BaselineMode) -> MixturePlan:
    """Plan whose model actually fills `plan`'s slot (replicate 0 for baselines in single mode)."""
    if mode is BaselineMode.SINGLE and plan.is_baseline and plan.replicate_id != 0:
        for other in plans:
            if other.is_baseline and other.replicate_id == 0:
                return other
    return plan


def plans_to_run(plans: Sequence[MixturePlan], mode: BaselineMode) -> list[MixturePlan]:
    return [plan for plan in plans if evaluated_plan(plan, plans, mode) is plan]


def emit_mixture_manifest(
    plan: MixturePlan,
    entries: dict[str, ManifestEntry],
    source_base: Path,
    path: Path,
):
    """
    Writes the training manifest of one plan.
    Image and label paths are re-expressed relative to the new manifest's directory.

    :param entries: Manifest entries by id, covering every id of the plan.
    :param source_base: Directory the entries' relative paths refer to.
    """
    meta = {
        "plan_id": plan.plan_id,
        "combination": plan.combination,
        "p": plan.p,
        "replicate_id": plan.replicate_id,
        "seed": plan.seed,
        "n_training": plan.n_training,
        "n_synthetic": plan.n_synthetic,
    }
    write_subset_manifest(entries, (*plan.real_ids, *plan.synthetic_ids), source_base, path, meta)


def load_mixture_manifest(path: Path) -> tuple[MixturePlan, Manifest]:
    manifest = load_manifest(path)
    meta = manifest.meta
    try:
        plan = MixturePlan(
            p=float(meta["p"]),
            n_training=int(meta["n_training"]),
            n_synthetic=int(meta["n_synthetic"]),
            replicate_id=int(meta["replicate_id"]),
            seed=int(meta["seed"]),
            real_ids=tuple(e.id for e in manifest.images if e.provenance is Provenance.REAL),
            synthetic_ids=tuple(e.id for e in manifest.images if e.provenance is Provenance.SYNTHETIC),
        )
    except KeyError as e:
        raise DataError(f"mixture manifest '{path}' lacks plan field {e}") from e
    return plan, manifest
