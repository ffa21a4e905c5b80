"""
Deterministic train/val/test splitting.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from ..errors import DuplicateId, EmptyManifest, InvalidSpec

logger = logging.getLogger(__name__)

FRACTION_TOLERANCE = 1e-12


def scaled_count(fraction: float, n: int) -> int:
    """round(fraction * n), half away from zero, computed on the decimal value of `fraction`."""
    return int((Decimal(str(fraction)) * n).quantize(Decimal(1), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.70
    val_frac: float = 0.15
    test_frac: float = 0.15
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if any(f <= 0 for f in fracs):
            raise InvalidSpec(f"split fractions must all be positive, got {fracs}")
        if abs(sum(fracs) - 1.0) > FRACTION_TOLERANCE:
            raise InvalidSpec(f"split fractions must sum to 1, got {sum(fracs)!r}")


@dataclass(frozen=True)
class DatasetSplit:
    train: list[str]
    val: list[str]
    test: list[str]

    def held_out(self) -> set[str]:
        return set(self.val) | set(self.test)


def split_dataset(image_ids: Sequence[str], spec: SplitSpec) -> DatasetSplit:
    """
    Partitions `image_ids` into train/val/test.
    Val and test get round(frac * n) images each; the remainder goes to train.
    The result depends only on the id set and the seed, not on input order.

    :param image_ids: Ids of every image in the manifest.
    :param spec: Fractions and seed.
    """
    if not image_ids:
        raise EmptyManifest("cannot split an empty manifest")

    seen: set[str] = set()
    for image_id in image_ids:
        if image_id in seen:
            raise DuplicateId(image_id)
        seen.add(image_id)

    n = len(image_ids)
    n_val = scaled_count(spec.val_frac, n)
    n_test = scaled_count(spec.test_frac, n)
    n_train = n - n_val - n_test

    ordered = np.array(sorted(image_ids), dtype=object)
    perm = np.random.default_rng(spec.seed).permutation(n)
    shuffled = ordered[perm]

    split = DatasetSplit(
        train=sorted(shuffled[:n_train].tolist()),
        val=sorted(shuffled[n_train : n_train + n_val].tolist()),
        test=sorted(shuffled[n_train + n_val :].tolist()),
    )
    logger.info(f"✂️ Split {n} images -> train={n_train} val={n_val} test={n_test} (seed={spec.seed})")
    return split
