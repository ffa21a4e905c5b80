"""
Statistical value types.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DataError, EmptySample

LetterGroups = dict[str, str]


@dataclass(frozen=True)
class Sample:
    """One dataset combination's values, one per replicate."""

    label: str
    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise EmptySample(f"sample '{self.label}' has no values")
        if not np.isfinite(self.values).all():
            raise DataError(f"sample '{self.label}' contains non-finite values")

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def sd(self) -> float:
        return float(np.std(self.values, ddof=1)) if self.n > 1 else 0.0


@dataclass(frozen=True)
class TestResult:
    __test__ = False

    test_name: str
    statistic: float
    p_value: float
    n: tuple[int, ...]

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise DataError(f"{self.test_name}: p-value {self.p_value} outside [0, 1]")


@dataclass(frozen=True)
class PairwiseMatrix:
    """Symmetric adjusted p-values with unit diagonal; `means` orders letters."""

    method: str
    labels: tuple[str, ...]
    p_adjusted: np.ndarray
    means: tuple[float, ...]

    def __post_init__(self):
        k = len(self.labels)
        p = self.p_adjusted
        if p.shape != (k, k) or len(self.means) != k:
            raise DataError(f"pairwise matrix shape {p.shape} does not fit {k} labels")
        if not np.allclose(p, p.T) or not np.all(np.diag(p) == 1.0):
            raise DataError("pairwise matrix must be symmetric with unit diagonal")
        if (p < 0).any() or (p > 1).any():
            raise DataError("pairwise p-values must lie in [0, 1]")

    def p(self, a: str, b: str) -> float:
        return float(self.p_adjusted[self.labels.index(a), self.labels.index(b)])
