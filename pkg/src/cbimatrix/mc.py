"""Monte Carlo estimates and goodness-of-fit helpers."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    n: int
    seed: int
    shards: int = 1
    diagnostics: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_values(cls, values, seed: int, shards: int = 1) -> "MCEstimate":
        values = np.asarray(values, dtype=float)
        n = values.size
        if n == 0:
            return cls(float("nan"), float("nan"), 0, seed, shards)
        mean = float(np.mean(values))
        se = float(np.std(values, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        return cls(mean, se, n, seed, shards)

    @classmethod
    def from_proportion(cls, hits: int, n: int, seed: int, shards: int = 1) -> "MCEstimate":
        """Binomial proportion with standard error sqrt(p(1-p)/n)."""
        p = hits / n
        return cls(float(p), float(np.sqrt(p * (1.0 - p) / n)), int(n), seed, shards)

    def z_score(self, target: float) -> float:
        if self.std_error == 0:
            return 0.0 if self.mean == target else float("inf")
        return abs(self.mean - target) / self.std_error

    def to_dict(self) -> dict:
        return asdict(self)


def ks_pvalue(samples, cdf) -> float:
    return float(stats.kstest(np.asarray(samples, dtype=float), cdf).pvalue)


def ks_2samp_pvalue(x, y) -> float:
    return float(stats.ks_2samp(np.asarray(x, dtype=float), np.asarray(y, dtype=float)).pvalue)


def chisquare_pvalue(counts, probs) -> float:
    """Pearson chi-square GOF of observed cell counts against cell probabilities."""
    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    probs = probs / probs.sum()
    expected = counts.sum() * probs
    return float(stats.chisquare(counts, expected).pvalue)
