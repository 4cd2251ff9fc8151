"""Average ranks, the Friedman statistic and the Nemenyi critical difference."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, rankdata

# Nemenyi q_alpha at alpha = 0.05 (studentized range / sqrt 2) for k = 2..10 algorithms
Q_ALPHA_005 = {2: 1.960, 3: 2.343, 4: 2.569, 5: 2.728, 6: 2.850, 7: 2.949, 8: 3.031, 9: 3.102, 10: 3.164}


@dataclass(frozen=True)
class RankTable:
    accuracy: np.ndarray  # N datasets x k algorithms
    ranks: np.ndarray  # 1 = best, ties averaged
    average: np.ndarray  # column means of ranks

    @property
    def n_datasets(self) -> int:
        return self.ranks.shape[0]

    @property
    def n_algorithms(self) -> int:
        return self.ranks.shape[1]


def average_ranks(acc) -> RankTable:
    """Rank algorithms within each dataset by descending accuracy."""
    try:
        acc = np.array(acc, dtype=float)
    except ValueError:
        raise ValueError("accuracy matrix is ragged") from None
    if acc.ndim != 2:
        raise ValueError("accuracy matrix is ragged")
    if acc.shape[0] < 1 or acc.shape[1] < 2:
        raise ValueError("need at least one dataset and two algorithms")
    ranks = rankdata(-acc, method="average", axis=1)
    return RankTable(acc, ranks, ranks.mean(axis=0))


def friedman_statistic(avg_ranks, n: int, k: int | None = None) -> float:
    """chi2_F = 12N / (k(k+1)) * (sum R_j^2 - k (k+1)^2 / 4)."""
    r = np.asarray(avg_ranks, dtype=float).ravel()
    k = r.shape[0] if k is None else k
    if r.shape[0] != k:
        raise ValueError(f"{r.shape[0]} average ranks given for k={k} algorithms")
    if k < 2 or n < 1:
        raise ValueError("need k >= 2 and N >= 1")
    return float(12.0 * n / (k * (k + 1)) * (np.sum(r**2) - k * (k + 1) ** 2 / 4.0))


def friedman_p_value(stat: float, k: int) -> float:
    return float(chi2.sf(stat, k - 1))


def nemenyi_cd(k: int, n: int, q_alpha: float | None = None) -> float:
    """CD = q_alpha * sqrt(k(k+1) / (6N)); q_alpha defaults to the alpha=0.05 table."""
    if k < 2 or n < 1:
        raise ValueError("need k >= 2 and N >= 1")
    if q_alpha is None:
        if k not in Q_ALPHA_005:
            raise ValueError(f"no built-in q_alpha for k={k}; pass one explicitly")
        q_alpha = Q_ALPHA_005[k]
    if q_alpha < 0:
        raise ValueError("q_alpha must be nonnegative")
    return float(q_alpha * np.sqrt(k * (k + 1) / (6.0 * n)))
