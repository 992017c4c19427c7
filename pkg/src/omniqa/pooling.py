"""Temporal pooling of frame scores and averaging across viewers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .metrics import FrameScoreSeries, MetricDescriptor

__all__ = [
    "STRATEGIES",
    "PoolingConfig",
    "QualityScore",
    "pool",
    "pool_values",
    "hysteresis",
    "half_gaussian",
    "aggregate_viewers",
]

STRATEGIES = ("hysteresis", "arithmetic_mean", "harmonic_mean", "gaussian_ascending", "minkowski", "percentile")


@dataclass(frozen=True)
class PoolingConfig:
    """Pooling strategy and its parameters.

    ``strict_memory`` switches the hysteresis memory term from "minimum of the past K
    raw scores" to a minimum over past memory values, which collapses to the first
    score for every frame. It exists only for comparison.
    """

    strategy: str = "hysteresis"
    K: int = 20
    alpha: float = 0.8
    minkowski_p: float = 2.0
    percentile_q: float = 0.10
    strict_memory: bool = False

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown pooling strategy {self.strategy!r}; choose from {STRATEGIES}")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError("K must be an integer >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if not self.minkowski_p > 0:
            raise ValueError("Minkowski exponent must be positive")
        if not 0.0 < self.percentile_q <= 1.0:
            raise ValueError("percentile fraction must lie in (0, 1]")

    @property
    def sigma(self) -> float:
        return (2 * self.K - 1) / 12.0


@dataclass(frozen=True)
class QualityScore:
    value: float
    metric: MetricDescriptor
    viewer_count: int = 1

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError("quality score must be finite")
        if self.viewer_count < 1:
            raise ValueError("viewer count must be >= 1")


def half_gaussian(length: int, sigma: float) -> np.ndarray:
    """Unit-sum weights ``exp(-i^2 / 2 sigma^2)`` for offsets ``i = 0..length-1`` (peak first)."""
    w = np.exp(-(np.arange(length) ** 2) / (2.0 * sigma**2))
    return w / w.sum()


def hysteresis(q: np.ndarray, K: int = 20, alpha: float = 0.8, strict_memory: bool = False) -> float:
    """Temporal hysteresis pooling of higher-is-better scores ``q``.

    Per frame ``j`` (0-based), with ``N = len(q)``:

    * memory: ``q[0]`` for ``j = 0``, else ``min(q[max(0, j-K) : j])``;
    * current: ``q[j : min(j+K, N-1) + 1]`` sorted ascending and weighted by the
      descending half Gaussian (sigma ``(2K-1)/12``), renormalized when truncated;
    * adjusted: ``alpha * memory + (1 - alpha) * current``.

    Returns the mean adjusted score.
    """
    q = np.asarray(q, dtype=np.float64)
    n = len(q)
    sigma = (2 * K - 1) / 12.0
    full = np.exp(-(np.arange(K + 1) ** 2) / (2.0 * sigma**2))

    memory = np.empty(n)
    memory[0] = q[0]
    if strict_memory:
        memory[1:] = q[0]
    else:
        for j in range(1, n):
            memory[j] = q[max(0, j - K) : j].min()

    current = np.empty(n)
    for j in range(n):
        window = np.sort(q[j : min(j + K, n - 1) + 1])
        w = full[: len(window)]
        current[j] = np.dot(w, window) / w.sum()

    return float(np.mean(alpha * memory + (1.0 - alpha) * current))


def _signed_power_mean(q: np.ndarray, p: float) -> float:
    m = np.mean(np.sign(q) * np.abs(q) ** p)
    return float(math.copysign(abs(m) ** (1.0 / p), m))


def pool_values(q, cfg: PoolingConfig = PoolingConfig(), higher_is_better: bool = True) -> float:
    """Pool raw scores ``q`` with ``cfg.strategy``; see :func:`pool`."""
    q = np.asarray(q, dtype=np.float64)
    if q.size == 0:
        raise ValueError("cannot pool an empty series")
    n = len(q)
    s = cfg.strategy
    if s == "hysteresis":
        if higher_is_better:
            return hysteresis(q, cfg.K, cfg.alpha, cfg.strict_memory)
        return -hysteresis(-q, cfg.K, cfg.alpha, cfg.strict_memory)
    if s == "arithmetic_mean":
        return float(np.mean(q))
    if s == "harmonic_mean":
        if np.any(q <= 0):
            raise ValueError("harmonic mean needs strictly positive scores")
        return float(n / np.sum(1.0 / q))
    if s == "gaussian_ascending":
        # recency weighting: peak on the last frame
        w = half_gaussian(n, cfg.sigma)[::-1]
        return float(np.dot(w, q))
    if s == "minkowski":
        return _signed_power_mean(q, cfg.minkowski_p)
    if s == "percentile":
        count = max(1, math.ceil(round(cfg.percentile_q * n, 9)))
        ordered = np.sort(q) if higher_is_better else np.sort(q)[::-1]
        return float(np.mean(ordered[:count]))
    raise AssertionError(s)


def pool(series: FrameScoreSeries, cfg: PoolingConfig = PoolingConfig()) -> QualityScore:
    """Collapse one viewer's frame scores into a single quality value.

    Strategies: ``hysteresis`` (default), ``arithmetic_mean``, ``harmonic_mean``,
    ``gaussian_ascending`` (ascending half Gaussian over frame index, last frame
    weighted most), ``minkowski`` (power mean with exponent ``minkowski_p``) and
    ``percentile`` (mean of the worst ``ceil(q * N)`` frames).
    Hysteresis handles lower-is-better metrics by negating, pooling and negating back.
    """
    value = pool_values(series.scores, cfg, series.metric.higher_is_better)
    return QualityScore(value, series.metric, 1)


def aggregate_viewers(scores: Sequence[QualityScore]) -> QualityScore:
    """Average per-viewer quality values of one metric."""
    if not scores:
        raise ValueError("no viewer scores to aggregate")
    metric = scores[0].metric
    if any(s.metric != metric for s in scores):
        raise ValueError("cannot aggregate scores from different metrics")
    return QualityScore(float(np.mean([s.value for s in scores])), metric, len(scores))
