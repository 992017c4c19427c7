"""End-to-end omnidirectional quality prediction for one reference/distorted pair."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .img2video import ConversionConfig, iter_frame_pairs, load_panorama, sampling_rate
from .metrics import FrameScoreSeries, MetricDescriptor, get_metric, score_frame_pairs
from .pooling import PoolingConfig, QualityScore, aggregate_viewers, pool
from .scanpath import (
    DEFAULT_BROWNIAN_SIGMA,
    DEFAULT_EXPLORATION_TIME,
    DEFAULT_STARTING_POINTS,
    GazeModelConfig,
    Scanpath,
    ViewingCondition,
    brownian_latitude_variant,
    default_scanpath,
    load_scanpath,
    resample,
    rotation_scanpath,
)
from .sphere import SphericalPoint, check_equirect, downsample, to_luma

__all__ = ["RunConfig", "PairResult", "viewer_scanpaths", "score_pair", "score_files", "score_record"]

SCANPATH_MODELS = ("default", "rotation", "brownian")
# baselines defined on the whole equirectangular image rather than on viewports
PANORAMA_METRICS = ("ws-psnr", "s-psnr")


@dataclass(frozen=True)
class RunConfig:
    """All knobs of the pipeline; the defaults are the reference settings.

    ``scanpaths`` holds recorded trajectories; when empty, ``scanpath_model`` generates
    one. Every (starting point, scanpath) combination counts as one viewer.
    """

    conversion: ConversionConfig = field(default_factory=ConversionConfig)
    pooling: PoolingConfig = field(default_factory=PoolingConfig)
    gaze: GazeModelConfig = field(default_factory=GazeModelConfig)
    starting_points: tuple[SphericalPoint, ...] = DEFAULT_STARTING_POINTS
    exploration_time: float = DEFAULT_EXPLORATION_TIME
    metric: str = "psnr"
    seed: int = 0
    scanpath_model: str = "default"
    brownian_sigma: float = DEFAULT_BROWNIAN_SIGMA
    scanpaths: tuple[Scanpath, ...] = ()
    workers: int | None = None

    def __post_init__(self):
        if self.scanpath_model not in SCANPATH_MODELS:
            raise ValueError(f"unknown scanpath model {self.scanpath_model!r}")
        if not self.starting_points:
            raise ValueError("at least one starting point is required")
        if not (math.isfinite(self.exploration_time) and self.exploration_time > 0):
            raise ValueError("exploration time must be positive")

    @property
    def rate(self) -> float:
        return sampling_rate(self.conversion)


@dataclass
class PairResult:
    score: QualityScore
    viewers: list[QualityScore]
    series: list[FrameScoreSeries]
    labels: list[str]


def viewer_scanpaths(config: RunConfig) -> list[Scanpath]:
    """Scanpaths sampled at the conversion rate, one per viewer trajectory."""
    rate, T = config.rate, config.exploration_time
    if config.scanpaths:
        return [resample(p, rate, T) for p in config.scanpaths]
    if config.scanpath_model == "rotation":
        return [rotation_scanpath(T, rate)]
    base = default_scanpath(T, config.gaze, rate)
    if config.scanpath_model == "brownian":
        return [brownian_latitude_variant(base, config.brownian_sigma, config.seed)]
    return [base]


def _prepare(img) -> np.ndarray:
    return to_luma(downsample(check_equirect(img)))


def score_pair(ref, dist, config: RunConfig = RunConfig(), metric: MetricDescriptor | None = None) -> PairResult:
    """Predict the quality of ``dist`` against ``ref`` (equirectangular arrays in [0, 255]).

    Both panoramas are downsampled and converted to luma, turned into viewport
    sequences for every viewer, scored frame by frame (streamed, so frames are never
    all held in memory), pooled over time and averaged over viewers.

    WS-PSNR and S-PSNR are computed once on the whole panorama pair instead.
    """
    metric = metric if metric is not None else get_metric(config.metric)
    ref = _prepare(ref)
    dist = _prepare(dist)
    if ref.shape != dist.shape:
        raise ValueError(f"reference {ref.shape} and distorted {dist.shape} panoramas differ in size")
    if metric.name in PANORAMA_METRICS:
        q = QualityScore(metric(ref, dist), metric, 1)
        return PairResult(q, [q], [], ["panorama"])
    viewers, series, labels = [], [], []
    for path in viewer_scanpaths(config):
        for i, start in enumerate(config.starting_points):
            cond = ViewingCondition(start, config.exploration_time)
            pairs = iter_frame_pairs(ref, dist, cond, path, config.conversion)
            s = score_frame_pairs(pairs, metric, config.rate, config.workers)
            series.append(s)
            viewers.append(pool(s, config.pooling))
            labels.append(f"{path.label}@{i}")
    return PairResult(aggregate_viewers(viewers), viewers, series, labels)


def score_files(ref_path, dist_path, config: RunConfig = RunConfig()) -> PairResult:
    return score_pair(load_panorama(ref_path), load_panorama(dist_path), config)


def score_record(record, config: RunConfig = RunConfig()) -> float:
    """Pipeline prediction for one manifest record (its own scanpath file, if given)."""
    if record.scanpath_path is not None:
        config = replace(config, scanpaths=(load_scanpath(record.scanpath_path),))
    return score_files(record.ref_path, record.dist_path, config).score.value
