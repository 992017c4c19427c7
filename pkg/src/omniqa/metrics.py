"""Full-reference frame metrics and panorama-domain PSNR baselines.

All metrics work on luma in the [0, 255] range; RGB input is converted with
BT.601 weights first.
"""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.ndimage import correlate1d
from scipy.signal import convolve2d

from .sphere import sample_bilinear, sphere_to_pixel, to_luma

__all__ = [
    "PSNR_CAP",
    "MetricDescriptor",
    "FrameScoreSeries",
    "FrameScoreFormatError",
    "METRICS",
    "get_metric",
    "external_metric",
    "psnr",
    "ssim",
    "nlpd",
    "ws_psnr",
    "ws_weights",
    "s_psnr",
    "fibonacci_sphere",
    "score_frames",
    "score_frame_pairs",
    "load_frame_scores",
    "save_frame_scores",
]

PSNR_CAP = 100.0
PEAK = 255.0
HIGHER = "higher"
LOWER = "lower"


class FrameScoreFormatError(ValueError):
    pass


@dataclass(frozen=True)
class MetricDescriptor:
    name: str
    polarity: str = HIGHER
    range: tuple[float, float] | None = None
    func: Callable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.polarity not in (HIGHER, LOWER):
            raise ValueError(f"polarity must be {HIGHER!r} or {LOWER!r}")

    @property
    def higher_is_better(self) -> bool:
        return self.polarity == HIGHER

    def __call__(self, x, y) -> float:
        if self.func is None:
            raise ValueError(f"metric {self.name!r} has no native implementation; load its scores instead")
        return self.func(x, y)


@dataclass(frozen=True, eq=False)
class FrameScoreSeries:
    scores: np.ndarray
    metric: MetricDescriptor
    rate: float | None = None

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64).reshape(-1).copy()
        if len(scores) == 0:
            raise ValueError("a score series needs at least one value")
        if not np.all(np.isfinite(scores)):
            raise ValueError("score series contains non-finite values")
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)

    def __len__(self) -> int:
        return len(self.scores)


def _check_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = to_luma(x)
    y = to_luma(y)
    if x.shape != y.shape:
        raise ValueError(f"frame shapes differ: {x.shape} vs {y.shape}")
    return x, y


def _psnr_from_mse(mse: float) -> float:
    if mse <= 0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * math.log10(PEAK**2 / mse))


def psnr(x, y) -> float:
    """PSNR in dB for 8-bit-range frames; identical frames give ``PSNR_CAP``."""
    x, y = _check_pair(x, y)
    return _psnr_from_mse(float(np.mean((x - y) ** 2)))


# SSIM -----------------------------------------------------------------------

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _gaussian_1d(size: int, sigma: float) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    return g / g.sum()


def _filter_valid(img: np.ndarray, g: np.ndarray) -> np.ndarray:
    r = len(g) // 2
    out = correlate1d(img, g, axis=0, mode="constant")
    out = correlate1d(out, g, axis=1, mode="constant")
    return out[r:-r, r:-r]


def ssim_map(x, y) -> np.ndarray:
    x, y = _check_pair(x, y)
    if min(x.shape) < SSIM_WINDOW:
        raise ValueError(f"SSIM needs frames of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {x.shape}")
    g = _gaussian_1d(SSIM_WINDOW, SSIM_SIGMA)
    c1 = (SSIM_K1 * PEAK) ** 2
    c2 = (SSIM_K2 * PEAK) ** 2
    mu_x = _filter_valid(x, g)
    mu_y = _filter_valid(y, g)
    sxx = _filter_valid(x * x, g) - mu_x * mu_x
    syy = _filter_valid(y * y, g) - mu_y * mu_y
    sxy = _filter_valid(x * y, g) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * sxy + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (sxx + syy + c2)
    return num / den


def ssim(x, y) -> float:
    """Mean SSIM over the valid (unpadded) region, 11x11 Gaussian window with sigma 1.5."""
    return float(np.mean(ssim_map(x, y)))


# NLPD -----------------------------------------------------------------------
# Constants of the published normalized Laplacian pyramid model; inputs are
# scaled to [0, 1] to match them.

_LPF_1D = np.array([0.05, 0.25, 0.4, 0.25, 0.05])
LAPLACIAN_FILTER = np.outer(_LPF_1D, _LPF_1D)
NLPD_SIGMAS = (0.0248, 0.0185, 0.0179, 0.0191, 0.0220, 0.2782)
NLPD_DN_FILTERS = (
    np.array([[0, 0.1011, 0], [0.1493, 0, 0.1460], [0, 0.1015, 0]]),
    np.array([[0, 0.0757, 0], [0.1986, 0, 0.1846], [0, 0.0837, 0]]),
    np.array([[0, 0.0477, 0], [0.2138, 0, 0.2243], [0, 0.0467, 0]]),
    np.array([[0, 0, 0], [0.2503, 0, 0.2616], [0, 0, 0]]),
    np.array([[0, 0, 0], [0.2598, 0, 0.2552], [0, 0, 0]]),
    np.array([[0, 0, 0], [0.2215, 0, 0.0717], [0, 0, 0]]),
)
NLPD_LEVELS = 6
NLPD_MIN_BAND = 4


def nlpd_levels(shape: tuple[int, int], requested: int = NLPD_LEVELS) -> int:
    """Largest level count <= ``requested`` whose coarsest band keeps >= 4 pixels per side."""
    short = min(shape)
    levels = 1
    while levels < requested and short / 2**levels >= NLPD_MIN_BAND:
        levels += 1
    return levels


def _lowpass_valid(img: np.ndarray) -> np.ndarray:
    # LAPLACIAN_FILTER is separable and symmetric: two 1-D passes, valid region only
    out = correlate1d(img, _LPF_1D, axis=0, mode="constant")[2:-2]
    return correlate1d(out, _LPF_1D, axis=1, mode="constant")[:, 2:-2]


def _blur_down(img: np.ndarray) -> np.ndarray:
    return _lowpass_valid(np.pad(img, 2, mode="symmetric"))[::2, ::2]


def _blur_up(img: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    # zero-insertion upsampling of the edge-extended image, then crop to ``shape``
    h, w = img.shape
    odd_h, odd_w = 2 * h - shape[0], 2 * w - shape[1]
    padded = np.pad(img, 1, mode="edge")
    up = np.zeros((2 * (h + 2), 2 * (w + 2)))
    up[::2, ::2] = 4.0 * padded
    up = _lowpass_valid(np.pad(up, 2))
    return up[2 : up.shape[0] - 2 - odd_h, 2 : up.shape[1] - 2 - odd_w]


def _normalize(band: np.ndarray, level: int, top: bool) -> np.ndarray:
    idx = len(NLPD_SIGMAS) - 1 if top else level
    local = convolve2d(np.abs(band), NLPD_DN_FILTERS[idx], mode="same")
    return band / (NLPD_SIGMAS[idx] + local)


def nlp_transform(img: np.ndarray, levels: int = NLPD_LEVELS) -> list[np.ndarray]:
    """Divisively normalized Laplacian pyramid of a luma image in [0, 255]."""
    current = to_luma(img) / PEAK
    bands = []
    for level in range(levels - 1):
        low = _blur_down(current)
        band = current - _blur_up(low, current.shape)
        bands.append(_normalize(band, level, top=False))
        current = low
    bands.append(_normalize(current, levels - 1, top=True))
    return bands


def nlpd(x, y, levels: int = NLPD_LEVELS) -> float:
    """Normalized Laplacian pyramid distance: mean over bands of the RMS band difference.

    Frames too small for ``levels`` bands use the largest feasible count and emit a
    ``RuntimeWarning`` naming it.
    """
    x, y = _check_pair(x, y)
    usable = nlpd_levels(x.shape, levels)
    if usable < levels:
        warnings.warn(f"NLPD: {x.shape} frame supports only {usable} pyramid levels", RuntimeWarning, stacklevel=2)
    bx = nlp_transform(x, usable)
    by = nlp_transform(y, usable)
    return float(np.mean([math.sqrt(np.mean((a - b) ** 2)) for a, b in zip(bx, by)]))


# Sphere-domain PSNR ---------------------------------------------------------


def ws_weights(height: int) -> np.ndarray:
    """cos(latitude) of each row center of an equirectangular grid."""
    lat = np.pi / 2 - (np.arange(height) + 0.5) / height * np.pi
    return np.cos(lat)


def ws_psnr(ref, dist) -> float:
    """PSNR with per-row cos(latitude) weights on the equirectangular grid."""
    x, y = _check_pair(ref, dist)
    w = ws_weights(x.shape[0])[:, None]
    err = (x - y) ** 2
    wmse = float(np.sum(w * err) / (np.sum(w) * x.shape[1]))
    return _psnr_from_mse(wmse)


def fibonacci_sphere(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Longitude/latitude of ``n`` near-uniform points (Fibonacci lattice)."""
    i = np.arange(n)
    lat = np.arcsin(1.0 - (2.0 * i + 1.0) / n)
    golden = np.pi * (3.0 - math.sqrt(5.0))
    lon = np.mod(i * golden, 2.0 * np.pi) - np.pi
    return lon, lat


def s_psnr(ref, dist, n_samples: int = 2**15) -> float:
    """PSNR over bilinear samples at uniformly spread sphere points."""
    if n_samples < 100:
        raise ValueError("S-PSNR needs at least 100 sample points")
    x, y = _check_pair(ref, dist)
    lon, lat = fibonacci_sphere(n_samples)
    u, v = sphere_to_pixel(lon, lat, x.shape[1], x.shape[0])
    diff = sample_bilinear(x, u, v) - sample_bilinear(y, u, v)
    return _psnr_from_mse(float(np.mean(diff**2)))


METRICS = {
    "psnr": MetricDescriptor("psnr", HIGHER, (0.0, PSNR_CAP), psnr),
    "ssim": MetricDescriptor("ssim", HIGHER, (-1.0, 1.0), ssim),
    "nlpd": MetricDescriptor("nlpd", LOWER, (0.0, math.inf), nlpd),
    "ws-psnr": MetricDescriptor("ws-psnr", HIGHER, (0.0, PSNR_CAP), ws_psnr),
    "s-psnr": MetricDescriptor("s-psnr", HIGHER, (0.0, PSNR_CAP), s_psnr),
}


def get_metric(name: str) -> MetricDescriptor:
    try:
        return METRICS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown metric {name!r}; choose from {sorted(METRICS)}") from None


def external_metric(name: str = "external", polarity: str = HIGHER) -> MetricDescriptor:
    """Descriptor for scores computed outside this package (e.g. DISTS, VIF)."""
    return MetricDescriptor(name, polarity)


def _pixels(frame):
    return getattr(frame, "pixels", frame)


def score_frame_pairs(pairs, metric: MetricDescriptor, rate: float | None = None, workers: int | None = None):
    """Score an iterable of ``(ref_frame, dist_frame)`` pairs, in order."""

    def one(pair):
        return metric(_pixels(pair[0]), _pixels(pair[1]))

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(one, pairs))
    else:
        scores = [one(p) for p in pairs]
    return FrameScoreSeries(np.array(scores), metric, rate)


def score_frames(refs, dists, metric: MetricDescriptor, workers: int | None = None) -> FrameScoreSeries:
    """Apply ``metric`` frame by frame to two aligned sequences.

    Threads may be used (``workers > 1``); the output order always follows the frames.
    """
    if len(refs) != len(dists):
        raise ValueError(f"sequences differ in length: {len(refs)} vs {len(dists)}")
    for k, (a, b) in enumerate(zip(refs, dists)):
        if np.shape(_pixels(a)) != np.shape(_pixels(b)):
            raise ValueError(f"frame {k} differs in size between sequences")
    return score_frame_pairs(zip(refs, dists), metric, getattr(refs, "rate", None), workers)


def load_frame_scores(path, metric: MetricDescriptor, rate: float | None = None) -> FrameScoreSeries:
    """Read a ``frame_index,score`` CSV with contiguous indices 0..N-1."""
    path = Path(path)
    by_index: dict[int, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["frame_index", "score"]:
            raise FrameScoreFormatError(f"{path}, row 1: expected header frame_index,score")
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise FrameScoreFormatError(f"{path}, row {row_no}: expected 2 fields")
            try:
                idx = int(row[0])
                value = float(row[1])
            except ValueError:
                raise FrameScoreFormatError(f"{path}, row {row_no}: cannot parse {row!r}") from None
            if not math.isfinite(value):
                raise FrameScoreFormatError(f"{path}, row {row_no}: non-finite score")
            if idx in by_index:
                raise FrameScoreFormatError(f"{path}, row {row_no}: duplicate frame index {idx}")
            by_index[idx] = value
    if not by_index:
        raise FrameScoreFormatError(f"{path}: no scores")
    missing = sorted(set(range(len(by_index))) - set(by_index))
    if missing:
        raise FrameScoreFormatError(f"{path}: frame indices not contiguous from 0, first missing {missing[0]}")
    return FrameScoreSeries(np.array([by_index[k] for k in range(len(by_index))]), metric, rate)


def save_frame_scores(series: FrameScoreSeries | Sequence[float], dest) -> None:
    scores = series.scores if isinstance(series, FrameScoreSeries) else series
    with open(dest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["frame_index", "score"])
        for k, s in enumerate(scores):
            writer.writerow([k, repr(float(s))])
