"""Viewing conditions and head-movement scanpaths.

A scanpath stores gaze offsets relative to the starting point, so the first
sample is always ``(0, 0)`` at ``t = 0``. The absolute viewing direction at
sample ``k`` is ``starting_point + offset_k`` (see :meth:`SphericalPoint.__add__`).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .sphere import SphericalPoint, normalize_lon

__all__ = [
    "ViewingCondition",
    "GazeModelConfig",
    "Scanpath",
    "ScanpathFormatError",
    "frame_count",
    "default_longitude",
    "default_scanpath",
    "rotation_scanpath",
    "brownian_latitude_variant",
    "load_scanpath",
    "save_scanpath",
    "resample",
    "DEFAULT_STARTING_POINTS",
]

DEFAULT_GAZE_SPEED = math.radians(24.0)
DEFAULT_NATIVE_RATE = 20.0
DEFAULT_EXPLORATION_TIME = 15.0
DEFAULT_BROWNIAN_SIGMA = math.radians(1.0)
DEFAULT_STARTING_POINTS = (
    SphericalPoint(-np.pi / 2, 0.0),
    SphericalPoint(0.0, 0.0),
    SphericalPoint(np.pi / 2, 0.0),
    SphericalPoint(np.pi, 0.0),
)

SCANPATH_HEADER = ["t_sec", "lon_rad", "lat_rad"]


class ScanpathFormatError(ValueError):
    pass


@dataclass(frozen=True)
class ViewingCondition:
    starting_point: SphericalPoint = field(default_factory=SphericalPoint)
    exploration_time: float = DEFAULT_EXPLORATION_TIME

    def __post_init__(self):
        if not (math.isfinite(self.exploration_time) and self.exploration_time > 0):
            raise ValueError(f"exploration time must be finite and positive, got {self.exploration_time}")


@dataclass(frozen=True)
class GazeModelConfig:
    velocity: float = DEFAULT_GAZE_SPEED  # rad/s
    native_rate: float = DEFAULT_NATIVE_RATE  # Hz

    def __post_init__(self):
        if not self.velocity > 0:
            raise ValueError("gaze velocity must be positive")
        if not self.native_rate > 0:
            raise ValueError("native rate must be positive")


@dataclass(frozen=True, eq=False)
class Scanpath:
    """Time-stamped gaze offsets. ``t``, ``lon`` and ``lat`` are equal-length 1-D arrays."""

    t: np.ndarray
    lon: np.ndarray
    lat: np.ndarray
    label: str = "scanpath"

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64).copy()
        lon = normalize_lon(np.asarray(self.lon, dtype=np.float64).reshape(-1))
        lat = np.clip(np.asarray(self.lat, dtype=np.float64), -np.pi / 2, np.pi / 2)
        lon = np.atleast_1d(lon)
        if not (t.ndim == lon.ndim == lat.ndim == 1 and len(t) == len(lon) == len(lat)):
            raise ValueError("t, lon and lat must be 1-D arrays of equal length")
        if len(t) == 0:
            raise ValueError("scanpath must contain at least one sample")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(lon)) and np.all(np.isfinite(lat))):
            raise ValueError("scanpath contains non-finite values")
        if t[0] != 0.0 or lon[0] != 0.0 or lat[0] != 0.0:
            raise ValueError("scanpath must start at t=0 with offset (0, 0)")
        if np.any(np.diff(t) <= 0):
            raise ValueError("scanpath timestamps must be strictly increasing")
        for name, arr in (("t", t), ("lon", lon), ("lat", lat)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.t)

    def offset(self, k: int) -> SphericalPoint:
        return SphericalPoint(float(self.lon[k]), float(self.lat[k]))

    def centers(self, start: SphericalPoint) -> list[SphericalPoint]:
        """Absolute viewing directions ``start + P(t_k)`` for every sample."""
        return [start + self.offset(k) for k in range(len(self))]

    def __eq__(self, other):
        if not isinstance(other, Scanpath):
            return NotImplemented
        return (
            np.array_equal(self.t, other.t)
            and np.array_equal(self.lon, other.lon)
            and np.array_equal(self.lat, other.lat)
        )


def frame_count(rate: float, duration: float) -> int:
    """``floor(rate * duration)``, tolerant to representation error (20/3 Hz * 15 s -> 100)."""
    return int(math.floor(rate * duration + 1e-9))


def _sample_times(rate: float, duration: float) -> np.ndarray:
    if not (rate > 0 and duration > 0):
        raise ValueError("rate and duration must be positive")
    n = max(frame_count(rate, duration), 1)
    return np.arange(n) / rate


def default_longitude(t, duration: float = DEFAULT_EXPLORATION_TIME, velocity: float = DEFAULT_GAZE_SPEED):
    """Longitude offset of the default sweep: left a quarter turn, right a half turn, back.

    The three linear pieces are applied verbatim; if ``velocity * duration / 4`` is not
    ``pi/2`` the sweep simply does not reach +-90 degrees.
    """
    t = np.asarray(t, dtype=np.float64)
    q1, q3 = duration / 4.0, 3.0 * duration / 4.0
    lon = np.where(
        t <= q1,
        -velocity * t,
        np.where(t <= q3, -np.pi / 2 + velocity * (t - q1), np.pi / 2 - velocity * (t - q3)),
    )
    return float(lon) if lon.ndim == 0 else lon


def default_scanpath(
    duration: float = DEFAULT_EXPLORATION_TIME,
    gaze: GazeModelConfig = GazeModelConfig(),
    rate: float | None = None,
) -> Scanpath:
    rate = gaze.native_rate if rate is None else rate
    t = _sample_times(rate, duration)
    lon = default_longitude(t, duration, gaze.velocity)
    return Scanpath(t, lon, np.zeros_like(t), label="default")


def rotation_scanpath(duration: float = DEFAULT_EXPLORATION_TIME, rate: float = DEFAULT_NATIVE_RATE) -> Scanpath:
    """One full counterclockwise turn along the equator over ``duration`` seconds."""
    t = _sample_times(rate, duration)
    return Scanpath(t, 2.0 * np.pi * (t / duration), np.zeros_like(t), label="rotation")


def brownian_latitude_variant(base: Scanpath, sigma: float = DEFAULT_BROWNIAN_SIGMA, seed: int = 0) -> Scanpath:
    """Replace the latitude of ``base`` by a clamped Gaussian random walk starting at 0.

    ``sigma`` is the per-sample step deviation in radians. ``sigma == 0`` returns ``base``.
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return base
    steps = np.random.default_rng(seed).normal(0.0, sigma, size=len(base) - 1)
    lat = np.zeros(len(base))
    for k, step in enumerate(steps, start=1):
        lat[k] = min(max(lat[k - 1] + step, -np.pi / 2), np.pi / 2)
    return Scanpath(base.t, base.lon, lat, label=f"{base.label}+brownian")


def resample(path: Scanpath, rate: float, duration: float) -> Scanpath:
    """Linearly interpolate a scanpath onto ``t = k / rate``, ``k < floor(rate * duration)``.

    Longitude is interpolated along the shortest arc; queries past the last recorded
    sample hold the final offset.
    """
    t = _sample_times(rate, duration)
    lon = np.interp(t, path.t, np.unwrap(path.lon))
    lat = np.interp(t, path.t, path.lat)
    return Scanpath(t, lon, lat, label=path.label)


def load_scanpath(path) -> Scanpath:
    """Read a ``t_sec,lon_rad,lat_rad`` CSV and re-reference it to ``t = 0``, offset ``(0, 0)``."""
    path = Path(path)
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ScanpathFormatError(f"{path}: empty file")
        if [h.strip() for h in header] != SCANPATH_HEADER:
            raise ScanpathFormatError(f"{path}, line 1: expected header {','.join(SCANPATH_HEADER)}")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ScanpathFormatError(f"{path}, line {line_no}: expected 3 fields, got {len(row)}")
            try:
                values = [float(c) for c in row]
            except ValueError:
                raise ScanpathFormatError(f"{path}, line {line_no}: non-numeric field") from None
            if not all(math.isfinite(x) for x in values):
                raise ScanpathFormatError(f"{path}, line {line_no}: non-finite value")
            if rows and values[0] <= rows[-1][1][0]:
                raise ScanpathFormatError(f"{path}, line {line_no}: timestamps must be strictly increasing")
            rows.append((line_no, values))
    if not rows:
        raise ScanpathFormatError(f"{path}: no samples")
    data = np.array([v for _, v in rows])
    t = data[:, 0] - data[0, 0]
    lon = normalize_lon(data[:, 1] - data[0, 1])
    lat = np.clip(data[:, 2] - data[0, 2], -np.pi / 2, np.pi / 2)
    return Scanpath(t, np.atleast_1d(lon), lat, label=path.stem)


def save_scanpath(path: Scanpath, dest) -> None:
    with open(dest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCANPATH_HEADER)
        for t, lon, lat in zip(path.t, path.lon, path.lat):
            writer.writerow([repr(float(t)), repr(float(lon)), repr(float(lat))])
