"""Turn a static panorama into a moving-camera viewport sequence."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np
from PIL import Image

from .scanpath import Scanpath, ViewingCondition
from .sphere import SphericalPoint, ViewportFrame, default_viewport_side, extract_viewport

__all__ = [
    "ConversionConfig",
    "FrameSequence",
    "sampling_rate",
    "convert",
    "convert_pair",
    "iter_frames",
    "iter_frame_pairs",
    "load_panorama",
    "save_sequence",
]


@dataclass(frozen=True)
class ConversionConfig:
    """Viewport sampling settings.

    ``viewport_side`` of ``None`` means "auto": ``round(H * fov / pi)`` of the input.
    """

    stride: int = 1
    native_rate: float = 20.0
    fov: float = math.pi / 3
    viewport_side: int | None = None

    def __post_init__(self):
        if int(self.stride) != self.stride or self.stride < 1:
            raise ValueError(f"stride must be an integer >= 1, got {self.stride}")
        if not self.native_rate > 0:
            raise ValueError("native rate must be positive")
        if not 0 < self.fov < math.pi:
            raise ValueError("field of view must lie in (0, pi)")
        if self.viewport_side is not None and self.viewport_side < 2:
            raise ValueError("viewport side must be >= 2")

    def side_for(self, height: int) -> int:
        if self.viewport_side is not None:
            return int(self.viewport_side)
        return default_viewport_side(height, self.fov)


@dataclass
class FrameSequence:
    frames: list[ViewportFrame]
    rate: float
    condition: ViewingCondition
    scanpath_id: str = "scanpath"
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.frames)

    def __getitem__(self, k):
        return self.frames[k]

    @property
    def centers(self) -> list[SphericalPoint]:
        return [f.center for f in self.frames]

    @property
    def side(self) -> int:
        return self.frames[0].side

    @property
    def fov(self) -> float:
        return self.frames[0].fov


def sampling_rate(cfg: ConversionConfig) -> float:
    """Viewport sampling rate in Hz: the tracker rate divided by the stride."""
    return cfg.native_rate / cfg.stride


def iter_frames(
    img: np.ndarray, cond: ViewingCondition, path: Scanpath, cfg: ConversionConfig = ConversionConfig()
) -> Iterator[ViewportFrame]:
    """Yield viewports along ``path`` one at a time (nothing is retained)."""
    if len(path) == 0:
        raise ValueError("empty scanpath")
    side = cfg.side_for(img.shape[0])
    for center in path.centers(cond.starting_point):
        yield extract_viewport(img, center, cfg.fov, side)


def iter_frame_pairs(ref, dist, cond, path, cfg: ConversionConfig = ConversionConfig()):
    if ref.shape != dist.shape:
        raise ValueError(f"reference {ref.shape} and distorted {dist.shape} panoramas differ in size")
    return zip(iter_frames(ref, cond, path, cfg), iter_frames(dist, cond, path, cfg))


def convert(
    img: np.ndarray, cond: ViewingCondition, path: Scanpath, cfg: ConversionConfig = ConversionConfig()
) -> FrameSequence:
    """Extract one viewport per scanpath sample.

    ``path`` is expected to be sampled at :func:`sampling_rate` already (see
    :func:`omniqa.scanpath.resample`); one frame is produced per sample.
    """
    frames = list(iter_frames(img, cond, path, cfg))
    return FrameSequence(frames, sampling_rate(cfg), cond, path.label)


def convert_pair(ref, dist, cond, path, cfg: ConversionConfig = ConversionConfig()):
    """Aligned reference/distorted sequences sharing every viewport center."""
    if ref.shape != dist.shape:
        raise ValueError(f"reference {ref.shape} and distorted {dist.shape} panoramas differ in size")
    return convert(ref, cond, path, cfg), convert(dist, cond, path, cfg)


def load_panorama(path) -> np.ndarray:
    """Decode an 8-bit image into float64: ``(H, W)`` for grayscale, ``(H, W, 3)`` otherwise."""
    with Image.open(path) as im:
        if im.mode not in ("L", "RGB"):
            im = im.convert("L" if im.mode in ("1", "I", "I;16", "F") else "RGB")
        return np.asarray(im, dtype=np.float64)


def save_sequence(seq: FrameSequence, out_dir) -> Path:
    """Write ``frame_%04d.png`` files plus ``sequence.json`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for k, frame in enumerate(seq.frames):
        pixels = np.clip(np.rint(frame.pixels), 0, 255).astype(np.uint8)
        Image.fromarray(pixels).save(out / f"frame_{k:04d}.png")
    sp = seq.condition.starting_point
    record = {
        "rate": seq.rate,
        "fov": seq.fov,
        "side": seq.side,
        "frame_count": len(seq),
        "condition": {
            "starting_point": {"lon": sp.lon, "lat": sp.lat},
            "exploration_time": seq.condition.exploration_time,
        },
        "scanpath_id": seq.scanpath_id,
        "centers": [[c.lon, c.lat] for c in seq.centers],
        **seq.meta,
    }
    with open(out / "sequence.json", "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2)
    return out
