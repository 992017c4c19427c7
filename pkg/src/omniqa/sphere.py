"""Equirectangular <-> sphere geometry, bilinear sampling and viewport extraction.

Conventions
-----------
Longitude is east-positive in (-pi, pi], latitude is north-positive in
[-pi/2, pi/2]. Pixel ``(u, v)`` (column, row) of a ``W x H`` equirectangular
image has its *center* at::

    lon = ((u + 0.5) / W) * 2*pi - pi
    lat = pi/2 - ((v + 0.5) / H) * pi

Continuous pixel coordinates used by :func:`sphere_to_pixel` and
:func:`sample_bilinear` put the center of pixel ``k`` at ``k``.

World frame: ``+z`` looks at (lon=0, lat=0), ``+x`` east, ``+y`` north.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SphericalPoint",
    "ViewportFrame",
    "normalize_lon",
    "check_equirect",
    "pixel_to_sphere",
    "sphere_to_pixel",
    "sample_bilinear",
    "viewport_rays",
    "extract_viewport",
    "default_viewport_side",
    "downsample",
    "to_luma",
]

MAX_SHORT_SIDE = 1024
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def normalize_lon(lon):
    """Wrap longitude(s) into (-pi, pi]. Values already in range are returned untouched."""
    lon = np.asarray(lon, dtype=np.float64)
    inside = (lon > -np.pi) & (lon <= np.pi)
    wrapped = np.pi - np.mod(np.pi - lon, 2.0 * np.pi)
    out = np.where(inside, lon, wrapped)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SphericalPoint:
    """A direction on the unit sphere; ``lon`` is wrapped and ``lat`` clamped on construction."""

    lon: float = 0.0
    lat: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.lon) and math.isfinite(self.lat)):
            raise ValueError(f"non-finite spherical coordinate ({self.lon}, {self.lat})")
        object.__setattr__(self, "lon", normalize_lon(float(self.lon)))
        object.__setattr__(self, "lat", min(max(float(self.lat), -np.pi / 2), np.pi / 2))

    @classmethod
    def from_degrees(cls, lon_deg: float, lat_deg: float) -> "SphericalPoint":
        return cls(math.radians(lon_deg), math.radians(lat_deg))

    def __add__(self, other: "SphericalPoint") -> "SphericalPoint":
        # component-wise: longitude wraps, latitude clamps
        return SphericalPoint(self.lon + other.lon, self.lat + other.lat)


@dataclass(frozen=True)
class ViewportFrame:
    pixels: np.ndarray
    center: SphericalPoint
    fov: float

    @property
    def side(self) -> int:
        return self.pixels.shape[0]


def check_equirect(img: np.ndarray) -> np.ndarray:
    """Validate an equirectangular panorama and return it as float64.

    Accepts ``(H, W)`` luma or ``(H, W, 3)`` RGB arrays with finite values in
    [0, 255]. A width that is not twice the height only triggers a warning.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim not in (2, 3) or (img.ndim == 3 and img.shape[2] not in (1, 3)):
        raise ValueError(f"expected (H, W) or (H, W, 3) array, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("empty image")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite values")
    if img.min() < 0 or img.max() > 255:
        raise ValueError("pixel values must lie in [0, 255]")
    h, w = img.shape[:2]
    if w != 2 * h:
        warnings.warn(f"equirectangular image is {w}x{h}; expected width = 2 x height", stacklevel=2)
    return img


def to_luma(img: np.ndarray) -> np.ndarray:
    """BT.601 luma of an RGB array; 2-D input is returned as float64 unchanged."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return img
    if img.shape[2] == 1:
        return img[..., 0]
    return img[..., :3] @ LUMA_WEIGHTS


def pixel_to_sphere(u, v, width: int, height: int):
    """Longitude/latitude of pixel center(s) ``(u, v)``.

    Scalar integer input returns a :class:`SphericalPoint`; array input returns
    ``(lon, lat)`` arrays.
    """
    u_arr = np.asarray(u)
    v_arr = np.asarray(v)
    if np.any(u_arr < 0) or np.any(u_arr >= width) or np.any(v_arr < 0) or np.any(v_arr >= height):
        raise ValueError(f"pixel index out of range for a {width}x{height} grid")
    lon = ((u_arr + 0.5) / width) * 2.0 * np.pi - np.pi
    lat = np.pi / 2 - ((v_arr + 0.5) / height) * np.pi
    if lon.ndim == 0 and lat.ndim == 0:
        return SphericalPoint(float(lon), float(lat))
    return lon, lat


def sphere_to_pixel(lon, lat, width: int, height: int):
    """Continuous pixel coordinates of a direction; inverse of :func:`pixel_to_sphere`.

    ``u`` is not wrapped here; sampling interprets it modulo ``width``.
    """
    if isinstance(lon, SphericalPoint):
        lon, lat = lon.lon, lon.lat
    u = (np.asarray(lon, dtype=np.float64) + np.pi) / (2.0 * np.pi) * width - 0.5
    v = (np.pi / 2 - np.asarray(lat, dtype=np.float64)) / np.pi * height - 0.5
    if u.ndim == 0:
        return float(u), float(v)
    return u, v


def sample_bilinear(img: np.ndarray, u, v):
    """Bilinear lookup at continuous pixel coordinates.

    Columns wrap around (the longitude seam), rows clamp to the first/last row.
    Works on ``(H, W)`` and ``(H, W, C)`` arrays; ``u`` and ``v`` broadcast.
    """
    img = np.asarray(img)
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if np.isnan(u).any() or np.isnan(v).any():
        raise ValueError("NaN sampling coordinate")
    h, w = img.shape[:2]
    v = np.clip(v, 0.0, h - 1)
    u0 = np.floor(u)
    v0 = np.floor(v)
    fu = u - u0
    fv = v - v0
    c0 = np.mod(u0, w).astype(np.intp)
    c1 = np.mod(c0 + 1, w)
    r0 = v0.astype(np.intp)
    r1 = np.minimum(r0 + 1, h - 1)
    if img.ndim == 3:
        fu = fu[..., None]
        fv = fv[..., None]
    top = img[r0, c0] * (1.0 - fu) + img[r0, c1] * fu
    bottom = img[r1, c0] * (1.0 - fu) + img[r1, c1] * fu
    return top * (1.0 - fv) + bottom * fv


def viewport_rays(fov: float, side: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unnormalized camera-frame rays through the pixel centers of a square viewport.

    The image plane is ``z = 1``; row 0 is the top (``+y``), column 0 the left (``-x``).
    """
    half = math.tan(fov / 2.0)
    ticks = half * ((2.0 * np.arange(side) + 1.0) / side - 1.0)
    x, y = np.meshgrid(ticks, -ticks)
    return x, y, np.ones_like(x)


@lru_cache(maxsize=32)
def _pitched_directions(fov: float, side: int, lat: float) -> tuple[np.ndarray, np.ndarray]:
    # longitude (relative to the viewing direction) and latitude of every viewport ray
    x, y, z = viewport_rays(fov, side)
    cl, sl = math.cos(lat), math.sin(lat)
    y1 = y * cl + z * sl
    z1 = -y * sl + z * cl
    lon_rel = np.arctan2(x, z1)
    lat_abs = np.arctan2(y1, np.hypot(x, z1))
    lon_rel.setflags(write=False)
    lat_abs.setflags(write=False)
    return lon_rel, lat_abs


def extract_viewport(
    img: np.ndarray,
    center: SphericalPoint,
    fov: float = np.pi / 3,
    side: int | None = None,
) -> ViewportFrame:
    """Render the rectilinear (gnomonic) viewport of ``img`` looking at ``center``.

    The camera is pitched by ``center.lat`` and then yawed by ``center.lon``, so the
    viewport's up direction follows the local meridian (no roll). ``side`` defaults to
    ``round(H * fov / pi)``.

    Yaw about the polar axis is a pure longitude offset, so it is applied after the
    ray directions are converted to spherical coordinates. The pitched directions are
    cached per ``(fov, side, lat)``; equatorial scanpaths therefore reuse one grid.
    """
    if not 0 < fov < np.pi:
        raise ValueError(f"field of view must be in (0, pi), got {fov}")
    h, w = img.shape[:2]
    if side is None:
        side = default_viewport_side(h, fov)
    if side < 2:
        raise ValueError(f"viewport side must be >= 2, got {side}")
    lon_rel, lat = _pitched_directions(float(fov), int(side), float(center.lat))
    u, v = sphere_to_pixel(lon_rel + center.lon, lat, w, h)
    return ViewportFrame(sample_bilinear(img, u, v), center, fov)


def default_viewport_side(height: int, fov: float) -> int:
    return int(round(height * fov / np.pi))


def downsample(img: np.ndarray) -> np.ndarray:
    """Box-filter a panorama so that its shorter side is at most 1024 pixels.

    Uses the smallest integer factor ``f`` that satisfies the bound; rows/columns that
    do not divide by ``f`` are cropped from the bottom/right first. Images whose
    shorter side is already <= 1024 are returned as-is.
    """
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    short = min(h, w)
    if short <= MAX_SHORT_SIDE:
        return img
    f = -(-short // MAX_SHORT_SIDE)
    hh, ww = (h // f) * f, (w // f) * f
    cropped = img[:hh, :ww]
    blocks = cropped.reshape(hh // f, f, ww // f, f, *img.shape[2:])
    return blocks.mean(axis=(1, 3))
