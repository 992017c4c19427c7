"""Viewports from an equirectangular panorama
===========================================

A 360 degree image stored in equirectangular form is not what a headset wearer
sees. The visible part is a viewport: a gnomonic projection of the sphere onto a
plane tangent at the viewing direction. This script builds a synthetic panorama,
extracts a few viewports and saves them next to the script.
"""

# %%
import math
from pathlib import Path

import numpy as np
from PIL import Image

from omniqa import SphericalPoint, extract_viewport, pixel_to_sphere, sphere_to_pixel

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)

# %% [markdown]
# A checkerboard in longitude/latitude makes distortion easy to spot: meridians
# converge towards the poles in the panorama but look straight in a viewport.

# %%
H, W = 512, 1024
v, u = np.mgrid[0:H, 0:W]
lon, lat = pixel_to_sphere(u, v, W, H)
checker = ((np.floor(lon / math.radians(15)) + np.floor(lat / math.radians(15))) % 2) * 200 + 30
Image.fromarray(checker.astype(np.uint8)).save(out / "panorama.png")

# %% [markdown]
# Pixel centers map to spherical coordinates and back without loss.

# %%
corner = pixel_to_sphere(0, 0, W, H)
print("pixel (0, 0) center:", corner)
print("back to pixel space:", sphere_to_pixel(corner.lon, corner.lat, W, H))

# %% [markdown]
# Viewports at the front, looking sideways, and straight up. The default field
# of view is 60 degrees.

# %%
for name, center in {
    "front": SphericalPoint(0.0, 0.0),
    "east": SphericalPoint.from_degrees(90, 20),
    "zenith": SphericalPoint.from_degrees(0, 90),
}.items():
    frame = extract_viewport(checker, center, fov=math.pi / 3, side=256)
    Image.fromarray(np.rint(frame.pixels).astype(np.uint8)).save(out / f"viewport_{name}.png")
    print(f"{name:>6}: center {center}, mean value {frame.pixels.mean():.1f}")

print(f"images written to {out}")
