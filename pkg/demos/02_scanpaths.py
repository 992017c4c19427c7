"""Scanpaths and viewing conditions
================================

Quality is judged while the viewer moves. A viewing condition fixes where the
exploration starts and how long it lasts; a scanpath describes where the gaze
goes relative to that start.
"""

# %%
import math

import numpy as np

from omniqa import (
    DEFAULT_STARTING_POINTS,
    brownian_latitude_variant,
    default_scanpath,
    rotation_scanpath,
)

# %% [markdown]
# The default path sweeps a quarter turn to the left, half a turn to the right
# and back, at 24 degrees per second for 15 seconds. Sampled at 20 Hz that gives
# 300 samples.

# %%
path = default_scanpath()
print(len(path), "samples")
for t in (0.0, 3.75, 7.5, 11.25, 14.95):
    k = int(round(t * 20))
    print(f"t = {path.t[k]:5.2f} s  longitude offset {math.degrees(path.lon[k]):7.1f} deg")

# %% [markdown]
# Ablation variants: a full equatorial turn, and the default sweep with a random
# walk on latitude (seeded, so reruns match).

# %%
turn = rotation_scanpath(15.0, 20)
print("rotation at 7.5 s:", math.degrees(turn.lon[150]), "deg")

wobbly = brownian_latitude_variant(path, sigma=math.radians(1), seed=0)
print("latitude range of the random walk: "
      f"{math.degrees(wobbly.lat.min()):.1f} .. {math.degrees(wobbly.lat.max()):.1f} deg")

# %% [markdown]
# Each starting point turns the same offsets into different absolute directions.

# %%
for start in DEFAULT_STARTING_POINTS:
    centers = path.centers(start)
    lons = np.degrees([c.lon for c in centers])
    print(f"start {math.degrees(start.lon):6.1f} deg: first {lons[0]:6.1f}, at 3.75 s {lons[75]:6.1f}")
