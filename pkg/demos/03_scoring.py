"""Scoring a distorted panorama
============================

The full pipeline: downsample, turn both panoramas into viewport videos for
every viewer, score each frame pair with a 2D metric, pool over time and
average over viewers. A small panorama keeps the run short.
"""

# %%
import dataclasses

import numpy as np

from omniqa import ConversionConfig, RunConfig, SphericalPoint, score_pair

rng = np.random.default_rng(0)
H, W = 256, 512
v, u = np.mgrid[0:H, 0:W]
ref = 127 + 70 * np.sin(u / 9.0) * np.cos(v / 13.0) + 20 * np.sin(u / 2.5)
ref = np.clip(ref, 0, 255)

# %% [markdown]
# Two distortions: noise over the whole sphere, and the same noise confined to
# the front hemisphere. A viewer starting at longitude 0 sweeps +-90 degrees and
# never turns around, so both images look the same through the headset.

# %%
noise = rng.normal(0, 12, ref.shape)
everywhere = np.clip(ref + noise, 0, 255)
front_only = ref.copy()
front_only[:, W // 4: 3 * W // 4] = everywhere[:, W // 4: 3 * W // 4]

# %% [markdown]
# One starting point (looking at longitude 0), a coarse frame rate and
# 128-pixel viewports.

# %%
config = RunConfig(conversion=ConversionConfig(stride=4, viewport_side=128), starting_points=(SphericalPoint(),))
for metric in ("psnr", "ssim", "nlpd", "ws-psnr"):
    cfg = dataclasses.replace(config, metric=metric)
    a = score_pair(ref, everywhere, cfg).score.value
    b = score_pair(ref, front_only, cfg).score.value
    print(f"{metric:>8}: noise everywhere {a:8.4f}   front hemisphere only {b:8.4f}")

# %% [markdown]
# Viewport metrics only see what the viewer sees, so the two distortions score
# alike. WS-PSNR works on the whole panorama and rewards the second image for
# its untouched back half.
