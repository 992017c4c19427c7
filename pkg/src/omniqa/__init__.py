"""Full-reference quality assessment of omnidirectional images via viewport videos."""

from .evaluation import evaluate_predictions, f_test, fit_logistic, load_manifest, plcc, run_benchmark, srcc
from .img2video import ConversionConfig, FrameSequence, convert, convert_pair, load_panorama, sampling_rate
from .metrics import METRICS, MetricDescriptor, FrameScoreSeries, nlpd, psnr, s_psnr, score_frames, ssim, ws_psnr
from .pipeline import RunConfig, score_pair
from .pooling import PoolingConfig, QualityScore, aggregate_viewers, pool, pool_values
from .scanpath import (
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
from .sphere import SphericalPoint, downsample, extract_viewport, pixel_to_sphere, sample_bilinear, sphere_to_pixel

__version__ = "0.1.0"
