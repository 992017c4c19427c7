"""Command-line interface: ``omniqa {convert,score,pool,evaluate,compare}``.

Exit codes: 0 success, 1 degenerate computation, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .evaluation import f_test, run_benchmark
from .img2video import ConversionConfig, convert, load_panorama, save_sequence
from .metrics import HIGHER, LOWER, external_metric, get_metric, load_frame_scores, save_frame_scores
from .pipeline import RunConfig, score_pair, viewer_scanpaths
from .pooling import PoolingConfig, aggregate_viewers, pool
from .scanpath import GazeModelConfig, ViewingCondition, load_scanpath
from .sphere import SphericalPoint, check_equirect, downsample

EXIT_OK, EXIT_DEGENERATE, EXIT_INPUT = 0, 1, 2

POOLING_NAMES = {
    "hysteresis": "hysteresis",
    "mean": "arithmetic_mean",
    "harmonic": "harmonic_mean",
    "gaussian": "gaussian_ascending",
    "minkowski": "minkowski",
    "percentile": "percentile",
}
DEFAULT_STARTS = "-90,0;0,0;90,0;180,0"


class InputError(Exception):
    pass


def parse_starting_points(text: str) -> tuple[SphericalPoint, ...]:
    """``"lon,lat;lon,lat"`` in degrees."""
    points = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            lon, lat = (float(v) for v in chunk.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad starting point {chunk!r}; expected lon,lat in degrees") from None
        points.append(SphericalPoint.from_degrees(lon, lat))
    if not points:
        raise argparse.ArgumentTypeError("no starting points given")
    return tuple(points)


def _add_pooling_flags(p):
    g = p.add_argument_group("temporal pooling")
    g.add_argument("--pooling", choices=sorted(POOLING_NAMES), default="hysteresis", help="temporal pooling strategy")
    g.add_argument("--hysteresis-k", type=int, default=20, help="memory duration K in frames")
    g.add_argument("--alpha", type=float, default=0.8, help="memory/current trade-off")
    g.add_argument("--minkowski-p", type=float, default=2.0, help="Minkowski exponent")
    g.add_argument("--percentile-q", type=float, default=0.10, help="fraction of worst frames for percentile pooling")
    g.add_argument("--strict-memory", action="store_true",
                   help="take the hysteresis memory minimum over past memory values instead of past scores")


def _add_pipeline_flags(p):
    g = p.add_argument_group("viewing conditions and conversion")
    g.add_argument("--fov-deg", type=float, default=60.0, help="viewport field of view")
    g.add_argument("--viewport-side", type=int, default=None,
                   help="viewport size in pixels (default: round(H * fov / 180deg))")
    g.add_argument("--rate-stride", type=int, default=1, help="stride s1 on the tracker rate")
    g.add_argument("--native-rate", type=float, default=20.0, help="tracker sampling rate in Hz")
    g.add_argument("--exploration-time", type=float, default=15.0, help="seconds")
    g.add_argument("--gaze-speed-deg", type=float, default=24.0, help="degrees per second")
    g.add_argument("--starting-points", type=parse_starting_points, default=DEFAULT_STARTS,
                   help="'lon,lat;...' in degrees")
    g.add_argument("--scanpath", action="append", default=[], metavar="CSV",
                   help="recorded scanpath (t_sec,lon_rad,lat_rad); repeat for several viewers")
    g.add_argument("--scanpath-model", choices=["default", "rotation", "brownian"], default="default",
                   help="generated scanpath when no --scanpath is given")
    g.add_argument("--brownian-sigma-deg", type=float, default=1.0, help="latitude step deviation per sample")
    g.add_argument("--seed", type=int, default=0, help="seed for random scanpath variants")


def _add_metric_flags(p):
    p.add_argument("--metric", choices=["psnr", "ssim", "nlpd", "ws-psnr", "s-psnr", "external"], default="psnr",
                   help="frame-level full-reference metric")
    p.add_argument("--scores", action="append", default=[], metavar="CSV",
                   help="frame_index,score file per viewer (with --metric external)")
    p.add_argument("--metric-name", default="external", help="label for external scores")
    p.add_argument("--polarity", choices=[HIGHER, LOWER], default=HIGHER, help="polarity of external scores")


def pooling_config(args) -> PoolingConfig:
    return PoolingConfig(POOLING_NAMES[args.pooling], args.hysteresis_k, args.alpha,
                         args.minkowski_p, args.percentile_q, args.strict_memory)


def run_config(args) -> RunConfig:
    try:
        scanpaths = tuple(load_scanpath(p) for p in args.scanpath)
    except OSError as exc:
        raise InputError(f"cannot read scanpath: {exc}") from exc
    return RunConfig(
        conversion=ConversionConfig(args.rate_stride, args.native_rate, math.radians(args.fov_deg), args.viewport_side),
        pooling=pooling_config(args) if hasattr(args, "pooling") else PoolingConfig(),
        gaze=GazeModelConfig(math.radians(args.gaze_speed_deg), args.native_rate),
        starting_points=args.starting_points,
        exploration_time=args.exploration_time,
        metric=args.metric,
        seed=args.seed,
        scanpath_model=args.scanpath_model,
        brownian_sigma=math.radians(args.brownian_sigma_deg),
        scanpaths=scanpaths,
    )


def _read_image(path):
    if not Path(path).is_file():
        raise InputError(f"cannot read {path}: no such file")
    try:
        return load_panorama(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _polarity_text(higher: bool) -> str:
    return "higher is better" if higher else "lower is better"


# commands -------------------------------------------------------------------


def cmd_convert(args) -> int:
    config = run_config(args)
    img = downsample(check_equirect(_read_image(args.panorama)))
    out = Path(args.out)
    for path in viewer_scanpaths(config):
        for i, start in enumerate(config.starting_points):
            seq = convert(img, ViewingCondition(start, config.exploration_time), path, config.conversion)
            name = f"start_{i:02d}" if len(config.scanpaths) <= 1 else f"{path.label}_start_{i:02d}"
            save_sequence(seq, out / name)
            print(f"{name}: {len(seq)} frames of {seq.side}x{seq.side}")
    return EXIT_OK


def _external_viewers(args):
    if not args.scores:
        raise InputError("--metric external requires at least one --scores file")
    metric = external_metric(args.metric_name, args.polarity)
    cfg = pooling_config(args)
    series = [load_frame_scores(p, metric) for p in args.scores]
    return metric, series, [pool(s, cfg) for s in series], [Path(p).stem for p in args.scores]


def cmd_score(args) -> int:
    if args.metric == "external":
        metric, series, viewers, labels = _external_viewers(args)
        total = aggregate_viewers(viewers)
    else:
        if args.ref is None or args.dist is None:
            raise InputError("score needs REF and DIST panoramas")
        ref, dist = _read_image(args.ref), _read_image(args.dist)
        if ref.shape[:2] != dist.shape[:2]:
            raise InputError(f"size mismatch: {args.ref} is {ref.shape[:2]}, {args.dist} is {dist.shape[:2]}")
        result = score_pair(ref, dist, run_config(args))
        metric, series, viewers, labels = get_metric(args.metric), result.series, result.viewers, result.labels
        total = result.score
    print(f"{metric.name}: {total.value!r} ({_polarity_text(metric.higher_is_better)}; "
          f"{total.viewer_count} viewer{'s' if total.viewer_count != 1 else ''})")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "viewers.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["viewer", "score"])
            for label, v in zip(labels, viewers):
                w.writerow([label, repr(v.value)])
        for k, s in enumerate(series):
            save_frame_scores(s, out / f"frames_{k:02d}.csv")
    return EXIT_OK


def cmd_pool(args) -> int:
    metric = external_metric(args.metric_name, args.polarity)
    series = load_frame_scores(args.scores_csv, metric)
    print(repr(pool(series, pooling_config(args)).value))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = run_config(args)
    if args.metric == "external":
        raise InputError("evaluate computes scores itself; --metric external is not supported here")
    if not Path(args.manifest).is_file():
        raise InputError(f"cannot read {args.manifest}: no such file")
    report = run_benchmark(args.manifest, config, per_type=args.per_type)
    print(report.to_table())
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
        with open(out / "predictions.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["ref_path", "dist_path", "prediction", "mos", "residual"])
            residuals = report.residuals if report.residuals is not None else [math.nan] * len(report.records)
            for rec, p, r in zip(report.records, report.predictions, residuals):
                w.writerow([rec.ref_path, rec.dist_path, repr(float(p)), repr(rec.mos), repr(float(r))])
    if not report.records:
        return EXIT_INPUT
    return EXIT_DEGENERATE if report.degenerate else EXIT_OK


def read_residuals(path) -> np.ndarray:
    """Residuals from a CSV: the ``residual`` column if present, else the last column."""
    if not Path(path).is_file():
        raise InputError(f"cannot read {path}: no such file")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InputError(f"{path}: empty file")
        col = header.index("residual") if "residual" in header else len(header) - 1
        values = []
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                v = float(row[col])
            except (ValueError, IndexError):
                raise InputError(f"{path}, row {row_no}: cannot parse residual") from None
            if not math.isfinite(v):
                raise InputError(f"{path}, row {row_no}: non-finite residual")
            values.append(v)
    return np.array(values)


def cmd_compare(args) -> int:
    a, b = read_residuals(args.residuals_a), read_residuals(args.residuals_b)
    res = f_test(a, b, args.confidence)
    print(f"{res.verdict} F={res.F!r} p={res.p_value!r}")
    return EXIT_OK


# parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="omniqa", description=__doc__.splitlines()[0], formatter_class=fmt)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="render viewport sequences from a panorama", formatter_class=fmt)
    p.add_argument("panorama")
    p.add_argument("--out", default="frames", help="output directory")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_convert, metric="psnr")

    p = sub.add_parser("score", help="predict the quality of a distorted panorama", formatter_class=fmt)
    p.add_argument("ref", nargs="?")
    p.add_argument("dist", nargs="?")
    p.add_argument("--out", default=None, help="directory for per-viewer and per-frame CSV dumps")
    _add_metric_flags(p)
    _add_pipeline_flags(p)
    _add_pooling_flags(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("pool", help="pool a frame-score CSV", formatter_class=fmt)
    p.add_argument("scores_csv")
    p.add_argument("--metric-name", default="external", help="label of the scored metric")
    p.add_argument("--polarity", choices=[HIGHER, LOWER], default=HIGHER, help="which direction of score is better")
    _add_pooling_flags(p)
    p.set_defaults(func=cmd_pool)

    p = sub.add_parser("evaluate", help="correlate predictions with MOS over a manifest", formatter_class=fmt)
    p.add_argument("manifest")
    p.add_argument("--per-type", action="store_true", help="add one row per distortion type")
    p.add_argument("--out", default=None, help="directory for report.csv and predictions.csv")
    _add_metric_flags(p)
    _add_pipeline_flags(p)
    _add_pooling_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="F-test on two models' prediction residuals", formatter_class=fmt)
    p.add_argument("residuals_a")
    p.add_argument("residuals_b")
    p.add_argument("--confidence", type=float, default=0.95, help="two-sided confidence level")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        # bad CSV rows, invalid parameters, mismatched inputs
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ArithmeticError as exc:
        print(f"degenerate: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
