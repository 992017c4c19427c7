"""Acceptance suite: one PASS/FAIL line per criterion, printed in the pytest summary.

Run on its own with ``pytest tests/test_acceptance.py -v``.
"""

import math
import os
import time

import numpy as np
import pytest
from PIL import Image

from omniqa.cli import main
from omniqa.evaluation import A_BETTER, evaluate_predictions, f_test, fit_logistic, logistic, srcc
from omniqa.img2video import ConversionConfig, convert, sampling_rate
from omniqa.metrics import PSNR_CAP, nlpd, psnr, s_psnr, ssim, ws_psnr
from omniqa.pipeline import RunConfig
from omniqa.pooling import hysteresis
from omniqa.scanpath import ViewingCondition, default_longitude, default_scanpath
from omniqa.sphere import SphericalPoint, extract_viewport

from conftest import gradient_panorama, textured_panorama
from oracles import gnomonic_viewport, hysteresis_literal, ssim_direct

RESULTS = []  # (criterion, passed, detail); printed by conftest.pytest_terminal_summary


def report(name, passed, detail):
    RESULTS.append((name, bool(passed), detail))
    assert passed, f"{name}: {detail}"


def test_geometry_oracle():
    img = gradient_panorama(512, 1024)
    rng = np.random.default_rng(2024)
    worst, ours_time = 0.0, 0.0
    start = time.perf_counter()
    for _ in range(100):
        lon, lat = rng.uniform(-math.pi, math.pi), rng.uniform(-math.pi / 2, math.pi / 2)
        fov = math.radians(rng.uniform(20, 120))
        side = int(rng.integers(32, 321))
        t0 = time.perf_counter()
        ours = extract_viewport(img, SphericalPoint(lon, lat), fov, side).pixels
        ours_time += time.perf_counter() - t0
        worst = max(worst, float(np.max(np.abs(ours - gnomonic_viewport(img, lon, lat, fov, side)))))
    total = time.perf_counter() - start
    report("geometry oracle (100 configs, tol 1e-9, < 60 s)", worst <= 1e-9 and total < 60,
           f"max |diff| = {worst:.2e}; total {total:.1f} s (extraction alone {ours_time:.2f} s)")


def test_default_pipeline_shape():
    cfg = RunConfig()
    img = gradient_panorama(960, 1920)
    path = default_scanpath(cfg.exploration_time, cfg.gaze, sampling_rate(cfg.conversion))
    seq = convert(img, ViewingCondition(SphericalPoint(), cfg.exploration_time), path, cfg.conversion)
    T = cfg.exploration_time
    phis = [default_longitude(t, T, cfg.gaze.velocity) for t in (0, T / 4, 3 * T / 4, T)]
    err = max(abs(a - b) for a, b in zip(phis, (0, -math.pi / 2, math.pi / 2, 0)))
    report("default pipeline shape (300 frames; phi at 0, T/4, 3T/4, T within 1e-12)",
           len(seq) == 300 and err <= 1e-12, f"{len(seq)} frames of {seq.side}x{seq.side}; max phi error {err:.1e}")


def test_hysteresis_equivalence():
    rng = np.random.default_rng(11)
    worst, bounded = 0.0, True
    for _ in range(1000):
        q = rng.uniform(0, 100, 300)
        ours = hysteresis(q, 20, 0.8)
        worst = max(worst, abs(ours - hysteresis_literal(q, 20, 0.8)))
        bounded &= q.min() <= ours <= q.max()
    const_err = max(abs(hysteresis(np.full(300, c), 20, 0.8) - c) for c in rng.uniform(-100, 100, 50))
    report("hysteresis equivalence (1000 series x 300, tol 1e-9; constants 1e-12; bounded)",
           worst <= 1e-9 and const_err <= 1e-12 and bounded,
           f"max |diff| = {worst:.2e}; constant error {const_err:.1e}; bounded on all trials: {bounded}")


def test_metric_identities():
    pano = textured_panorama(128, 256, 0)
    frame = pano[32:96, 64:128]
    ident = {
        "psnr": abs(psnr(frame, frame) - PSNR_CAP),
        "ws-psnr": abs(ws_psnr(pano, pano) - PSNR_CAP),
        "s-psnr": abs(s_psnr(pano, pano) - PSNR_CAP),
        "ssim": abs(ssim(frame, frame) - 1.0),
        "nlpd": abs(nlpd(pano, pano)),
    }
    d = pano + 9.0
    p, w, s = psnr(pano, d), ws_psnr(pano, d), s_psnr(pano, d)
    spread = max(p, w, s) - min(p, w, s)
    ok = max(ident.values()) <= 1e-9 and spread <= 1e-6
    report("metric identities (cap / 1 / 0 within 1e-9; uniform PSNR = WS-PSNR = S-PSNR within 1e-6)", ok,
           f"worst identity error {max(ident.values()):.1e}; uniform spread {spread:.1e} dB")


def test_ssim_oracle():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(10):
        x = rng.uniform(0, 255, (64, 64))
        y = np.clip(x + rng.normal(0, rng.uniform(2, 40), x.shape), 0, 255)
        worst = max(worst, abs(ssim(x, y) - ssim_direct(x, y)))
    report("SSIM oracle (ten 64x64 pairs, tol 1e-9)", worst <= 1e-9, f"max |diff| = {worst:.2e}")


def test_statistics():
    rng = np.random.default_rng(8)
    mos = rng.normal(size=100)
    srcc_exact = srcc(np.exp(mos), mos) == 1.0 and srcc(mos**3, mos) == 1.0
    tie = srcc([1, 2, 2, 3], [1, 2, 3, 4])
    q = np.linspace(0, 60, 50)
    target = logistic(q, 5, 1, 30, 5)
    fit_rms = float(np.sqrt(np.mean((fit_logistic(q, target)(q) - target) ** 2)))
    a = np.random.default_rng(0).normal(0, 1, 200)
    b = np.random.default_rng(1).normal(0, 3, 200)
    verdict = f_test(a, b).verdict
    ok = srcc_exact and abs(tie - 0.9487) <= 1e-4 and fit_rms <= 1e-6 and verdict == A_BETTER
    report("statistics (SRCC monotone = 1; ties 0.9487; logistic RMS <= 1e-6; F-test)", ok,
           f"SRCC exact: {srcc_exact}; tie SRCC {tie:.6f}; fit RMS {fit_rms:.1e}; F-test verdict {verdict}")


def test_determinism(tmp_path, capsys):
    ref = textured_panorama(64, 128, 0)
    paths = []
    for k, sigma in enumerate((0, 6, 12, 20, 30)):
        img = np.clip(ref + np.random.default_rng(k).normal(0, sigma, ref.shape), 0, 255)
        paths.append(tmp_path / f"d{k}.png")
        Image.fromarray(np.rint(img).astype(np.uint8)).save(paths[-1])
    manifest = tmp_path / "m.csv"
    manifest.write_text("ref_path,dist_path,mos\n" + "".join(f"d0.png,{p.name},{5 - k}\n" for k, p in enumerate(paths)))
    fast = ["--rate-stride", "4", "--scanpath-model", "brownian", "--seed", "3"]
    runs = []
    for k in range(2):
        main(["score", str(paths[0]), str(paths[3]), *fast, "--out", str(tmp_path / f"s{k}")])
        main(["evaluate", str(manifest), *fast, "--out", str(tmp_path / f"e{k}")])
        files = [tmp_path / f"s{k}" / "viewers.csv", tmp_path / f"e{k}" / "report.csv",
                 tmp_path / f"e{k}" / "predictions.csv", *sorted((tmp_path / f"s{k}").glob("frames_*.csv"))]
        runs.append((capsys.readouterr().out, [f.read_bytes() for f in files]))
    report("determinism (score and evaluate bit-identical across runs)", runs[0] == runs[1],
           f"{len(runs[0][1])} output files and stdout compared byte for byte")


@pytest.mark.skipif(not os.environ.get("OMNIQA_OIQA_MANIFEST"), reason="set OMNIQA_OIQA_MANIFEST to run")
def test_dataset_reproduction():
    from omniqa.evaluation import run_benchmark

    rep = run_benchmark(os.environ["OMNIQA_OIQA_MANIFEST"], RunConfig(), per_type=False)
    value = rep.overall.srcc
    report("dataset reproduction (OIQA, O-PSNR SRCC within 0.03 of 0.780)",
           value is not None and abs(value - 0.780) <= 0.03, f"SRCC {value}; {len(rep.failures)} failed records")


def test_dataset_reproduction_status():
    # records the optional criterion as skipped when no manifest is configured
    if os.environ.get("OMNIQA_OIQA_MANIFEST"):
        pytest.skip("dataset check runs in test_dataset_reproduction")
    RESULTS.append(("dataset reproduction (optional)", None, "SKIPPED: OMNIQA_OIQA_MANIFEST not set"))
