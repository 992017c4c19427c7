import numpy as np
import pytest


def gradient_panorama(h=512, w=1024):
    v, u = np.mgrid[0:h, 0:w]
    return 0.5 * 255.0 * u / w + 0.5 * 255.0 * v / h


def textured_panorama(h=128, w=256, seed=0):
    rng = np.random.default_rng(seed)
    v, u = np.mgrid[0:h, 0:w]
    base = 127 + 60 * np.sin(2 * np.pi * 3 * u / w) * np.cos(v / 9.0) + 25 * np.sin(u / 3.0 + v / 5.0)
    return np.clip(base + rng.normal(0, 5, base.shape), 0, 255)


@pytest.fixture
def gradient():
    return gradient_panorama()


@pytest.fixture
def texture():
    return textured_panorama()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in RESULTS:
        tag = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        terminalreporter.write_line(f"[{tag}] {name}: {detail}")
