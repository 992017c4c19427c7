import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omniqa.sphere import (
    SphericalPoint,
    check_equirect,
    default_viewport_side,
    downsample,
    extract_viewport,
    normalize_lon,
    pixel_to_sphere,
    sample_bilinear,
    sphere_to_pixel,
    to_luma,
)

from oracles import gnomonic_viewport


class TestSphericalPoint:
    def test_wraps_longitude(self):
        assert SphericalPoint(3 * math.pi / 2, 0).lon == pytest.approx(-math.pi / 2)
        assert SphericalPoint(-math.pi, 0).lon == math.pi

    def test_clamps_latitude(self):
        assert SphericalPoint(0, 2.0).lat == math.pi / 2
        assert SphericalPoint(0, -2.0).lat == -math.pi / 2

    def test_in_range_longitude_untouched(self):
        assert SphericalPoint(0.1, 0).lon == 0.1

    def test_addition(self):
        p = SphericalPoint(math.pi * 0.75, 1.0) + SphericalPoint(math.pi / 2, 1.0)
        assert p.lon == pytest.approx(-math.pi * 0.75)
        assert p.lat == math.pi / 2

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            SphericalPoint(float("nan"), 0)

    @given(st.floats(-100, 100))
    def test_normalize_range(self, lon):
        out = normalize_lon(lon)
        assert -math.pi < out <= math.pi
        assert math.isclose(math.cos(out), math.cos(lon), abs_tol=1e-9)


class TestPixelSphere:
    def test_center_pixel_example(self):
        p = pixel_to_sphere(2, 1, 4, 2)
        assert p.lon == pytest.approx(math.pi / 4, abs=1e-15)
        assert p.lat == pytest.approx(-math.pi / 4, abs=1e-15)

    def test_corner_pixel_example(self):
        p = pixel_to_sphere(0, 0, 4, 2)
        assert p.lon == pytest.approx(-3 * math.pi / 4, abs=1e-15)
        assert p.lat == pytest.approx(math.pi / 4, abs=1e-15)

    def test_origin_maps_to_grid_middle(self):
        assert sphere_to_pixel(0.0, 0.0, 4, 2) == pytest.approx((1.5, 0.5), abs=1e-15)

    def test_north_pole_above_first_row(self):
        _, v = sphere_to_pixel(0.0, math.pi / 2, 4, 2)
        assert v == pytest.approx(-0.5, abs=1e-15)

    def test_seam_sides(self):
        eps = 1e-6
        u_left, _ = sphere_to_pixel(-math.pi + eps, 0.0, 8, 4)
        u_right, _ = sphere_to_pixel(math.pi - eps, 0.0, 8, 4)
        assert u_left == pytest.approx(-0.5, abs=1e-4)
        assert u_right == pytest.approx(7.5, abs=1e-4)
        img = np.arange(32, dtype=float).reshape(4, 8)
        # both sides of the seam blend the same two columns
        assert sample_bilinear(img, u_left, 1.0) == pytest.approx(sample_bilinear(img, u_right, 1.0), abs=1e-3)

    def test_out_of_range_index(self):
        with pytest.raises(ValueError):
            pixel_to_sphere(4, 0, 4, 2)
        with pytest.raises(ValueError):
            pixel_to_sphere(0, -1, 4, 2)

    @pytest.mark.parametrize("w,h", [(4, 2), (64, 32), (1920, 960), (7, 5)])
    def test_round_trip_all_indices(self, w, h):
        v, u = np.mgrid[0:h, 0:w]
        lon, lat = pixel_to_sphere(u, v, w, h)
        uu, vv = sphere_to_pixel(lon, lat, w, h)
        assert np.max(np.abs(uu - u)) <= 1e-12 * max(w, 1)
        assert np.max(np.abs(vv - v)) <= 1e-12 * max(h, 1)
        assert np.array_equal(np.rint(uu).astype(int), u)
        assert np.array_equal(np.rint(vv).astype(int), v)


class TestBilinear:
    def test_constant(self):
        img = np.full((5, 10), 42.0)
        rng = np.random.default_rng(0)
        vals = sample_bilinear(img, rng.uniform(-20, 20, 100), rng.uniform(-3, 8, 100))
        assert np.allclose(vals, 42.0, atol=1e-12)

    def test_pixel_center(self):
        img = np.arange(20, dtype=float).reshape(4, 5)
        assert sample_bilinear(img, 3.0, 2.0) == img[2, 3]

    def test_wrap_blend(self):
        img = np.array([[10.0, 20.0, 30.0, 40.0]])
        # pixel centers sit at integer coordinates: 3.9 is 90% of the way from 40 to 10
        assert sample_bilinear(img, 3.9, 0.0) == pytest.approx(0.1 * 40 + 0.9 * 10, abs=1e-12)
        assert sample_bilinear(img, 3.4, 0.0) == pytest.approx(0.6 * 40 + 0.4 * 10, abs=1e-12)
        assert sample_bilinear(img, -0.5, 0.0) == pytest.approx(25.0, abs=1e-12)

    def test_rows_clamp(self):
        img = np.array([[1.0, 1.0], [5.0, 5.0]])
        assert sample_bilinear(img, 0.0, -3.0) == 1.0
        assert sample_bilinear(img, 0.0, 9.0) == 5.0

    def test_rgb(self):
        img = np.stack([np.full((3, 6), c) for c in (10.0, 20.0, 30.0)], axis=-1)
        assert np.allclose(sample_bilinear(img, 2.3, 1.7), [10, 20, 30])

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            sample_bilinear(np.zeros((2, 4)), float("nan"), 0.0)


class TestViewport:
    def test_constant_panorama(self):
        img = np.full((64, 128), 77.0)
        frame = extract_viewport(img, SphericalPoint(1.0, 0.4), math.radians(70), 40)
        assert frame.pixels.shape == (40, 40)
        assert np.allclose(frame.pixels, 77.0, atol=1e-12)

    def test_tangent_point_matches_equirect(self, texture):
        h, w = texture.shape
        side = 16
        # viewport pixel pitch at the tangent point equals the equirect pitch 2*pi/W
        fov = 2 * math.atan(side * math.pi / w)
        frame = extract_viewport(texture, SphericalPoint(0.0, 0.0), fov, side).pixels
        c = side // 2
        ours = frame[c - 2:c + 2, c - 2:c + 2]
        ref = texture[h // 2 - 2:h // 2 + 2, w // 2 - 2:w // 2 + 2]
        assert np.max(np.abs(ours - ref)) < 0.05

    def test_default_side(self):
        assert default_viewport_side(960, math.pi / 3) == 320
        frame = extract_viewport(np.zeros((96, 192)), SphericalPoint(), math.pi / 3)
        assert frame.side == 32

    @pytest.mark.parametrize("fov", [0.0, math.pi, 4.0])
    def test_bad_fov(self, fov):
        with pytest.raises(ValueError):
            extract_viewport(np.zeros((8, 16)), SphericalPoint(), fov, 8)

    def test_bad_side(self):
        with pytest.raises(ValueError):
            extract_viewport(np.zeros((8, 16)), SphericalPoint(), 1.0, 1)

    def test_matches_oracle_sample(self, gradient):
        rng = np.random.default_rng(7)
        for _ in range(5):
            lon, lat = rng.uniform(-math.pi, math.pi), rng.uniform(-1.5, 1.5)
            fov, side = math.radians(rng.uniform(20, 120)), int(rng.integers(32, 64))
            ours = extract_viewport(gradient, SphericalPoint(lon, lat), fov, side).pixels
            ref = gnomonic_viewport(gradient, lon, lat, fov, side)
            assert np.max(np.abs(ours - ref)) <= 1e-9

    def test_pole_viewport_finite(self, gradient):
        frame = extract_viewport(gradient, SphericalPoint(0.3, math.pi / 2), math.radians(90), 33).pixels
        assert np.all(np.isfinite(frame))
        # looking straight up: every pixel lies in the northern cap
        assert frame.max() <= 0.5 * 255 + 0.5 * 255 * 0.3

    def test_longitudinal_equivariance(self, texture):
        h, w = texture.shape
        k = 37
        rolled = np.roll(texture, -k, axis=1)
        for lat in (0.0, 0.4, -1.1):
            a = extract_viewport(rolled, SphericalPoint(0.5, lat), math.radians(60), 48).pixels
            b = extract_viewport(texture, SphericalPoint(0.5 + k * 2 * math.pi / w, lat), math.radians(60), 48).pixels
            assert np.max(np.abs(a - b)) <= 1e-9

    def test_deterministic(self, texture):
        c = SphericalPoint(-2.0, 0.3)
        a = extract_viewport(texture, c, 1.0, 50).pixels
        b = extract_viewport(texture, c, 1.0, 50).pixels
        assert np.array_equal(a, b)

    def test_rgb_matches_luma_per_channel(self, texture):
        rgb = np.stack([texture, 255 - texture, texture / 2], axis=-1)
        c = SphericalPoint(1.0, -0.2)
        frame = extract_viewport(rgb, c, 1.2, 40).pixels
        assert frame.shape == (40, 40, 3)
        assert np.allclose(frame[..., 1], extract_viewport(255 - texture, c, 1.2, 40).pixels, atol=1e-9)


class TestDownsample:
    def test_large_panorama(self):
        img = np.zeros((3840, 7680), dtype=np.float32)
        assert downsample(img).shape == (960, 1920)

    def test_within_range_unchanged(self):
        img = np.random.default_rng(0).uniform(0, 255, (512, 1024))
        assert downsample(img) is not None
        assert np.array_equal(downsample(img), img)

    def test_odd_size_cropped(self):
        img = np.random.default_rng(0).uniform(0, 255, (1025, 2050))
        out = downsample(img)
        assert out.shape == (512, 1025)
        assert out[0, 0] == pytest.approx(img[:2, :2].mean())

    def test_mean_preserved(self):
        img = np.random.default_rng(1).uniform(0, 255, (2048, 4096))
        out = downsample(img)
        assert out.shape == (1024, 2048)
        assert abs(out.mean() - img.mean()) <= 1e-9

    def test_rgb(self):
        img = np.random.default_rng(2).uniform(0, 255, (1100, 2200, 3))
        assert downsample(img).shape == (550, 1100, 3)


class TestValidation:
    def test_aspect_warning(self):
        with pytest.warns(UserWarning):
            check_equirect(np.zeros((10, 10)))

    def test_good_aspect_silent(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            check_equirect(np.zeros((10, 20)))

    @pytest.mark.parametrize("bad", [np.full((4, 8), 300.0), np.full((4, 8), -1.0), np.full((4, 8), np.nan)])
    def test_value_range(self, bad):
        with pytest.raises(ValueError):
            check_equirect(bad)

    def test_luma(self):
        rgb = np.zeros((1, 1, 3))
        rgb[0, 0] = (100, 50, 200)
        assert to_luma(rgb)[0, 0] == pytest.approx(0.299 * 100 + 0.587 * 50 + 0.114 * 200)


@settings(max_examples=25, deadline=None)
@given(
    lon=st.floats(-math.pi, math.pi),
    lat=st.floats(-1.5, 1.5),
    fov_deg=st.floats(20, 120),
)
def test_viewport_pure_and_bounded(lon, lat, fov_deg):
    img = np.random.default_rng(3).uniform(0, 255, (32, 64))
    c = SphericalPoint(lon, lat)
    a = extract_viewport(img, c, math.radians(fov_deg), 16).pixels
    assert np.array_equal(a, extract_viewport(img, c, math.radians(fov_deg), 16).pixels)
    assert img.min() - 1e-9 <= a.min() and a.max() <= img.max() + 1e-9
