import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photomap.errors import DegenerateInput, SizeMismatch
from photomap.flightsim import make_texture
from photomap.mosaic import compose
from photomap.preprocess import Frame
from photomap.registration import (
    FmiConfig,
    SimilarityTransform,
    apply_hann,
    apply_similarity,
    fft_magnitude_centered,
    highpass,
    log_polar,
    phase_correlate,
    register,
    wrap_angle,
)

DEG = math.pi / 180


def shifted(a, u, v):
    """b(p) = a(p + (u, v)), circularly."""
    return np.roll(a, (-v, -u), axis=(0, 1))


def polar_raster(n, fn):
    c = n // 2
    yy, xx = np.mgrid[0:n, 0:n].astype(float)
    return fn(np.hypot(xx - c, yy - c), np.arctan2(yy - c, xx - c))


def ring(r, phi):
    # point-symmetric in phi, like any magnitude spectrum
    return np.exp(-((r - 50) / 25) ** 2) * (2 + np.cos(2 * phi) + 0.5 * np.sin(4 * phi))


class TestHann:
    def test_border_zero(self, frame):
        out = apply_hann(frame)
        assert np.all(out.data[:, 0] == 0) and np.all(out.data[0, :] == 0)
        assert isinstance(out, Frame)

    def test_symmetric_centre(self):
        out = apply_hann(np.ones((256, 256)))
        assert out[127, 127] == pytest.approx(out[128, 128], abs=1e-15)

    def test_outer_product(self):
        n = 64
        w = [0.5 * (1 - math.cos(2 * math.pi * i / (n - 1))) for i in range(n)]
        expected = np.array([[wi * wj for wj in w] for wi in w])
        np.testing.assert_allclose(apply_hann(np.ones((n, n))), expected, atol=1e-15)


class TestSpectrum:
    def test_constant(self):
        m = fft_magnitude_centered(np.full((64, 64), 0.3))
        assert m[32, 32] == pytest.approx(0.3 * 64 * 64)
        m[32, 32] = 0
        assert np.abs(m).max() < 1e-9

    def test_shift_invariant(self, texture):
        m1 = fft_magnitude_centered(texture)
        m2 = fft_magnitude_centered(np.roll(texture, (7, -19), axis=(0, 1)))
        np.testing.assert_allclose(m2, m1, rtol=1e-6, atol=1e-9 * m1.max())

    def test_impulse(self):
        img = np.zeros((8, 8))
        img[3, 5] = 1.0
        np.testing.assert_allclose(fft_magnitude_centered(img), np.ones((8, 8)), atol=1e-12)


class TestHighpass:
    def test_values(self):
        n = 64
        out = highpass(np.ones((n, n)))
        assert out[n // 2, n // 2] == 0.0
        assert out[0, 0] == pytest.approx(2.0)
        assert out[n // 2, 0] == pytest.approx(2.0)
        assert out[0, n // 2] == pytest.approx(2.0)

    def test_is_pointwise_scaling(self, rng):
        m = rng.random((32, 32))
        np.testing.assert_allclose(highpass(m), m * highpass(np.ones((32, 32))))


class TestLogPolar:
    cfg = FmiConfig()

    def test_rotation_shifts_theta_rows(self):
        n, k = 256, 12
        delta = k * math.pi / n
        base = log_polar(polar_raster(n, ring), self.cfg)
        rot = log_polar(polar_raster(n, lambda r, p: ring(r, p - delta)), self.cfg)
        np.testing.assert_allclose(rot, np.roll(base, k, axis=0), atol=0.02 * base.max())

    def test_scaling_shifts_rho_columns(self):
        n, k = 256, 20
        s = self.cfg.log_base(n) ** k
        base = log_polar(polar_raster(n, ring), self.cfg)
        scaled = log_polar(polar_raster(n, lambda r, p: ring(s * r, p)), self.cfg)
        np.testing.assert_allclose(scaled[:, : n - k], base[:, k:], atol=0.02 * base.max())

    def test_constant(self):
        out = log_polar(np.full((128, 128), 0.7), self.cfg)
        assert out.shape == (128, 128)
        np.testing.assert_allclose(out, 0.7, atol=1e-12)

    def test_custom_sampling_counts(self):
        out = log_polar(np.ones((128, 128)), FmiConfig(n_theta=90, n_rho=64))
        assert out.shape == (90, 64)


class TestPhaseCorrelate:
    def test_self(self, texture):
        dx, dy, peak = phase_correlate(texture, texture)
        assert dx == pytest.approx(0.0, abs=1e-9) and dy == pytest.approx(0.0, abs=1e-9)
        assert peak == pytest.approx(1.0)

    def test_integer_shift(self, texture):
        b = np.roll(texture, (-5, 10), axis=(0, 1))
        dx, dy, peak = phase_correlate(texture, b)
        assert (dx, dy) == (10.0, -5.0)
        assert peak == pytest.approx(1.0)

    def test_half_pixel_shift(self, texture):
        n = texture.shape[0]
        kx = np.fft.fftfreq(n)[None, :]
        b = np.real(np.fft.ifft2(np.fft.fft2(texture) * np.exp(-2j * np.pi * kx * 3.5)))
        dx, dy, _ = phase_correlate(texture, b)
        assert 3.25 <= dx <= 3.75
        assert abs(dy) < 0.25

    def test_constant_is_degenerate(self, texture):
        with pytest.raises(DegenerateInput):
            phase_correlate(texture, np.zeros_like(texture))

    def test_size_mismatch(self):
        with pytest.raises(SizeMismatch):
            phase_correlate(np.eye(4), np.eye(8))

    @pytest.mark.parametrize("sigma", [0.1, 0.2])
    def test_weighted_tracks_fractional_shift(self, texture, sigma):
        n = texture.shape[0]
        kx = np.fft.fftfreq(n)[None, :]
        for frac in (0.1, 0.3, 0.5):
            b = np.real(np.fft.ifft2(np.fft.fft2(texture) * np.exp(-2j * np.pi * kx * (4 + frac))))
            dx, _, _ = phase_correlate(texture, b, sigma)
            assert dx == pytest.approx(4 + frac, abs=0.05)

    def test_white_noise_peak_low(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            _, _, peak = phase_correlate(rng.random((256, 256)), rng.random((256, 256)))
            assert peak < 0.2


class TestApplySimilarity:
    @pytest.fixture
    def smooth(self):
        return Frame(make_texture(256, 4, slope=2.0, fine=0.0))

    def test_identity_exact(self, frame):
        out = apply_similarity(frame, SimilarityTransform())
        assert np.array_equal(out.data, frame.data)
        c = SimilarityTransform(1.0, 0.0, 0.0, 0.0)
        assert np.array_equal(apply_similarity(frame.data, c), frame.data)

    def test_half_turn_twice(self, smooth):
        half = SimilarityTransform(1.0, math.pi)
        twice = apply_similarity(apply_similarity(smooth, half), half)
        assert np.sqrt(np.mean((twice.data - smooth.data) ** 2)) <= 0.02

    def test_scale_round_trip(self, smooth):
        frame = smooth
        n = frame.size
        out = apply_similarity(apply_similarity(frame, SimilarityTransform(2.0)), SimilarityTransform(0.5))
        q = slice(n // 4, 3 * n // 4)
        assert np.sqrt(np.mean((out.data[q, q] - frame.data[q, q]) ** 2)) < 0.02

    def test_maps_points_as_documented(self):
        n = 64
        img = np.zeros((n, n))
        img[20, 40] = 1.0  # centred (8.5, -11.5)
        t = SimilarityTransform(1.0, math.pi / 2, 3.0, -2.0)
        out = apply_similarity(img, t)
        # out(p) = in(t(p)): find p with t(p) = (8.5, -11.5)
        px, py = t.inverse().apply(8.5, -11.5)
        c = (n - 1) / 2
        assert out[int(round(py + c)), int(round(px + c))] == pytest.approx(1.0)


class TestRegister:
    def test_identity(self, frame):
        r = register(frame, frame)
        t = r.transform
        assert t.scale == pytest.approx(1.0, abs=0.01)
        assert abs(t.rotation) <= 0.01
        assert abs(t.tx) <= 0.5 and abs(t.ty) <= 0.5
        assert r.confidence >= 0.9

    def test_rotation_30(self, frame):
        b = apply_similarity(frame, SimilarityTransform(1.0, 0.5236))
        t = register(frame, b).transform
        assert t.rotation == pytest.approx(0.5236, abs=0.0175)
        assert t.scale == pytest.approx(1.0, abs=0.02)

    def test_scale_1_2(self, frame):
        b = apply_similarity(frame, SimilarityTransform(1.2))
        t = register(frame, b).transform
        assert t.scale == pytest.approx(1.2, abs=0.024)
        assert abs(t.rotation) <= 0.0175

    def test_degenerate(self, frame):
        with pytest.raises(DegenerateInput):
            register(frame, np.zeros((256, 256)))

    def test_size_mismatch(self, frame):
        with pytest.raises(SizeMismatch):
            register(frame, make_texture(128, 1))

    def test_plain_correlation_still_works(self, frame):
        b = apply_similarity(frame, SimilarityTransform(1.1, 0.3, 4.0, -7.0))
        t = register(frame, b, FmiConfig(spectral_sigma=None)).transform
        assert t.rotation == pytest.approx(0.3, abs=0.0175)
        assert t.scale == pytest.approx(1.1, rel=0.02)
        assert t.tx == pytest.approx(4.0, abs=1.0)
        assert t.ty == pytest.approx(-7.0, abs=1.0)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_self_registration(seed):
    f = make_texture(256, seed)
    r = register(f, f)
    assert abs(r.transform.scale - 1) <= 0.01 and abs(r.transform.rotation) <= 0.01
    assert abs(r.transform.tx) <= 0.5 and abs(r.transform.ty) <= 0.5


@settings(max_examples=10, deadline=None)
@given(st.integers(-40, 40), st.integers(-40, 40), st.integers(0, 100))
def test_translation_equivariance(u, v, seed):
    a = make_texture(256, seed)
    t = register(a, shifted(a, u, v)).transform
    assert t.tx == pytest.approx(u, abs=0.5)
    assert t.ty == pytest.approx(v, abs=0.5)
    assert abs(t.rotation) <= 0.01
    assert t.scale == pytest.approx(1.0, rel=0.01)


@settings(max_examples=10, deadline=None)
@given(st.floats(-0.6, 0.6), st.floats(0.9, 1.1), st.floats(-15, 15), st.floats(-15, 15), st.integers(0, 100))
def test_inverse_symmetry(rot, scale, tx, ty, seed):
    a = make_texture(256, seed)
    b = apply_similarity(a, SimilarityTransform(scale, rot, tx, ty))
    r = compose(register(a, b).transform, register(b, a).transform)
    assert r.scale == pytest.approx(1.0, abs=0.03)
    assert abs(r.rotation) <= 0.02
    assert math.hypot(r.tx, r.ty) <= 1.5


@pytest.mark.parametrize("deg", [170, 175, 178, 180, -170, -175, -179])
def test_pi_ambiguity(frame, deg):
    b = apply_similarity(frame, SimilarityTransform(1.0, deg * DEG))
    t = register(frame, b).transform
    assert abs(wrap_angle(t.rotation - deg * DEG)) <= 0.0175


def test_confidence_monotone_under_noise(frame):
    rng = np.random.default_rng(5)
    b = apply_similarity(frame, SimilarityTransform(1.05, 0.2, 6, -3)).data
    noise = rng.standard_normal(b.shape)
    conf = [register(frame, np.clip(b + s * noise, 0, 1)).confidence for s in (0.0, 0.05, 0.1)]
    assert conf[1] <= conf[0] + 0.02
    assert conf[2] <= conf[1] + 0.02


def test_config_validation():
    with pytest.raises(ValueError):
        FmiConfig(n_theta=32)
    with pytest.raises(ValueError):
        FmiConfig(confidence_floor=1.0)
    with pytest.raises(ValueError):
        FmiConfig(rho_min=200).resolved(256)


def test_wrap_angle():
    assert wrap_angle(math.pi) == math.pi
    assert wrap_angle(-math.pi) == math.pi
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    assert SimilarityTransform(rotation=-math.pi).rotation == math.pi
