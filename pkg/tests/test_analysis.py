"""Tests for coherence and misalignment metrics."""

import numpy as np
import pytest
from scipy import signal

from decohere.analysis import (
    MISALIGNMENT_FLOOR_DB,
    MisalignmentTrace,
    band_average_coherence,
    band_summary,
    coherence,
    max_blocks,
    misalignment_db,
    rank_correlation,
    stereo_coherence,
)
from decohere.audio import AudioBuffer
from decohere.core.errors import ConfigurationError, InsufficientDataError


class TestCoherence:
    def test_identical_channels(self, rng):
        x = rng.standard_normal(8 * 1024)
        spec = coherence(x, x, fft_size=1024, n_blocks=8, sample_rate=16000)
        np.testing.assert_allclose(spec.gamma_sq[1:-1], 1.0, atol=1e-9)
        assert spec.n_blocks_averaged == 8

    def test_scaled_copy(self, rng):
        x = rng.standard_normal(8 * 1024)
        spec = coherence(x, -3.0 * x, fft_size=1024, n_blocks=8, sample_rate=16000)
        np.testing.assert_allclose(spec.gamma_sq[1:-1], 1.0, atol=1e-9)

    def test_short_fir_leaves_coherence_at_one(self, rng):
        x = rng.standard_normal(90000)
        y = signal.lfilter([1.0, 0.5, 0.25], [1.0], x)
        spec = coherence(x, y, fft_size=8192, n_blocks=20, sample_rate=16000)
        assert spec.n_blocks_averaged == 20
        assert np.max(np.abs(spec.gamma_sq - 1.0)) < 1e-6

    def test_independent_noise_is_incoherent(self, rng):
        n_blocks = 200
        x = rng.standard_normal(1024 + (n_blocks - 1) * 512)
        y = rng.standard_normal(len(x))
        spec = coherence(x, y, fft_size=1024, n_blocks=n_blocks, sample_rate=16000)
        assert np.mean(spec.gamma_sq) < 0.05
        assert np.all((spec.gamma_sq >= 0.0) & (spec.gamma_sq <= 1.0 + 1e-12))

    def test_insufficient_data(self, rng):
        x = rng.standard_normal(4000)
        with pytest.raises(InsufficientDataError, match="need"):
            coherence(x, x, fft_size=1024, n_blocks=8, sample_rate=16000)

    def test_too_few_blocks(self, rng):
        x = rng.standard_normal(4096)
        with pytest.raises(ConfigurationError, match="n_blocks"):
            coherence(x, x, fft_size=1024, n_blocks=1, sample_rate=16000)

    def test_length_mismatch(self, rng):
        with pytest.raises(ConfigurationError, match="lengths differ"):
            coherence(rng.standard_normal(4096), rng.standard_normal(4095), 1024, 2, 16000)

    def test_silent_bins_report_zero(self):
        spec = coherence(np.zeros(4096), np.zeros(4096), fft_size=1024, n_blocks=4, sample_rate=16000)
        np.testing.assert_array_equal(spec.gamma_sq, 0.0)

    def test_sample_rate_from_buffer(self, rng):
        x = AudioBuffer(rng.standard_normal(4096), 8000)
        spec = coherence(x, x, fft_size=1024, n_blocks=4)
        assert spec.sample_rate == 8000
        with pytest.raises(ConfigurationError, match="sample_rate"):
            coherence(x.channel(0), x.channel(0), fft_size=1024, n_blocks=4)

    def test_stereo_uses_all_blocks(self, white_stereo):
        spec = stereo_coherence(white_stereo, 1024)
        assert spec.n_blocks_averaged == max_blocks(white_stereo.n_frames, 1024)
        frame = spec.to_frame()
        assert list(frame.columns) == ["frequency_hz", "gamma_sq"]
        assert len(frame) == 513

    def test_max_blocks(self):
        assert max_blocks(1000, 1024) == 0
        assert max_blocks(1024, 1024) == 1
        assert max_blocks(4096, 1024) == 7


class TestBands:
    def test_band_average(self, white_stereo):
        spec = stereo_coherence(white_stereo, 1024)
        assert band_average_coherence(spec, 2000.0, 8000.0) == pytest.approx(1.0, abs=1e-6)

    def test_invalid_band(self, white_stereo):
        spec = stereo_coherence(white_stereo, 1024)
        with pytest.raises(ConfigurationError):
            band_average_coherence(spec, 3000.0, 2000.0)
        with pytest.raises(ConfigurationError):
            band_average_coherence(spec, 0.0, 9000.0)

    def test_summary_bands(self, white_stereo):
        summary = band_summary(stereo_coherence(white_stereo, 1024))
        assert set(summary) == {"0-1500", "1500-2000", "2000-nyquist"}


class TestMisalignment:
    def test_exact_match_hits_floor(self):
        h = np.array([1.0, 0.5, -0.25])
        assert misalignment_db(h, h) == MISALIGNMENT_FLOOR_DB

    def test_zero_estimate_is_zero_db(self):
        assert misalignment_db([1.0, 2.0], [0.0, 0.0]) == pytest.approx(0.0)

    def test_half_estimate(self):
        h = np.array([1.0, -1.0, 0.5])
        assert misalignment_db(h, 0.5 * h) == pytest.approx(10.0 * np.log10(0.25))

    def test_shorter_estimate_is_padded(self):
        assert misalignment_db([1.0, 1.0], [1.0]) == pytest.approx(10.0 * np.log10(0.5))

    def test_monotone_along_interpolation(self, rng):
        h = rng.standard_normal(64)
        etas = [misalignment_db(h, t * h) for t in np.linspace(0.0, 0.99, 20)]
        assert np.all(np.diff(etas) < 0.0)

    def test_zero_reference_rejected(self):
        with pytest.raises(ConfigurationError, match="zero energy"):
            misalignment_db([0.0, 0.0], [1.0, 0.0])

    def test_trace_frame(self):
        trace = MisalignmentTrace(np.array([-3.0, -10.0]), np.array([0.5, 1.0]), 512)
        assert trace.final_db == -10.0
        np.testing.assert_allclose(trace.inverse, [10 ** 0.3, 10.0])
        assert list(trace.to_frame().columns) == ["time_s", "eta_db", "inverse_eta"]


class TestRankCorrelation:
    def test_perfect_agreement(self):
        assert rank_correlation([0.1, 0.2, 0.5], [1.0, 4.0, 9.0]) == pytest.approx(1.0)

    def test_reversed(self):
        assert rank_correlation([0.1, 0.2, 0.5], [9.0, 4.0, 1.0]) == pytest.approx(-1.0)

    def test_single_point_is_nan(self):
        assert np.isnan(rank_correlation([0.1], [1.0]))
