"""Tests for per-channel decorrelation chains."""

import numpy as np
import pytest

from decohere.analysis import band_average_coherence, stereo_coherence
from decohere.audio import AudioBuffer, channel_seed
from decohere.core.errors import ConfigurationError
from decohere.dsp.chain import METHODS, DecorrelatorConfig, build_channel_chain, process_channels
from decohere.dsp.decorrelators import ScalConfig
from decohere.dsp.windows import WindowSpec


def _config(method, noise=False, seed=0):
    return DecorrelatorConfig(method=method, noise=noise, seed=seed, scal=ScalConfig(window=WindowSpec(512)))


class TestChannelSeed:
    def test_stable_and_distinct(self):
        assert channel_seed(0, 0) == channel_seed(0, 0)
        assert channel_seed(0, 0) != channel_seed(0, 1)
        assert channel_seed(0, 1) != channel_seed(1, 1)
        assert 0 <= channel_seed(123, 4) < 2 ** 32


class TestProcessChannels:
    def test_none_is_a_copy(self, white_stereo):
        out = process_channels(_config("none"), white_stereo)
        np.testing.assert_array_equal(out.samples, white_stereo.samples)
        assert out.samples is not white_stereo.samples

    @pytest.mark.parametrize("method", [m for m in METHODS if m != "none"])
    def test_channels_are_processed_independently(self, white_stereo, method):
        out = process_channels(_config(method), white_stereo)
        assert out.n_channels == 2
        assert out.n_frames == white_stereo.n_frames
        assert np.all(np.isfinite(out.samples))
        assert not np.array_equal(out.channel(0), out.channel(1))

    def test_scal_decorrelates_identical_channels(self, white_stereo):
        before = stereo_coherence(white_stereo, 1024)
        after = stereo_coherence(process_channels(_config("scal", noise=True), white_stereo), 1024)
        assert band_average_coherence(before, 2000.0, 8000.0) > 0.99
        assert band_average_coherence(after, 2000.0, 8000.0) < band_average_coherence(before, 2000.0, 8000.0) - 0.1

    def test_reproducible(self, white_stereo):
        cfg = _config("scal", noise=True, seed=7)
        np.testing.assert_array_equal(
            process_channels(cfg, white_stereo).samples,
            process_channels(cfg, white_stereo).samples,
        )

    def test_chain_matches_channel_index(self, white_stereo):
        cfg = _config("scal", seed=3)
        out = process_channels(cfg, white_stereo)
        right = build_channel_chain(cfg, 1, white_stereo.sample_rate).process(white_stereo.channel(1))
        np.testing.assert_array_equal(out.channel(1), right)

    def test_smoothed_abs_uses_opposite_signs(self, white_stereo):
        out = process_channels(_config("smoothed_abs"), white_stereo)
        x = white_stereo.channel(0)
        np.testing.assert_allclose(out.channel(0) + out.channel(1), 2.0 * x, atol=1e-12)

    def test_label(self):
        assert _config("scal", noise=True).label == "scal+noise"
        assert _config("comb_allpass").label == "comb_allpass"

    def test_unknown_method(self, white_stereo):
        with pytest.raises(ConfigurationError, match="Unknown decorrelation method"):
            process_channels(DecorrelatorConfig(method="hilbert"), white_stereo)

    def test_mono_input(self, white_mono):
        out = process_channels(_config("comb_allpass"), white_mono)
        assert out.n_channels == 1
        assert isinstance(out, AudioBuffer)
