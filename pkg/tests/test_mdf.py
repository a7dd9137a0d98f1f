"""Tests for the multichannel MDF echo canceller."""

import numpy as np
import pytest
from scipy import signal

from decohere.analysis import misalignment_db
from decohere.core.errors import ConfigurationError, DivergenceError
from decohere.sim.mdf import MdfConfig, MdfFilter


def _decaying_path(rng, length):
    return rng.standard_normal(length) * np.exp(-np.arange(length) / (length / 6.0))


class TestMdfConfig:
    def test_partitions(self):
        assert MdfConfig(1024, 256).n_partitions == 4

    @pytest.mark.parametrize("overrides", [
        {"block_size": 0},
        {"filter_length_taps": 100, "block_size": 256},
        {"filter_length_taps": 1000, "block_size": 256},
        {"learning_rate": 0.0},
        {"learning_rate": 1.5},
        {"regularization": -1.0},
        {"power_smoothing": 1.0},
    ])
    def test_invalid(self, overrides):
        with pytest.raises(ConfigurationError):
            MdfConfig(**overrides).validate()


class TestMdfFilter:
    def test_silence_keeps_taps_at_zero(self):
        mdf = MdfFilter(MdfConfig(512, 128), n_channels=2)
        e = mdf.process(np.zeros((128 * 20, 2)), np.zeros(128 * 20))
        assert not np.any(mdf.taps())
        assert not np.any(e)

    def test_taps_shape(self):
        mdf = MdfFilter(MdfConfig(512, 128), n_channels=2)
        assert mdf.taps().shape == (2, 512)

    def test_mono_convergence(self, rng):
        h = _decaying_path(rng, 512)
        x = rng.standard_normal(16000 * 5)
        d = signal.lfilter(h, [1.0], x)

        mdf = MdfFilter(MdfConfig(512, 128))
        e = mdf.process(x, d)

        assert misalignment_db(h, mdf.taps()[0]) < -25.0
        tail = slice(len(e) - 16000, len(e))
        erle_db = 10.0 * np.log10(np.mean(d[tail] ** 2) / np.mean(e[tail] ** 2))
        assert erle_db > 25.0

    def test_stereo_with_independent_references(self, rng):
        """Uncorrelated loudspeaker signals make both paths identifiable."""
        h = [_decaying_path(rng, 256), _decaying_path(rng, 256)]
        x = rng.standard_normal((16000 * 5, 2))
        d = signal.lfilter(h[0], [1.0], x[:, 0]) + signal.lfilter(h[1], [1.0], x[:, 1])

        mdf = MdfFilter(MdfConfig(256, 64), n_channels=2)
        mdf.process(x, d)
        assert misalignment_db(np.concatenate(h), mdf.taps().ravel()) < -20.0

    def test_frozen_adaptation(self, rng):
        mdf = MdfFilter(MdfConfig(256, 64))
        e = mdf.update(rng.standard_normal(64), rng.standard_normal(64), adapt=False)
        assert e.shape == (64,)
        assert not np.any(mdf.taps())

    def test_reset(self, rng):
        mdf = MdfFilter(MdfConfig(256, 64))
        mdf.process(rng.standard_normal(64 * 10), rng.standard_normal(64 * 10))
        mdf.reset()
        assert not np.any(mdf.taps())

    def test_non_finite_input_diverges(self):
        mdf = MdfFilter(MdfConfig(256, 64))
        x = np.zeros(64)
        x[3] = np.nan
        with pytest.raises(DivergenceError):
            mdf.update(x, np.zeros(64))

    def test_block_shape_checked(self):
        mdf = MdfFilter(MdfConfig(256, 64), n_channels=2)
        with pytest.raises(ConfigurationError, match="shape"):
            mdf.update(np.zeros(64), np.zeros(64))
