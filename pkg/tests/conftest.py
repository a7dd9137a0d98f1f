"""Shared fixtures."""

import numpy as np
import pytest

from decohere.audio import AudioBuffer


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def white_mono(rng):
    """Five seconds of unit-variance white noise at 16 kHz."""
    return AudioBuffer(rng.standard_normal(5 * 16000), 16000)


@pytest.fixture
def white_stereo(rng):
    """Identical white noise on both channels (fully coherent)."""
    x = rng.standard_normal(4 * 16000)
    return AudioBuffer.from_channels([x, x], 16000)
