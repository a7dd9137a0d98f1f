"""Tests for the Vorbis window and the overlap-add engine."""

import math

import numpy as np
import pytest

from decohere.audio import AudioBuffer
from decohere.core.errors import ConfigurationError, ContractViolationError
from decohere.dsp.windows import WindowSpec, WolaState, make_window, wola_process, wola_stream


class TestWindow:
    @pytest.mark.parametrize("length", [4, 8, 256, 512, 1024, 2048])
    def test_power_complementary(self, length):
        w = make_window(WindowSpec(length))
        hop = length // 2
        np.testing.assert_allclose(w[:hop] ** 2 + w[hop:] ** 2, 1.0, atol=1e-12)

    def test_symmetric_and_bounded(self):
        w = make_window(WindowSpec(1024))
        np.testing.assert_allclose(w, w[::-1], atol=1e-15)
        assert np.all((w > 0.0) & (w <= 1.0))

    def test_known_value(self):
        """w(0) for L = 4 against a hand evaluation."""
        expected = math.sin(0.5 * math.pi * math.sin(math.pi * 0.5 / 4) ** 2)
        assert make_window(WindowSpec(4))[0] == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("length", [2, 7, 1023, 0])
    def test_invalid_length(self, length):
        with pytest.raises(ConfigurationError):
            WindowSpec(length)

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError, match="window kind"):
            WindowSpec(1024, kind="hann")


def _oracle_delay(x, length, delay):
    """Reference overlap-add of a pure in-frame delay, frames starting at 0."""
    w = make_window(WindowSpec(length))
    hop = length // 2
    padded = np.concatenate((x, np.zeros(length)))
    out = np.zeros(len(padded))
    for start in range(0, len(x), hop):
        frame = padded[start:start + length] * w
        shifted = np.concatenate((np.zeros(delay), frame[:length - delay]))
        out[start:start + length] += shifted * w
    return out[:len(x)]


class TestWola:
    def test_identity_reconstructs_after_warmup(self, rng):
        spec = WindowSpec(256)
        x = rng.standard_normal(40 * spec.hop)
        y = wola_process(WolaState(spec), x, lambda frame: frame)

        hop = spec.hop
        np.testing.assert_allclose(y[hop:], x[hop:], atol=1e-12)
        w = make_window(spec)
        np.testing.assert_allclose(y[:hop], x[:hop] * w[:hop] ** 2, atol=1e-12)

    def test_negation(self, rng):
        spec = WindowSpec(64)
        x = rng.standard_normal(20 * spec.hop)
        y = wola_process(WolaState(spec), x, lambda frame: -frame)
        np.testing.assert_allclose(y[spec.hop:], -x[spec.hop:], atol=1e-12)

    @pytest.mark.parametrize("delay", [1, 5, 10])
    def test_delay_transform_matches_reference(self, rng, delay):
        spec = WindowSpec(128)
        x = rng.standard_normal(30 * spec.hop)

        def shift(frame):
            return np.concatenate((np.zeros(delay), frame[:-delay]))

        y = wola_process(WolaState(spec), x, shift)
        np.testing.assert_allclose(y, _oracle_delay(x, spec.length, delay), atol=1e-12)

    def test_output_bounded_by_transform_gain(self, rng):
        spec = WindowSpec(128)
        x = rng.uniform(-1.0, 1.0, 50 * spec.hop)
        y = wola_process(WolaState(spec), x, lambda frame: 2.0 * frame)
        assert np.max(np.abs(y)) <= 4.0 * np.max(np.abs(x))

    def test_chunked_equals_one_shot(self, rng):
        spec = WindowSpec(64)
        x = rng.standard_normal(24 * spec.hop)
        flip = lambda frame: frame[::-1].copy()  # noqa: E731

        whole = wola_process(WolaState(spec), x, flip)
        state = WolaState(spec)
        parts = np.concatenate([
            wola_process(state, x[:10 * spec.hop], flip),
            wola_process(state, x[10 * spec.hop:], flip),
        ])
        np.testing.assert_array_equal(parts, whole)

    def test_new_frame_called_once_per_frame(self, rng):
        class Counting:
            calls = 0

            def new_frame(self):
                Counting.calls += 1
                return lambda frame: frame

        spec = WindowSpec(32)
        wola_process(WolaState(spec), rng.standard_normal(12 * spec.hop), Counting())
        assert Counting.calls == 12

    def test_wrong_shape_is_contract_violation(self, rng):
        spec = WindowSpec(32)
        with pytest.raises(ContractViolationError):
            wola_process(WolaState(spec), rng.standard_normal(4 * spec.hop), lambda frame: frame[:-1])

    def test_length_must_be_hop_multiple(self):
        spec = WindowSpec(32)
        with pytest.raises(ConfigurationError, match="multiple of the hop"):
            wola_process(WolaState(spec), np.zeros(spec.hop + 1), lambda frame: frame)

    def test_stream_accepts_any_length(self, rng):
        spec = WindowSpec(32)
        x = rng.standard_normal(5 * spec.hop + 7)
        y = wola_stream(WolaState(spec), x, lambda frame: frame)
        assert len(y) == len(x)
        np.testing.assert_allclose(y[spec.hop:], x[spec.hop:], atol=1e-12)

    def test_audio_buffer_in_audio_buffer_out(self, rng):
        spec = WindowSpec(32)
        buf = AudioBuffer(rng.standard_normal(8 * spec.hop), 16000)
        out = wola_process(WolaState(spec), buf, lambda frame: frame)
        assert isinstance(out, AudioBuffer)
        assert out.sample_rate == 16000

        stereo = AudioBuffer(np.zeros((8 * spec.hop, 2)), 16000)
        with pytest.raises(ConfigurationError, match="mono"):
            wola_process(WolaState(spec), stereo, lambda frame: frame)
