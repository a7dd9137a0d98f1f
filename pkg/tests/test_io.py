"""Tests for WAV and report I/O."""

import json

import numpy as np
import pandas as pd
import pytest
import soundfile as sf

from decohere.audio import AudioBuffer
from decohere.core.errors import AudioIOError, ConfigurationError
from decohere.io.reports import atomic_path, dumps_report, write_csv, write_json
from decohere.io.wavfile import WavFile, read_wav, write_wav


class TestWav:
    def test_pcm16_round_trip_is_exact(self, tmp_path, rng):
        samples = np.round(rng.uniform(-0.9, 0.9, (4000, 2)) * 32768.0) / 32768.0
        path = tmp_path / "pcm.wav"
        write_wav(path, WavFile(AudioBuffer(samples, 16000), "pcm16"))

        wav = read_wav(path)
        assert wav.bit_depth == "pcm16"
        assert wav.channels == 2
        assert wav.sample_rate == 16000
        np.testing.assert_array_equal(wav.samples, samples)

    def test_float_round_trip(self, tmp_path, rng):
        samples = rng.uniform(-1.0, 1.0, 3000).astype(np.float32).astype(np.float64)
        path = tmp_path / "float.wav"
        write_wav(path, WavFile(AudioBuffer(samples, 44100), "float32"))
        wav = read_wav(path)
        assert wav.bit_depth == "float32"
        np.testing.assert_array_equal(wav.samples[:, 0], samples)

    def test_pcm16_clips(self, tmp_path):
        path = tmp_path / "loud.wav"
        write_wav(path, WavFile(AudioBuffer(np.array([2.0, -2.0, 0.5]), 8000), "pcm16"))
        np.testing.assert_array_equal(read_wav(path).samples[:, 0], [32767 / 32768, -1.0, 0.5])

    def test_unsupported_subtype(self, tmp_path):
        path = tmp_path / "pcm24.wav"
        sf.write(str(path), np.zeros(100), 16000, subtype="PCM_24")
        with pytest.raises(AudioIOError, match="unsupported encoding"):
            read_wav(path)

    def test_rate_out_of_range(self, tmp_path):
        path = tmp_path / "hi.wav"
        sf.write(str(path), np.zeros(100), 96000, subtype="PCM_16")
        with pytest.raises(AudioIOError, match="sample rate"):
            read_wav(path)
        with pytest.raises(AudioIOError):
            write_wav(tmp_path / "out.wav", WavFile(AudioBuffer(np.zeros(10), 96000)))

    def test_missing_file(self, tmp_path):
        with pytest.raises(AudioIOError, match="Cannot read"):
            read_wav(tmp_path / "absent.wav")

    def test_non_finite_refused(self, tmp_path):
        path = tmp_path / "bad.wav"
        with pytest.raises(AudioIOError, match="non-finite"):
            write_wav(path, WavFile(AudioBuffer(np.array([0.0, np.nan]), 16000)))
        assert not path.exists()

    def test_bad_bit_depth(self):
        with pytest.raises(ConfigurationError):
            WavFile(AudioBuffer(np.zeros(4), 16000), "pcm8")


class TestReports:
    def test_dumps_is_canonical(self):
        text = dumps_report({"b": np.float64(1.5), "a": np.arange(2)})
        assert text == '{\n  "a": [\n    0,\n    1\n  ],\n  "b": 1.5\n}\n'

    def test_write_json(self, tmp_path):
        path = write_json(tmp_path / "nested" / "report.json", {"x": 1})
        assert json.loads(path.read_text()) == {"x": 1}

    def test_write_csv(self, tmp_path):
        path = write_csv(tmp_path / "t.csv", pd.DataFrame({"a": [1.0, 2.0]}))
        assert pd.read_csv(path)["a"].tolist() == [1.0, 2.0]

    def test_atomic_path_leaves_target_untouched_on_failure(self, tmp_path):
        target = tmp_path / "report.json"
        target.write_text("old")
        with pytest.raises(RuntimeError):
            with atomic_path(target) as tmp:
                tmp.write_text("half-written")
                raise RuntimeError("interrupted")
        assert target.read_text() == "old"
        assert [p.name for p in tmp_path.iterdir()] == ["report.json"]
