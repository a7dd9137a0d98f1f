"""Synthetic source material, deterministic per seed."""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal

from ..audio import AudioBuffer
from ..core.errors import ConfigurationError
from ..io.wavfile import read_wav

logger = logging.getLogger(__name__)

MATERIAL_KINDS = ("white", "pink", "speech_like")

# Rough vowel formants (Hz) and bandwidths used to colour the speech-like source.
FORMANTS = ((500.0, 80.0), (1500.0, 120.0), (2500.0, 160.0), (3500.0, 200.0))
SYLLABLE_RATE_HZ = 4.0


def _n_samples(duration_s: float, sample_rate: int) -> int:
    if duration_s <= 0 or sample_rate <= 0:
        raise ConfigurationError(f"duration_s and sample_rate must be positive, got {duration_s}, {sample_rate}")
    return int(round(duration_s * sample_rate))


def white_noise(duration_s: float, sample_rate: int, seed: int = 0, level: float = 0.25) -> AudioBuffer:
    rng = np.random.default_rng(seed)
    return AudioBuffer(level * rng.standard_normal(_n_samples(duration_s, sample_rate)), sample_rate)


def pink_noise(duration_s: float, sample_rate: int, seed: int = 0, level: float = 0.25) -> AudioBuffer:
    """1/f noise by spectral shaping of white noise, scaled to RMS ``level``."""
    n = _n_samples(duration_s, sample_rate)
    rng = np.random.default_rng(seed)
    spectrum = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, 1.0 / sample_rate)
    shaping = np.zeros_like(freqs)
    shaping[1:] = 1.0 / np.sqrt(freqs[1:])
    pink = np.fft.irfft(spectrum * shaping, n=n)
    return AudioBuffer(level * pink / np.sqrt(np.mean(pink ** 2)), sample_rate)


def speech_like(duration_s: float, sample_rate: int, seed: int = 0, level: float = 0.25) -> AudioBuffer:
    """Formant-coloured noise with syllable-rate amplitude modulation.

    Stands in for speech when no recording is supplied: broadband, with
    a long-term spectrum tilted like voiced speech and ~4 Hz envelope.
    """
    n = _n_samples(duration_s, sample_rate)
    rng = np.random.default_rng(seed)
    excitation = rng.standard_normal(n)
    nyquist = sample_rate / 2.0

    voiced = np.zeros(n)
    for centre, bandwidth in FORMANTS:
        if centre + bandwidth >= nyquist:
            continue
        b, a = signal.iirpeak(centre, centre / bandwidth, fs=sample_rate)
        voiced += signal.lfilter(b, a, excitation)
    # Keep some unvoiced high-frequency energy so the source stays broadband.
    b, a = signal.butter(2, min(4000.0, 0.45 * sample_rate) / nyquist, btype="highpass")
    source = voiced + 0.3 * signal.lfilter(b, a, rng.standard_normal(n))

    t = np.arange(n) / sample_rate
    phase = rng.uniform(0.0, 2.0 * np.pi)
    envelope = 0.55 + 0.45 * np.sin(2.0 * np.pi * SYLLABLE_RATE_HZ * t + phase)
    source *= envelope
    return AudioBuffer(level * source / np.sqrt(np.mean(source ** 2)), sample_rate)


def make_material(kind: str, duration_s: float, sample_rate: int, seed: int = 0) -> AudioBuffer:
    generators = {"white": white_noise, "pink": pink_noise, "speech_like": speech_like}
    if kind not in generators:
        raise ConfigurationError(f"Unknown material kind '{kind}', expected one of {MATERIAL_KINDS}")
    return generators[kind](duration_s, sample_rate, seed)


@dataclass
class MaterialSpec:
    """A named source: one of the generators, or a WAV file with ``kind="wav"``."""

    name: str
    kind: str = "speech_like"
    duration_s: float = 10.0
    seed: int = 0
    path: Optional[str] = None

    def validate(self) -> None:
        if self.kind == "wav":
            if not self.path:
                raise ConfigurationError(f"Material '{self.name}' of kind 'wav' needs a path")
        elif self.kind not in MATERIAL_KINDS:
            raise ConfigurationError(
                f"Material '{self.name}': unknown kind '{self.kind}', expected 'wav' or one of {MATERIAL_KINDS}"
            )
        if self.duration_s <= 0:
            raise ConfigurationError(f"Material '{self.name}': duration_s must be positive")


def load_material(spec: MaterialSpec, sample_rate: int) -> AudioBuffer:
    """Mono source for ``spec`` at ``sample_rate``; WAV files are downmixed and trimmed."""
    spec.validate()
    if spec.kind != "wav":
        return make_material(spec.kind, spec.duration_s, sample_rate, spec.seed)

    wav = read_wav(spec.path)
    if wav.sample_rate != sample_rate:
        raise ConfigurationError(
            f"Material '{spec.name}' is at {wav.sample_rate} Hz, simulation runs at {sample_rate} Hz"
        )
    mono = wav.buffer.samples.mean(axis=1)
    return AudioBuffer(mono[:int(round(spec.duration_s * sample_rate))], sample_rate)
