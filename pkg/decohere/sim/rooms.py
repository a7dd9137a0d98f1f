"""Synthetic room impulse responses and remote-room pickup."""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import signal

from ..audio import AudioBuffer
from ..core.errors import ConfigurationError

logger = logging.getLogger(__name__)

MAX_DIRECT_DELAY = 32
TAIL_GAIN = 0.3


@dataclass
class ImpulseResponse:
    taps: np.ndarray
    sample_rate: int
    label: str = ""

    def __post_init__(self):
        self.taps = np.asarray(self.taps, dtype=np.float64).ravel()
        self.validate()

    def validate(self) -> None:
        if not np.all(np.isfinite(self.taps)):
            raise ConfigurationError(f"Impulse response '{self.label}' has non-finite taps")
        if not np.any(self.taps):
            raise ConfigurationError(f"Impulse response '{self.label}' has zero energy")

    def __len__(self) -> int:
        return len(self.taps)

    def truncated(self, length: int) -> np.ndarray:
        """First ``length`` taps, zero-padded if the response is shorter."""
        out = np.zeros(length)
        n = min(length, len(self.taps))
        out[:n] = self.taps[:n]
        return out


def synth_room_ir(
    rt60_ms: float,
    length_taps: int,
    sample_rate: int,
    seed: int = 0,
    label: str = "",
) -> ImpulseResponse:
    """Exponentially decaying Gaussian tail behind a unit direct-path spike.

    The amplitude envelope falls by 60 dB (in energy) ``rt60_ms`` after
    the direct path, which sits at a small random delay.
    """
    if rt60_ms <= 0:
        raise ConfigurationError(f"rt60_ms must be positive, got {rt60_ms}")
    if length_taps < 2:
        raise ConfigurationError(f"length_taps must be >= 2, got {length_taps}")

    rng = np.random.default_rng(seed)
    delay = int(rng.integers(0, min(MAX_DIRECT_DELAY, length_taps // 4) + 1))
    rt60_samples = rt60_ms * sample_rate / 1000.0

    lag = np.arange(length_taps) - delay
    envelope = np.where(lag > 0, 10.0 ** (-3.0 * lag / rt60_samples), 0.0)
    taps = TAIL_GAIN * envelope * rng.standard_normal(length_taps)
    taps[delay] = 1.0
    return ImpulseResponse(taps, sample_rate, label)


def convolve_trimmed(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Linear convolution trimmed to the length of ``x``."""
    return signal.convolve(x, taps, mode="full")[:len(x)]


def simulate_remote(
    source: AudioBuffer,
    remote_irs: Sequence[ImpulseResponse],
    seed: int = 0,
    remote_snr_db: Optional[float] = None,
) -> AudioBuffer:
    """Pick up a mono source with one microphone per impulse response.

    With ``remote_snr_db`` set, independent white noise is added to each
    microphone at that signal-to-noise ratio.
    """
    if source.n_channels != 1:
        raise ConfigurationError(f"Remote source must be mono, got {source.n_channels} channels")
    if not remote_irs:
        raise ConfigurationError("simulate_remote needs at least one impulse response")
    for ir in remote_irs:
        if ir.sample_rate != source.sample_rate:
            raise ConfigurationError(
                f"Impulse response '{ir.label}' is at {ir.sample_rate} Hz, source at {source.sample_rate} Hz"
            )

    x = source.channel(0)
    mics = [convolve_trimmed(x, ir.taps) for ir in remote_irs]
    if remote_snr_db is not None:
        rng = np.random.default_rng(seed)
        for mic in mics:
            power = np.mean(mic ** 2)
            if power > 0:
                mic += np.sqrt(power * 10.0 ** (-remote_snr_db / 10.0)) * rng.standard_normal(len(mic))
    return AudioBuffer.from_channels(mics, source.sample_rate)
