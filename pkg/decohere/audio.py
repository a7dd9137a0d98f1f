"""The sample container shared by every processing stage."""

import hashlib
from dataclasses import dataclass
from typing import Iterable, List

import numpy as np

from .core.errors import ConfigurationError


@dataclass
class AudioBuffer:
    """Multichannel block of samples.

    ``samples`` is always 2-D with shape ``(n_frames, n_channels)``
    (interleaved order, as soundfile returns it) and dtype float64.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim == 1:
            samples = samples[:, np.newaxis]
        if samples.ndim != 2:
            raise ConfigurationError(f"AudioBuffer needs 1-D or 2-D samples, got {samples.ndim}-D")
        if self.sample_rate <= 0:
            raise ConfigurationError(f"sample_rate must be positive, got {self.sample_rate}")
        self.samples = samples
        self.sample_rate = int(self.sample_rate)

    @classmethod
    def from_channels(cls, channels: Iterable[np.ndarray], sample_rate: int) -> "AudioBuffer":
        """Build a buffer from equal-length 1-D channel vectors."""
        planar = [np.asarray(c, dtype=np.float64) for c in channels]
        lengths = {len(c) for c in planar}
        if len(lengths) != 1:
            raise ConfigurationError(f"Channel lengths differ: {sorted(lengths)}")
        return cls(np.stack(planar, axis=1), sample_rate)

    @property
    def n_frames(self) -> int:
        return self.samples.shape[0]

    @property
    def n_channels(self) -> int:
        return self.samples.shape[1]

    def channel(self, index: int) -> np.ndarray:
        """Return a contiguous copy of one channel."""
        return np.ascontiguousarray(self.samples[:, index])

    def channels(self) -> List[np.ndarray]:
        return [self.channel(i) for i in range(self.n_channels)]

    def with_samples(self, samples: np.ndarray) -> "AudioBuffer":
        """Same sample rate, new content."""
        return AudioBuffer(samples, self.sample_rate)

    def scaled(self, gain: float) -> "AudioBuffer":
        return AudioBuffer(self.samples * gain, self.sample_rate)

    def __len__(self) -> int:
        return self.n_frames


def channel_seed(master_seed: int, channel_index: int) -> int:
    """Derive a per-channel seed from a master seed.

    blake2b over ``"<master>:<channel>"``, first 4 bytes little-endian.
    The mapping is part of the reproducibility contract; do not change it.
    """
    digest = hashlib.blake2b(f"{int(master_seed)}:{int(channel_index)}".encode("ascii"), digest_size=8).digest()
    return int.from_bytes(digest[:4], "little")
