"""WAV reading and writing through soundfile.

Two encodings are supported: 16-bit PCM and 32-bit float. PCM samples are
converted at the boundary with a fixed 1/32768 scale in both directions,
so a read-write-read cycle is sample-identical.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
import soundfile as sf

from ..audio import AudioBuffer
from ..core.errors import AudioIOError, ConfigurationError
from .reports import atomic_path

logger = logging.getLogger(__name__)

BIT_DEPTHS = {"pcm16": "PCM_16", "float32": "FLOAT"}
MIN_SAMPLE_RATE = 8000
MAX_SAMPLE_RATE = 48000
PCM16_SCALE = 32768.0


@dataclass
class WavFile:
    buffer: AudioBuffer
    bit_depth: str = "float32"

    def __post_init__(self):
        if self.bit_depth not in BIT_DEPTHS:
            raise ConfigurationError(f"bit_depth must be one of {sorted(BIT_DEPTHS)}, got '{self.bit_depth}'")

    @property
    def channels(self) -> int:
        return self.buffer.n_channels

    @property
    def sample_rate(self) -> int:
        return self.buffer.sample_rate

    @property
    def samples(self) -> np.ndarray:
        return self.buffer.samples


def _check_rate(sample_rate: int, path: Union[str, Path]) -> None:
    if not MIN_SAMPLE_RATE <= sample_rate <= MAX_SAMPLE_RATE:
        raise AudioIOError(
            f"{path}: sample rate {sample_rate} Hz is outside [{MIN_SAMPLE_RATE}, {MAX_SAMPLE_RATE}]"
        )


def read_wav(path: Union[str, Path]) -> WavFile:
    try:
        info = sf.info(str(path))
    except (RuntimeError, OSError) as exc:
        raise AudioIOError(f"Cannot read {path}: {exc}") from exc
    if info.format != "WAV":
        raise AudioIOError(f"{path}: expected a WAV file, got {info.format}")
    depth = {subtype: name for name, subtype in BIT_DEPTHS.items()}.get(info.subtype)
    if depth is None:
        raise AudioIOError(f"{path}: unsupported encoding {info.subtype}, expected PCM_16 or FLOAT")
    _check_rate(info.samplerate, path)

    try:
        if depth == "pcm16":
            data, rate = sf.read(str(path), dtype="int16", always_2d=True)
            samples = data.astype(np.float64) / PCM16_SCALE
        else:
            data, rate = sf.read(str(path), dtype="float32", always_2d=True)
            samples = data.astype(np.float64)
    except (RuntimeError, OSError) as exc:
        raise AudioIOError(f"Cannot decode {path}: {exc}") from exc
    logger.debug(f"Read {path}: {samples.shape[1]} ch, {rate} Hz, {depth}")
    return WavFile(AudioBuffer(samples, rate), depth)


def write_wav(path: Union[str, Path], wav: WavFile) -> Path:
    """Write atomically; nothing appears at ``path`` if encoding fails."""
    _check_rate(wav.sample_rate, path)
    samples = wav.samples
    if not np.all(np.isfinite(samples)):
        raise AudioIOError(f"Refusing to write non-finite samples to {path}")
    if wav.bit_depth == "pcm16":
        clipped = np.clip(np.round(samples * PCM16_SCALE), -PCM16_SCALE, PCM16_SCALE - 1)
        if np.any(clipped != np.round(samples * PCM16_SCALE)):
            logger.warning(f"Clipping samples written to {path}")
        data = clipped.astype(np.int16)
    else:
        data = samples.astype(np.float32)

    with atomic_path(path, suffix=".wav") as tmp:
        try:
            sf.write(str(tmp), data, wav.sample_rate, subtype=BIT_DEPTHS[wav.bit_depth], format="WAV")
        except RuntimeError as exc:
            raise AudioIOError(f"Cannot encode {path}: {exc}") from exc
    logger.debug(f"Wrote {path}: {wav.channels} ch, {wav.sample_rate} Hz, {wav.bit_depth}")
    return Path(path)
