"""Objective metrics: inter-channel coherence and echo-path misalignment."""

import logging
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import signal, stats

from .audio import AudioBuffer
from .core.errors import ConfigurationError, InsufficientDataError

logger = logging.getLogger(__name__)

MISALIGNMENT_FLOOR_DB = -200.0

# Reporting bands for the analyze summary, in Hz; None means Nyquist.
SUMMARY_BANDS: Tuple[Tuple[str, float, Union[float, None]], ...] = (
    ("0-1500", 0.0, 1500.0),
    ("1500-2000", 1500.0, 2000.0),
    ("2000-nyquist", 2000.0, None),
)


@dataclass
class CoherenceSpectrum:
    """Squared coherence per rfft bin, with the averaging that produced it."""

    gamma_sq: np.ndarray
    fft_size: int
    n_blocks_averaged: int
    sample_rate: int

    @property
    def frequencies(self) -> np.ndarray:
        return np.fft.rfftfreq(self.fft_size, 1.0 / self.sample_rate)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"frequency_hz": self.frequencies, "gamma_sq": self.gamma_sq})


@dataclass
class MisalignmentTrace:
    eta_db: np.ndarray
    times: np.ndarray
    filter_length: int

    @property
    def final_db(self) -> float:
        return float(self.eta_db[-1]) if len(self.eta_db) else float("nan")

    @property
    def inverse(self) -> np.ndarray:
        """1/eta, linear."""
        return 10.0 ** (-np.asarray(self.eta_db) / 10.0)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"time_s": self.times, "eta_db": self.eta_db, "inverse_eta": self.inverse})


def _as_vector(x: Union[AudioBuffer, np.ndarray], name: str) -> np.ndarray:
    if isinstance(x, AudioBuffer):
        if x.n_channels != 1:
            raise ConfigurationError(f"{name} must be mono, got {x.n_channels} channels")
        return x.channel(0)
    vector = np.asarray(x, dtype=np.float64)
    if vector.ndim != 1:
        raise ConfigurationError(f"{name} must be 1-D")
    return vector


def coherence(
    x1: Union[AudioBuffer, np.ndarray],
    x2: Union[AudioBuffer, np.ndarray],
    fft_size: int = 4096,
    n_blocks: int = 8,
    sample_rate: int = None,
) -> CoherenceSpectrum:
    """Welch estimate of the squared coherence between two channels.

    Hann-windowed blocks of ``fft_size`` with 50% overlap. Exactly
    ``n_blocks`` blocks are averaged; trailing samples beyond them are
    ignored. Bins where both spectra vanish report zero.
    """
    if sample_rate is None:
        if not isinstance(x1, AudioBuffer):
            raise ConfigurationError("sample_rate is required for raw sample vectors")
        sample_rate = x1.sample_rate
    if isinstance(x1, AudioBuffer) and isinstance(x2, AudioBuffer) and x1.sample_rate != x2.sample_rate:
        raise ConfigurationError(f"Sample rates differ: {x1.sample_rate} vs {x2.sample_rate}")
    a, b = _as_vector(x1, "x1"), _as_vector(x2, "x2")
    if len(a) != len(b):
        raise ConfigurationError(f"Channel lengths differ: {len(a)} vs {len(b)}")
    if n_blocks < 2:
        raise ConfigurationError(f"n_blocks must be >= 2, got {n_blocks}")
    if fft_size < 2 or fft_size % 2:
        raise ConfigurationError(f"fft_size must be an even integer >= 2, got {fft_size}")

    hop = fft_size // 2
    needed = fft_size + (n_blocks - 1) * hop
    if len(a) < needed:
        raise InsufficientDataError(
            f"{n_blocks} blocks of {fft_size} need {needed} samples, got {len(a)}"
        )

    _, gamma_sq = signal.coherence(
        a[:needed], b[:needed],
        fs=sample_rate, window="hann", nperseg=fft_size, noverlap=hop, detrend=False,
    )
    gamma_sq = np.clip(np.nan_to_num(gamma_sq, nan=0.0), 0.0, None)
    return CoherenceSpectrum(gamma_sq, fft_size, n_blocks, int(sample_rate))


def max_blocks(n_samples: int, fft_size: int) -> int:
    """Largest block count that fits ``n_samples`` with 50% overlap."""
    hop = fft_size // 2
    return 0 if n_samples < fft_size else 1 + (n_samples - fft_size) // hop


def stereo_coherence(buffer: AudioBuffer, fft_size: int = 4096, n_blocks: int = None) -> CoherenceSpectrum:
    """Coherence between channels 0 and 1, using every available block by default."""
    if buffer.n_channels != 2:
        raise ConfigurationError(f"Coherence analysis needs a stereo buffer, got {buffer.n_channels} channels")
    if n_blocks is None:
        n_blocks = max(2, max_blocks(buffer.n_frames, fft_size))
    left, right = buffer.channels()
    return coherence(left, right, fft_size, n_blocks, buffer.sample_rate)


def band_average_coherence(spec: CoherenceSpectrum, f_lo: float, f_hi: float) -> float:
    """Unweighted mean of the squared coherence over bins in [f_lo, f_hi)."""
    nyquist = spec.sample_rate / 2.0
    if not 0.0 <= f_lo < f_hi <= nyquist:
        raise ConfigurationError(f"Band must satisfy 0 <= f_lo < f_hi <= {nyquist}, got [{f_lo}, {f_hi})")
    freqs = spec.frequencies
    mask = (freqs >= f_lo) & (freqs < f_hi)
    if not mask.any():
        raise ConfigurationError(f"Band [{f_lo}, {f_hi}) contains no frequency bins")
    return float(np.mean(spec.gamma_sq[mask]))


def band_summary(spec: CoherenceSpectrum) -> Dict[str, float]:
    nyquist = spec.sample_rate / 2.0
    summary = {}
    for name, lo, hi in SUMMARY_BANDS:
        hi = nyquist if hi is None else min(hi, nyquist)
        if lo < hi:
            summary[name] = band_average_coherence(spec, lo, hi)
    return summary


def misalignment_db(h_true: Sequence[float], h_est: Sequence[float]) -> float:
    """Normalised misalignment 10*log10(||h - h_est||^2 / ||h||^2).

    The shorter vector is zero-padded. An exact match returns the floor.
    """
    h = np.asarray(h_true, dtype=np.float64).ravel()
    g = np.asarray(h_est, dtype=np.float64).ravel()
    n = max(len(h), len(g))
    h = np.pad(h, (0, n - len(h)))
    g = np.pad(g, (0, n - len(g)))
    reference = float(np.dot(h, h))
    if reference == 0.0:
        raise ConfigurationError("h_true has zero energy; misalignment is undefined")
    error = float(np.dot(h - g, h - g))
    if error == 0.0:
        return MISALIGNMENT_FLOOR_DB
    return max(10.0 * np.log10(error / reference), MISALIGNMENT_FLOOR_DB)


def rank_correlation(decorrelation: Sequence[float], alignment_gain: Sequence[float]) -> float:
    """Spearman correlation between (1 - coherence) and (-eta) across variants."""
    if len(decorrelation) != len(alignment_gain):
        raise ConfigurationError("rank_correlation needs equal-length sequences")
    if len(decorrelation) < 2:
        return float("nan")
    rho, _ = stats.spearmanr(decorrelation, alignment_gain)
    return float(rho)
