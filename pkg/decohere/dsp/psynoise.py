"""Psychoacoustically masked noise injection.

A simplified Bark-band masking model sets, for every analysis window, how
much noise each critical band can hide. Noise with that band power and
random phase is synthesised in the frequency domain, windowed once, and
overlap-added one hop later than the window it was measured on. The input
itself is never delayed.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from ..audio import AudioBuffer
from ..core.errors import ConfigurationError
from .windows import WindowSpec, make_window

logger = logging.getLogger(__name__)

# Upper edges of the classic critical bands, in Hz.
CRITICAL_BAND_EDGES_HZ = (
    0, 100, 200, 300, 400, 510, 630, 770, 920, 1080, 1270, 1480, 1720,
    2000, 2320, 2700, 3150, 3700, 4400, 5300, 6400, 7700, 9500, 12000, 15500,
)

UPWARD_SLOPE_DB_PER_BARK = 10.0
DOWNWARD_SLOPE_DB_PER_BARK = 25.0
EMPHASIS_EDGE_HZ = 1500.0
ROLLOFF_EDGE_HZ = 2000.0


def bark(frequency_hz) -> np.ndarray:
    """Zwicker-style Hz to Bark mapping."""
    f = np.asarray(frequency_hz, dtype=np.float64)
    return 13.0 * np.arctan(0.76 * f / 1000.0) + 3.5 * np.arctan((f / 7500.0) ** 2)


def bark_band_edges(n_fft: int, sample_rate: int) -> np.ndarray:
    """Bin index boundaries of the non-empty critical bands up to Nyquist.

    Band ``b`` covers bins ``edges[b]:edges[b + 1]``; the last band includes
    the Nyquist bin, so the bands partition all ``n_fft // 2 + 1`` bins.
    """
    freqs = np.fft.rfftfreq(n_fft, 1.0 / sample_rate)
    nyquist = sample_rate / 2.0
    hz_edges = [edge for edge in CRITICAL_BAND_EDGES_HZ if edge < nyquist]
    edges = np.searchsorted(freqs, hz_edges, side="left").tolist() + [len(freqs)]
    return np.unique(edges)


@dataclass
class BandLayout:
    edges: np.ndarray
    center_hz: np.ndarray
    center_bark: np.ndarray

    @classmethod
    def build(cls, n_fft: int, sample_rate: int) -> "BandLayout":
        edges = bark_band_edges(n_fft, sample_rate)
        freqs = np.fft.rfftfreq(n_fft, 1.0 / sample_rate)
        centers = np.array([freqs[lo:hi].mean() for lo, hi in zip(edges[:-1], edges[1:])])
        return cls(edges=edges, center_hz=centers, center_bark=bark(centers))

    @property
    def n_bands(self) -> int:
        return len(self.edges) - 1

    @property
    def band_sizes(self) -> np.ndarray:
        return np.diff(self.edges)

    def band_sums(self, power: np.ndarray) -> np.ndarray:
        return np.add.reduceat(power, self.edges[:-1])


@dataclass
class MaskingThreshold:
    """Allowed noise power per band (linear, one-sided bin-power units)."""

    band_energies: np.ndarray
    band_edges: np.ndarray
    frame_index: int = 0

    @property
    def band_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.band_energies)


@dataclass
class NoiseInjectorConfig:
    window: WindowSpec = field(default_factory=WindowSpec)
    lowband_emphasis_db: float = 6.0
    highband_rolloff_db: float = -12.0
    threshold_offset_db: float = -18.0
    seed: int = 0
    sample_rate: int = 44100

    def validate(self) -> None:
        self.window.validate()
        for name in ("lowband_emphasis_db", "highband_rolloff_db"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite, got {getattr(self, name)}")
        # -inf is accepted and disables injection.
        if np.isnan(self.threshold_offset_db) or self.threshold_offset_db == np.inf:
            raise ConfigurationError(f"threshold_offset_db must be finite or -inf, got {self.threshold_offset_db}")
        if self.sample_rate <= 0:
            raise ConfigurationError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def enabled(self) -> bool:
        return self.threshold_offset_db != -np.inf


def spreading_matrix(center_bark: np.ndarray) -> np.ndarray:
    """Power gains ``S[maskee, masker]`` of the triangular Bark spreading."""
    dz = center_bark[:, np.newaxis] - center_bark[np.newaxis, :]
    gain_db = np.where(dz >= 0.0, -UPWARD_SLOPE_DB_PER_BARK * dz, DOWNWARD_SLOPE_DB_PER_BARK * dz)
    return 10.0 ** (gain_db / 10.0)


def shaping_db(layout: BandLayout, cfg: NoiseInjectorConfig) -> np.ndarray:
    """Emphasis below 1.5 kHz, rolloff above 2 kHz, linear in Bark between."""
    lo, hi = bark(EMPHASIS_EDGE_HZ), bark(ROLLOFF_EDGE_HZ)
    return np.interp(layout.center_bark, [lo, hi], [cfg.lowband_emphasis_db, cfg.highband_rolloff_db])


def compute_masking_threshold(
    frame_spectrum: np.ndarray,
    cfg: NoiseInjectorConfig,
    layout: Optional[BandLayout] = None,
    frame_index: int = 0,
) -> MaskingThreshold:
    """Masking threshold for one analysis window.

    ``frame_spectrum`` is the one-sided power ``|X_k|^2`` of the
    analysis-windowed frame, ``L/2 + 1`` bins.
    """
    power = np.asarray(frame_spectrum, dtype=np.float64)
    layout = layout or BandLayout.build(cfg.window.length, cfg.sample_rate)
    if len(power) != layout.edges[-1]:
        raise ConfigurationError(
            f"Spectrum has {len(power)} bins, expected {layout.edges[-1]} for L={cfg.window.length}"
        )
    if not cfg.enabled:
        return MaskingThreshold(np.zeros(layout.n_bands), layout.edges, frame_index)

    spread = spreading_matrix(layout.center_bark) @ layout.band_sums(power)
    gain = 10.0 ** ((cfg.threshold_offset_db + shaping_db(layout, cfg)) / 10.0)
    return MaskingThreshold(spread * gain, layout.edges, frame_index)


def generate_masked_noise(
    threshold: MaskingThreshold,
    cfg: NoiseInjectorConfig,
    rng: np.random.Generator,
    window: Optional[np.ndarray] = None,
) -> np.ndarray:
    """One synthesis-windowed noise frame whose band powers equal ``threshold``.

    Amplitudes are deterministic per band and phases uniform. Windowing
    spreads power across neighbouring bins, so each band of the windowed
    frame is rescaled to its threshold afterwards; the one-sided rfft band
    powers of the returned frame match ``threshold.band_energies``.
    """
    length = cfg.window.length
    window = make_window(cfg.window) if window is None else window
    edges = threshold.band_edges
    sizes = np.diff(edges)
    bin_power = np.repeat(threshold.band_energies / sizes, sizes)
    phases = rng.uniform(0.0, 2.0 * np.pi, len(bin_power))
    if not np.any(bin_power):
        return np.zeros(length)
    frame = np.fft.irfft(np.sqrt(bin_power) * np.exp(1j * phases), n=length) * window

    spectrum = np.fft.rfft(frame)
    measured = np.add.reduceat(np.abs(spectrum) ** 2, edges[:-1])
    gain = np.zeros_like(measured)
    np.divide(threshold.band_energies, measured, out=gain, where=measured > 0.0)
    return np.fft.irfft(spectrum * np.repeat(np.sqrt(gain), sizes), n=length)


class NoiseInjector:
    """Streaming masked-noise injector for one channel.

    ``record=True`` keeps one row per (frame, band) with the threshold and
    the band level of the windowed noise frame generated for it.
    """

    def __init__(self, cfg: NoiseInjectorConfig, record: bool = False):
        cfg.validate()
        self.cfg = cfg
        self.record = record
        self.window = make_window(cfg.window)
        self.layout = BandLayout.build(cfg.window.length, cfg.sample_rate)
        self.rng = np.random.default_rng(cfg.seed)
        hop = cfg.window.hop
        self.input_tail = np.zeros(hop)
        self.noise_tail = np.zeros(hop)
        self.frame_index = 0
        self.rows: List[Dict[str, float]] = []

    def _record(self, threshold: MaskingThreshold, noise_frame: np.ndarray) -> None:
        measured = self.layout.band_sums(np.abs(np.fft.rfft(noise_frame)) ** 2)
        with np.errstate(divide="ignore"):
            injected_db = 10.0 * np.log10(measured)
        for band, (t_db, n_db) in enumerate(zip(threshold.band_db, injected_db)):
            self.rows.append({
                "frame": threshold.frame_index,
                "band": band,
                "threshold_db": float(t_db),
                "injected_db": float(n_db),
            })

    def next_noise_frame(self, block: np.ndarray) -> np.ndarray:
        """Measure the window ending with ``block`` and synthesise its noise."""
        frame = np.concatenate((self.input_tail, block)) * self.window
        self.input_tail = block.copy()
        power = np.abs(np.fft.rfft(frame)) ** 2
        threshold = compute_masking_threshold(power, self.cfg, self.layout, self.frame_index)
        noise = generate_masked_noise(threshold, self.cfg, self.rng, self.window)
        if self.record:
            self._record(threshold, noise)
        self.frame_index += 1
        return noise

    def noise_for_hop(self, block: np.ndarray) -> np.ndarray:
        """Noise samples to add to ``block``.

        The frame measured on the previous and current hop starts here, so
        its noise lags its own analysis window by exactly one hop.
        """
        hop = self.cfg.window.hop
        noise = self.next_noise_frame(block)
        out = self.noise_tail + noise[:hop]
        self.noise_tail = noise[hop:].copy()
        return out

    def process(self, samples: np.ndarray) -> np.ndarray:
        x = np.asarray(samples, dtype=np.float64)
        hop = self.cfg.window.hop
        n_hops = -(-len(x) // hop)
        padded = np.zeros(n_hops * hop)
        padded[:len(x)] = x
        noise = np.concatenate([self.noise_for_hop(padded[i * hop:(i + 1) * hop]) for i in range(n_hops)] or [np.zeros(0)])
        noise = noise[:len(x)]
        out = x.copy()
        active = noise != 0.0
        out[active] += noise[active]
        return out

    def threshold_table(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=["frame", "band", "threshold_db", "injected_db"])


def inject_noise(input: AudioBuffer, cfg: NoiseInjectorConfig) -> AudioBuffer:
    """Add masked noise to a mono stream at the buffer's own sample rate."""
    if input.n_channels != 1:
        raise ConfigurationError("inject_noise processes one channel; use one injector and seed per channel")
    if cfg.sample_rate != input.sample_rate:
        cfg = replace(cfg, sample_rate=input.sample_rate)
    return input.with_samples(NoiseInjector(cfg).process(input.channel(0)))


def threshold_table(input: AudioBuffer, cfg: NoiseInjectorConfig) -> pd.DataFrame:
    """Per-frame, per-band threshold dump for a mono stream."""
    if input.n_channels != 1:
        raise ConfigurationError("threshold_table expects a mono stream")
    injector = NoiseInjector(replace(cfg, sample_rate=input.sample_rate), record=True)
    injector.process(input.channel(0))
    return injector.threshold_table()
