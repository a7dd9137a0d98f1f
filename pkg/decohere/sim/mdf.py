"""Multichannel multidelay block frequency-domain adaptive filter (MDF).

Overlap-save with blocks of ``B`` samples and ``K = L / B`` partitions.
All input channels share one error signal. The step is normalised per bin
by a smoothed sum of the channels' input power, and the gradient is
constrained to ``B`` causal taps per partition.
"""

import logging
from dataclasses import dataclass

import numpy as np

from ..core.errors import ConfigurationError, DivergenceError

logger = logging.getLogger(__name__)

POWER_FLOOR = 1e-10


@dataclass
class MdfConfig:
    filter_length_taps: int = 1024
    block_size: int = 256
    learning_rate: float = 0.5
    regularization: float = 1e-2
    power_smoothing: float = 0.8

    @property
    def n_partitions(self) -> int:
        return self.filter_length_taps // self.block_size

    def validate(self) -> None:
        if self.block_size < 1 or self.filter_length_taps < self.block_size:
            raise ConfigurationError(
                f"Need 1 <= block_size <= filter_length_taps, got {self.block_size}, {self.filter_length_taps}"
            )
        if self.filter_length_taps % self.block_size:
            raise ConfigurationError(
                f"filter_length_taps ({self.filter_length_taps}) must be a multiple of block_size ({self.block_size})"
            )
        if not 0.0 < self.learning_rate <= 1.0:
            raise ConfigurationError(f"learning_rate must lie in (0, 1], got {self.learning_rate}")
        if self.regularization < 0.0:
            raise ConfigurationError(f"regularization must be >= 0, got {self.regularization}")
        if not 0.0 <= self.power_smoothing < 1.0:
            raise ConfigurationError(f"power_smoothing must lie in [0, 1), got {self.power_smoothing}")


class MdfFilter:
    """Adaptive filter from ``n_channels`` references to one microphone."""

    def __init__(self, cfg: MdfConfig, n_channels: int = 1):
        cfg.validate()
        if n_channels < 1:
            raise ConfigurationError(f"n_channels must be >= 1, got {n_channels}")
        self.cfg = cfg
        self.n_channels = n_channels
        self.block = cfg.block_size
        self.n_fft = 2 * cfg.block_size
        n_bins = cfg.block_size + 1
        shape = (cfg.n_partitions, n_channels, n_bins)
        self.X = np.zeros(shape, dtype=complex)
        self.W = np.zeros(shape, dtype=complex)
        self.P = np.zeros(n_bins)
        self.input_buffer = np.zeros((n_channels, self.n_fft))

    def reset(self) -> None:
        self.X[:] = 0.0
        self.W[:] = 0.0
        self.P[:] = 0.0
        self.input_buffer[:] = 0.0

    def _constrain(self, grad: np.ndarray) -> np.ndarray:
        g = np.fft.irfft(grad, n=self.n_fft, axis=-1)
        g[..., self.block:] = 0.0
        return np.fft.rfft(g, axis=-1)

    def update(self, x_block: np.ndarray, d_block: np.ndarray, adapt: bool = True) -> np.ndarray:
        """Filter one block and adapt; returns the error block.

        ``x_block`` has shape ``(B, n_channels)`` (or ``(B,)`` for one
        channel), ``d_block`` shape ``(B,)``.
        """
        x = np.asarray(x_block, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, np.newaxis]
        d = np.asarray(d_block, dtype=np.float64)
        if x.shape != (self.block, self.n_channels) or d.shape != (self.block,):
            raise ConfigurationError(
                f"Expected blocks of shape ({self.block}, {self.n_channels}) and ({self.block},), "
                f"got {x.shape} and {d.shape}"
            )

        self.input_buffer[:, :self.block] = self.input_buffer[:, self.block:]
        self.input_buffer[:, self.block:] = x.T
        Xm = np.fft.rfft(self.input_buffer, axis=-1)
        self.X[1:] = self.X[:-1]
        self.X[0] = Xm

        Y = np.sum(self.X * self.W, axis=(0, 1))
        e = d - np.fft.irfft(Y, n=self.n_fft)[self.block:]
        if not np.all(np.isfinite(e)):
            raise DivergenceError("Adaptive filter produced a non-finite error signal")

        if adapt:
            lam = self.cfg.power_smoothing
            self.P = lam * self.P + (1.0 - lam) * np.sum(np.abs(Xm) ** 2, axis=0)
            delta = self.cfg.regularization * np.mean(self.P) + POWER_FLOOR
            E = np.fft.rfft(np.concatenate((np.zeros(self.block), e)))
            grad = self._constrain(np.conj(self.X) * E / (self.P + delta))
            self.W += (2.0 * self.cfg.learning_rate / self.cfg.n_partitions) * grad
        return e

    def taps(self) -> np.ndarray:
        """Time-domain estimate, shape ``(n_channels, filter_length_taps)``."""
        w = np.fft.irfft(self.W, n=self.n_fft, axis=-1)[..., :self.block]
        return np.transpose(w, (1, 0, 2)).reshape(self.n_channels, -1)

    def process(self, x: np.ndarray, d: np.ndarray) -> np.ndarray:
        """Run whole blocks of ``x`` (samples x channels) against ``d``."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, np.newaxis]
        n_blocks = min(len(x), len(d)) // self.block
        errors = [
            self.update(x[i * self.block:(i + 1) * self.block], d[i * self.block:(i + 1) * self.block])
            for i in range(n_blocks)
        ]
        return np.concatenate(errors) if errors else np.zeros(0)
