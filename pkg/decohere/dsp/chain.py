"""Per-channel decorrelation chains: one method, optionally followed by masked noise."""

import logging
from dataclasses import dataclass, field, replace
from typing import List, Protocol

import numpy as np

from ..audio import AudioBuffer, channel_seed
from ..core.errors import ConfigurationError
from .decorrelators import (
    AllpassBaselineConfig,
    FirstOrderAllpassProcessor,
    ScalConfig,
    ScalProcessor,
    SmoothedAbsConfig,
    SmoothedAbsProcessor,
)
from .psynoise import NoiseInjector, NoiseInjectorConfig

logger = logging.getLogger(__name__)

METHODS = ("none", "scal", "comb_allpass", "first_order_allpass", "smoothed_abs")

# Salt separating the noise generator's seed from the filter's seed.
NOISE_SEED_SALT = 1


class ChannelProcessor(Protocol):
    def process(self, samples: np.ndarray) -> np.ndarray: ...


@dataclass
class DecorrelatorConfig:
    """Method selection plus the parameters of every method.

    ``seed`` is the master seed; channel ``i`` uses
    ``channel_seed(seed, i)`` regardless of the seeds inside the nested
    configs.
    """

    method: str = "scal"
    noise: bool = False
    seed: int = 0
    scal: ScalConfig = field(default_factory=ScalConfig)
    comb_order: int = 7
    allpass: AllpassBaselineConfig = field(default_factory=AllpassBaselineConfig)
    smoothed_abs: SmoothedAbsConfig = field(default_factory=SmoothedAbsConfig)
    noise_cfg: NoiseInjectorConfig = field(default_factory=NoiseInjectorConfig)

    @property
    def label(self) -> str:
        return f"{self.method}+noise" if self.noise else self.method

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ConfigurationError(f"Unknown decorrelation method '{self.method}', expected one of {METHODS}")
        if self.method == "scal":
            self.scal.validate()
        elif self.method == "comb_allpass":
            self.comb_scal_config(self.seed).validate()
        elif self.method == "first_order_allpass":
            self.allpass.validate()
        elif self.method == "smoothed_abs":
            self.smoothed_abs.validate()
        if self.noise:
            self.noise_cfg.validate()

    def comb_scal_config(self, seed: int) -> ScalConfig:
        return replace(self.scal, beta=0.0, n_min=self.comb_order, n_max=self.comb_order, seed=seed)


class _Passthrough:
    def process(self, samples: np.ndarray) -> np.ndarray:
        return np.asarray(samples, dtype=np.float64)


class ChannelChain:
    """Decorrelator followed by an optional noise injector, for one channel."""

    def __init__(self, stages: List[ChannelProcessor]):
        self.stages = stages

    def process(self, samples: np.ndarray) -> np.ndarray:
        out = np.asarray(samples, dtype=np.float64)
        for stage in self.stages:
            out = stage.process(out)
        return out


def build_channel_chain(cfg: DecorrelatorConfig, channel_index: int, sample_rate: int) -> ChannelChain:
    seed = channel_seed(cfg.seed, channel_index)
    if cfg.method == "scal":
        stages: List[ChannelProcessor] = [ScalProcessor(replace(cfg.scal, seed=seed))]
    elif cfg.method == "comb_allpass":
        stages = [ScalProcessor(cfg.comb_scal_config(seed))]
    elif cfg.method == "first_order_allpass":
        stages = [FirstOrderAllpassProcessor(replace(cfg.allpass, seed=seed))]
    elif cfg.method == "smoothed_abs":
        sign = 1 if channel_index % 2 == 0 else -1
        stages = [SmoothedAbsProcessor(replace(cfg.smoothed_abs, channel_sign=sign))]
    else:
        stages = [_Passthrough()]

    if cfg.noise:
        noise_cfg = replace(
            cfg.noise_cfg,
            seed=channel_seed(seed, NOISE_SEED_SALT),
            sample_rate=sample_rate,
        )
        stages.append(NoiseInjector(noise_cfg))
    return ChannelChain(stages)


def process_channels(cfg: DecorrelatorConfig, input: AudioBuffer) -> AudioBuffer:
    """Run an independent chain on every channel of ``input``."""
    cfg.validate()
    if cfg.method == "none" and not cfg.noise:
        return input.with_samples(input.samples.copy())
    logger.info(f"Decorrelating {input.n_channels} channel(s) with '{cfg.label}'")
    outputs = [
        build_channel_chain(cfg, index, input.sample_rate).process(channel)
        for index, channel in enumerate(input.channels())
    ]
    return AudioBuffer.from_channels(outputs, input.sample_rate)
