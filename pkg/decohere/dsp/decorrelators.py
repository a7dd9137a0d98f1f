"""Channel decorrelators: shaped comb-allpass and the three baselines.

Shaped comb-allpass (SCAL) transfer function, depth ``alpha``, tilt
``beta``, order ``N``::

    literal:  A(z) = (a - a*b*z^-1 + z^-N) / (1 + a*b*z^-(N-1) - a*z^-N)
    flat:     A(z) = (-a + a*b*z^-1 + z^-N) / (1 + a*b*z^-(N-1) - a*z^-N)

Both share the denominator. In ``flat`` mode the numerator is the
reversed denominator, which makes ``|A|`` exactly one. ``literal`` keeps
the printed sign and is not magnitude-flat; it is kept for comparison.
Stability is guaranteed when ``|alpha| * (1 + |beta|) < 1``.
"""

import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import signal

from ..audio import AudioBuffer
from ..core.errors import ConfigurationError
from .windows import FrameTransform, WindowSpec, WolaState, wola_stream

logger = logging.getLogger(__name__)

FILTER_MODES = ("flat", "literal")
ALPHA_VARIATIONS = ("per_sample_random_walk", "constant")


def check_stability(alpha: float, beta: float) -> bool:
    """Sufficient stability condition |alpha|(1 + |beta|) < 1, strict."""
    return abs(alpha) * (1.0 + abs(beta)) < 1.0


def alpha_bound(beta: float, epsilon: float) -> float:
    """Largest admissible |alpha| for a given tilt and unit-circle margin."""
    return (1.0 - epsilon) / (1.0 + abs(beta))


@dataclass
class ScalConfig:
    """Parameters of one SCAL decorrelator instance (one channel)."""

    beta: float = 0.43
    n_min: int = 5
    n_max: int = 10
    r_max: float = 0.6
    epsilon: float = 0.01
    seed: int = 0
    window: WindowSpec = field(default_factory=WindowSpec)
    mode: str = "flat"
    alpha_init: float = 0.0

    @property
    def alpha_max(self) -> float:
        return alpha_bound(self.beta, self.epsilon)

    def validate(self) -> None:
        if not abs(self.beta) < 1.0:
            raise ConfigurationError(f"beta must satisfy |beta| < 1, got {self.beta}")
        if not 1 <= self.n_min <= self.n_max:
            raise ConfigurationError(f"Order bounds must satisfy 1 <= n_min <= n_max, got {self.n_min}, {self.n_max}")
        if not 0.0 < self.epsilon < 0.5:
            raise ConfigurationError(f"epsilon must lie in (0, 0.5), got {self.epsilon}")
        if self.r_max < 0.0 or not np.isfinite(self.r_max):
            raise ConfigurationError(f"r_max must be finite and non-negative, got {self.r_max}")
        if self.mode not in FILTER_MODES:
            raise ConfigurationError(f"mode must be one of {FILTER_MODES}, got '{self.mode}'")
        self.window.validate()
        if self.n_max >= self.window.length:
            raise ConfigurationError(
                f"n_max ({self.n_max}) must be shorter than the window ({self.window.length})"
            )
        if abs(self.alpha_init) > self.alpha_max:
            raise ConfigurationError(
                f"alpha_init {self.alpha_init} exceeds the stability bound {self.alpha_max:.6f}"
            )


def comb_allpass_config(order: int = 7, **overrides) -> ScalConfig:
    """Plain comb-allpass: no tilt and a fixed order."""
    return ScalConfig(beta=0.0, n_min=order, n_max=order, **overrides)


@dataclass
class ScalFrameState:
    alpha: float
    order_N: int
    rng: np.random.Generator

    @classmethod
    def initial(cls, cfg: ScalConfig) -> "ScalFrameState":
        return cls(alpha=float(cfg.alpha_init), order_N=cfg.n_min, rng=np.random.default_rng(cfg.seed))


def scal_coefficients(alpha: float, beta: float, order_N: int, mode: str = "flat") -> Tuple[np.ndarray, np.ndarray]:
    """Numerator and denominator polynomials in z^-1."""
    if order_N < 1:
        raise ConfigurationError(f"order_N must be >= 1, got {order_N}")
    den = np.zeros(order_N + 1)
    den[0] = 1.0
    den[order_N - 1] += alpha * beta
    den[order_N] -= alpha

    if mode == "flat":
        num = den[::-1].copy()
    elif mode == "literal":
        num = np.zeros(order_N + 1)
        num[0] += alpha
        num[1] -= alpha * beta
        num[order_N] += 1.0
    else:
        raise ConfigurationError(f"mode must be one of {FILTER_MODES}, got '{mode}'")
    return num, den


def scal_frame_filter(frame: np.ndarray, alpha: float, beta: float, order_N: int, mode: str = "flat") -> np.ndarray:
    """Filter one windowed frame from zero initial state."""
    if not check_stability(alpha, beta):
        raise ConfigurationError(f"Unstable SCAL parameters: |{alpha}| * (1 + |{beta}|) >= 1")
    if order_N >= len(frame):
        raise ConfigurationError(f"order_N ({order_N}) must be shorter than the frame ({len(frame)})")
    num, den = scal_coefficients(alpha, beta, order_N, mode)
    return signal.lfilter(num, den, frame)


def next_alpha(alpha_prev: float, r0: float, beta: float, epsilon: float) -> float:
    """Random-walk step clamped symmetrically to the stability bound."""
    bound = alpha_bound(beta, epsilon)
    return float(min(max(alpha_prev + r0, -bound), bound))


def update_alpha(state: ScalFrameState, cfg: ScalConfig) -> float:
    r0 = state.rng.uniform(-cfg.r_max, cfg.r_max)
    state.alpha = next_alpha(state.alpha, r0, cfg.beta, cfg.epsilon)
    return state.alpha


def update_order(state: ScalFrameState, cfg: ScalConfig) -> int:
    state.order_N = int(state.rng.integers(cfg.n_min, cfg.n_max + 1))
    return state.order_N


class ScalProcessor:
    """Streaming SCAL decorrelator for one channel.

    Each WOLA frame draws a new order, then (from the second frame on) a
    new depth. The first frame runs at ``alpha_init``.
    """

    def __init__(self, cfg: ScalConfig):
        cfg.validate()
        self.cfg = cfg
        self.state = ScalFrameState.initial(cfg)
        self.wola = WolaState(cfg.window)
        self.frames_started = 0

    def new_frame(self) -> FrameTransform:
        if self.frames_started:
            update_alpha(self.state, self.cfg)
        update_order(self.state, self.cfg)
        self.frames_started += 1
        return partial(
            scal_frame_filter,
            alpha=self.state.alpha,
            beta=self.cfg.beta,
            order_N=self.state.order_N,
            mode=self.cfg.mode,
        )

    def process(self, samples: np.ndarray) -> np.ndarray:
        return wola_stream(self.wola, np.asarray(samples, dtype=np.float64), self)


def _mono(input: AudioBuffer, operation: str) -> np.ndarray:
    if input.n_channels != 1:
        raise ConfigurationError(
            f"{operation} processes one channel; give each channel its own instance and seed"
        )
    return input.channel(0)


def scal_process(cfg: ScalConfig, input: AudioBuffer) -> AudioBuffer:
    """Decorrelate a mono stream with the shaped comb-allpass filter."""
    return input.with_samples(ScalProcessor(cfg).process(_mono(input, "scal_process")))


def comb_allpass_process(cfg: Optional[ScalConfig], input: AudioBuffer) -> AudioBuffer:
    """SCAL restricted to beta = 0 and a single order (default N = 7)."""
    cfg = cfg if cfg is not None else comb_allpass_config()
    if cfg.beta != 0.0 or cfg.n_min != cfg.n_max:
        raise ConfigurationError(
            f"Comb-allpass needs beta = 0 and n_min = n_max, got beta={cfg.beta}, N in [{cfg.n_min}, {cfg.n_max}]"
        )
    return scal_process(cfg, input)


@dataclass
class AllpassBaselineConfig:
    """Per-sample time-varying first-order allpass."""

    alpha_min: float = -0.985
    variation: str = "per_sample_random_walk"
    step: float = 0.01
    alpha_init: Optional[float] = None
    seed: int = 0

    @property
    def start_alpha(self) -> float:
        return 0.5 * self.alpha_min if self.alpha_init is None else float(self.alpha_init)

    def validate(self) -> None:
        if not -1.0 < self.alpha_min < 0.0:
            raise ConfigurationError(f"alpha_min must lie in (-1, 0), got {self.alpha_min}")
        if self.variation not in ALPHA_VARIATIONS:
            raise ConfigurationError(f"variation must be one of {ALPHA_VARIATIONS}, got '{self.variation}'")
        if self.step <= 0.0:
            raise ConfigurationError(f"step must be positive, got {self.step}")
        if not self.alpha_min <= self.start_alpha <= 0.0:
            raise ConfigurationError(
                f"alpha_init {self.start_alpha} is outside [{self.alpha_min}, 0]"
            )


def reflect_into(values: np.ndarray, low: float, high: float) -> np.ndarray:
    """Fold an unbounded walk into [low, high] by mirror reflection."""
    width = high - low
    folded = np.mod(values - low, 2.0 * width)
    return np.where(folded > width, 2.0 * width - folded, folded) + low


def first_order_allpass_filter(
    samples: np.ndarray,
    alphas: np.ndarray,
    x_prev: float = 0.0,
    y_prev: float = 0.0,
) -> Tuple[np.ndarray, float, float]:
    """y(n) = a(n) x(n) + x(n-1) - a(n) y(n-1), with per-sample a(n).

    Returns the output and the (x, y) memory for the next call.
    """
    xs = np.asarray(samples, dtype=np.float64).tolist()
    coeffs = np.asarray(alphas, dtype=np.float64).tolist()
    out = [0.0] * len(xs)
    for n, (x, a) in enumerate(zip(xs, coeffs)):
        y = a * (x - y_prev) + x_prev
        out[n] = y
        x_prev, y_prev = x, y
    return np.asarray(out), x_prev, y_prev


class FirstOrderAllpassProcessor:
    """Streaming first-order allpass with a reflected random-walk coefficient."""

    def __init__(self, cfg: AllpassBaselineConfig):
        cfg.validate()
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self.alpha = cfg.start_alpha
        self.x_prev = 0.0
        self.y_prev = 0.0

    def alpha_trajectory(self, n_samples: int) -> np.ndarray:
        if self.cfg.variation == "constant":
            return np.full(n_samples, self.alpha)
        walk = self.alpha + np.cumsum(self.rng.uniform(-self.cfg.step, self.cfg.step, n_samples))
        alphas = reflect_into(walk, self.cfg.alpha_min, 0.0)
        if n_samples:
            self.alpha = float(alphas[-1])
        return alphas

    def process(self, samples: np.ndarray) -> np.ndarray:
        alphas = self.alpha_trajectory(len(samples))
        out, self.x_prev, self.y_prev = first_order_allpass_filter(samples, alphas, self.x_prev, self.y_prev)
        return out


def first_order_allpass_process(cfg: AllpassBaselineConfig, input: AudioBuffer) -> AudioBuffer:
    samples = _mono(input, "first_order_allpass_process")
    return input.with_samples(FirstOrderAllpassProcessor(cfg).process(samples))


@dataclass
class SmoothedAbsConfig:
    """Memoryless half-wave-like nonlinearity; opposite signs per channel."""

    alpha_abs: float = 0.3
    channel_sign: int = 1
    smoothing_delta: float = 1e-3

    def validate(self) -> None:
        if not 0.0 <= self.alpha_abs < 1.0:
            raise ConfigurationError(f"alpha_abs must lie in [0, 1), got {self.alpha_abs}")
        if self.channel_sign not in (1, -1):
            raise ConfigurationError(f"channel_sign must be +1 or -1, got {self.channel_sign}")
        if self.smoothing_delta < 0.0:
            raise ConfigurationError(f"smoothing_delta must be >= 0, got {self.smoothing_delta}")


def smoothed_abs(x: np.ndarray, delta: float) -> np.ndarray:
    """sqrt(x^2 + delta^2) - delta; zero at x = 0, tends to |x|."""
    return np.hypot(x, delta) - delta


class SmoothedAbsProcessor:
    def __init__(self, cfg: SmoothedAbsConfig):
        cfg.validate()
        self.cfg = cfg

    def process(self, samples: np.ndarray) -> np.ndarray:
        x = np.asarray(samples, dtype=np.float64)
        return x + self.cfg.channel_sign * self.cfg.alpha_abs * smoothed_abs(x, self.cfg.smoothing_delta)


def smoothed_abs_process(cfg: SmoothedAbsConfig, input: AudioBuffer) -> AudioBuffer:
    processor = SmoothedAbsProcessor(cfg)
    return input.with_samples(processor.process(input.samples))


def general_allpass_coefficients(a: Sequence[float], mode: str = "flat") -> Tuple[np.ndarray, np.ndarray]:
    """Polynomials of the general causal allpass built from a_1..a_N.

    ``literal`` places a_k on z^(k-N) in the numerator as printed; ``flat``
    uses the reversed denominator instead.
    """
    a = np.asarray(a, dtype=np.float64)
    order = len(a)
    if order < 1:
        raise ConfigurationError("general allpass needs at least one coefficient")
    den = np.concatenate(([1.0], -a))
    if mode == "flat":
        return den[::-1].copy(), den
    if mode == "literal":
        num = np.zeros(order + 1)
        num[order - np.arange(1, order + 1)] = a
        num[order] += 1.0
        return num, den
    raise ConfigurationError(f"mode must be one of {FILTER_MODES}, got '{mode}'")


def frequency_response(b: np.ndarray, a: np.ndarray, n_points: int = 4096) -> Tuple[np.ndarray, np.ndarray]:
    """Complex response on ``n_points`` frequencies in [0, pi)."""
    return signal.freqz(b, a, worN=n_points)


def frequency_response_table(b: np.ndarray, a: np.ndarray, n_points: int = 4096) -> pd.DataFrame:
    omega, response = frequency_response(b, a, n_points)
    return pd.DataFrame({
        "omega": omega,
        "magnitude": np.abs(response),
        "phase": np.angle(response),
    })
