"""Power-complementary windows and the zero-delay weighted overlap-add engine.

Frames are ``L`` samples long with a hop of ``L/2``. Because the per-frame
transform is causal, the first half of a frame can be produced as soon as
its first hop of input is available; the second half is produced one hop
later, when the frame is complete. Output therefore never lags input.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Union

import numpy as np

from ..audio import AudioBuffer
from ..core.errors import ConfigurationError, ContractViolationError

logger = logging.getLogger(__name__)

FrameTransform = Callable[[np.ndarray], np.ndarray]

SUPPORTED_WINDOWS = ("vorbis",)


@dataclass
class WindowSpec:
    """Window length and shape; the hop is always half the length."""

    length: int = 1024
    kind: str = "vorbis"

    def __post_init__(self):
        self.validate()

    @property
    def hop(self) -> int:
        return self.length // 2

    def validate(self) -> None:
        if self.kind not in SUPPORTED_WINDOWS:
            raise ConfigurationError(f"Unknown window kind '{self.kind}', expected one of {SUPPORTED_WINDOWS}")
        if int(self.length) != self.length or self.length < 4 or self.length % 2:
            raise ConfigurationError(f"Window length must be an even integer >= 4, got {self.length}")
        self.length = int(self.length)


def make_window(spec: WindowSpec) -> np.ndarray:
    """Vorbis power-complementary window, w(n)^2 + w(n + L/2)^2 = 1."""
    spec.validate()
    n = np.arange(spec.length, dtype=np.float64)
    inner = np.sin(np.pi * (n + 0.5) / spec.length)
    return np.sin(0.5 * np.pi * inner * inner)


@dataclass
class WolaState:
    """Streaming state for one mono signal.

    ``overlap_tail`` holds the input hop that opened the still-unfinished
    frame; ``pending`` is the transform bound to that frame.
    """

    window: WindowSpec
    overlap_tail: np.ndarray = field(default=None)
    frame_index: int = 0
    pending: Optional[FrameTransform] = None
    coefficients: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.overlap_tail is None:
            self.overlap_tail = np.zeros(self.window.hop)
        if self.coefficients is None:
            self.coefficients = make_window(self.window)


def bind_frame_transform(transform: Any) -> FrameTransform:
    """Resolve the callable used for the next frame.

    Objects exposing ``new_frame()`` get one call per frame so that
    randomised per-frame parameters are drawn once and reused for both
    halves of that frame. Plain callables are used as they are.
    """
    new_frame = getattr(transform, "new_frame", None)
    if callable(new_frame):
        return new_frame()
    if not callable(transform):
        raise ContractViolationError(f"Frame transform {transform!r} is not callable")
    return transform


def _apply(transform: FrameTransform, frame: np.ndarray) -> np.ndarray:
    result = np.asarray(transform(frame), dtype=np.float64)
    if result.shape != frame.shape:
        raise ContractViolationError(
            f"Frame transform returned shape {result.shape}, expected {frame.shape}"
        )
    return result


def _process_hop(state: WolaState, block: np.ndarray, transform: Any) -> np.ndarray:
    w = state.coefficients
    hop = state.window.hop
    out = np.zeros(hop)

    if state.pending is not None:
        frame = np.concatenate((state.overlap_tail, block)) * w
        out += w[hop:] * _apply(state.pending, frame)[hop:]

    bound = bind_frame_transform(transform)
    head = np.zeros(state.window.length)
    head[:hop] = block * w[:hop]
    out += w[:hop] * _apply(bound, head)[:hop]

    state.overlap_tail = block.copy()
    state.pending = bound
    state.frame_index += 1
    return out


def wola_process(
    state: WolaState,
    input: Union[AudioBuffer, np.ndarray],
    per_window_transform: Any,
) -> Union[AudioBuffer, np.ndarray]:
    """Run a per-window transform over a mono stream with 50% overlap-add.

    The input length must be a multiple of the hop. The call may be repeated
    on consecutive chunks of the same stream; ``state`` carries the open
    frame between calls. Returns the same type it was given.
    """
    if isinstance(input, AudioBuffer):
        if input.n_channels != 1:
            raise ConfigurationError(f"wola_process is mono, got {input.n_channels} channels")
        samples = input.channel(0)
    else:
        samples = np.asarray(input, dtype=np.float64)
        if samples.ndim != 1:
            raise ConfigurationError("wola_process expects a 1-D signal")

    hop = state.window.hop
    if len(samples) % hop:
        raise ConfigurationError(f"Input length {len(samples)} is not a multiple of the hop ({hop})")

    output = np.empty_like(samples)
    for start in range(0, len(samples), hop):
        output[start:start + hop] = _process_hop(state, samples[start:start + hop], per_window_transform)

    if isinstance(input, AudioBuffer):
        return input.with_samples(output)
    return output


def wola_stream(state: WolaState, samples: np.ndarray, per_window_transform: Any) -> np.ndarray:
    """Like :func:`wola_process` but accepts any length.

    The tail is zero-padded to a hop multiple and the result trimmed back,
    so this is meant for whole signals rather than chunked streaming.
    """
    hop = state.window.hop
    remainder = len(samples) % hop
    if remainder:
        logger.debug(f"Padding {hop - remainder} samples to reach a hop multiple")
        samples = np.concatenate((samples, np.zeros(hop - remainder)))
        return wola_process(state, samples, per_window_transform)[:-(hop - remainder)]
    return wola_process(state, samples, per_window_transform)
