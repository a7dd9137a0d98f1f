"""Stereo echo-cancellation simulation.

One remote source is picked up by two microphones, optionally
decorrelated, played through near-end loudspeakers into the local
microphones, and cancelled by one multichannel MDF filter per microphone.
The normalised misalignment of the filters against the true echo paths is
sampled at a fixed cadence.
"""

import asyncio
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from ..analysis import MisalignmentTrace, misalignment_db
from ..audio import AudioBuffer, channel_seed
from ..core.errors import ConfigurationError, DivergenceError
from ..dsp.chain import DecorrelatorConfig
from .mdf import MdfConfig, MdfFilter
from .material import MaterialSpec
from .rooms import ImpulseResponse, convolve_trimmed, synth_room_ir

logger = logging.getLogger(__name__)

SIM_MODES = ("stereo", "mono")

# Seed offsets for the synthetic rooms, fanned out from the run seed.
REMOTE_IR_SEED_BASE = 10
NEAR_IR_SEED_BASE = 100
NEAR_NOISE_SEED = 1
REMOTE_NOISE_SEED = 2


@dataclass
class EchoSimConfig:
    """One simulation variant.

    With ``mode="mono"`` the source is played directly by a single
    loudspeaker and no remote room or decorrelator is used.
    """

    sample_rate: int = 16000
    mode: str = "stereo"
    n_mics: int = 2
    remote_ir_length: int = 256
    remote_rt60_ms: float = 30.0
    near_ir_length: int = 1024
    near_rt60_ms: float = 60.0
    snr_db: float = 40.0
    remote_snr_db: Optional[float] = None
    decorrelator: Optional[DecorrelatorConfig] = None
    aec: MdfConfig = field(default_factory=MdfConfig)
    duration_s: float = 10.0
    misalignment_interval_s: float = 0.5
    divergence_margin_db: float = 20.0
    coherence_fft_size: int = 4096
    seed: int = 0
    label: str = ""
    remote_irs: Optional[List[ImpulseResponse]] = None
    near_irs: Optional[List[List[ImpulseResponse]]] = None

    @property
    def n_speakers(self) -> int:
        return 1 if self.mode == "mono" else 2

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.mode == "mono":
            return "mono"
        return self.decorrelator.label if self.decorrelator else "none"

    def validate(self) -> None:
        if self.mode not in SIM_MODES:
            raise ConfigurationError(f"mode must be one of {SIM_MODES}, got '{self.mode}'")
        if not 8000 <= self.sample_rate <= 48000:
            raise ConfigurationError(f"sample_rate must lie in [8000, 48000], got {self.sample_rate}")
        if not np.isfinite(self.snr_db):
            raise ConfigurationError(f"snr_db must be finite, got {self.snr_db}")
        if self.n_mics < 1:
            raise ConfigurationError(f"n_mics must be >= 1, got {self.n_mics}")
        if self.duration_s <= 0 or self.misalignment_interval_s <= 0:
            raise ConfigurationError("duration_s and misalignment_interval_s must be positive")
        if self.remote_rt60_ms <= 0 or self.near_rt60_ms <= 0:
            raise ConfigurationError("reverberation times must be positive")
        if self.divergence_margin_db <= 0:
            raise ConfigurationError(f"divergence_margin_db must be positive, got {self.divergence_margin_db}")
        self.aec.validate()
        if self.decorrelator is not None:
            if self.mode == "mono" and (self.decorrelator.method != "none" or self.decorrelator.noise):
                raise ConfigurationError("mono simulations take no decorrelator")
            self.decorrelator.validate()
        for ir in self.build_remote_irs() + [ir for row in self.build_near_irs() for ir in row]:
            if ir.sample_rate != self.sample_rate:
                raise ConfigurationError(
                    f"Impulse response '{ir.label}' is at {ir.sample_rate} Hz, simulation at {self.sample_rate} Hz"
                )

    def build_remote_irs(self) -> List[ImpulseResponse]:
        if self.mode == "mono":
            return []
        if self.remote_irs is not None:
            if len(self.remote_irs) != 2:
                raise ConfigurationError(f"Expected 2 remote impulse responses, got {len(self.remote_irs)}")
            return list(self.remote_irs)
        return [
            synth_room_ir(
                self.remote_rt60_ms, self.remote_ir_length, self.sample_rate,
                seed=channel_seed(self.seed, REMOTE_IR_SEED_BASE + mic), label=f"remote_mic{'LR'[mic]}",
            )
            for mic in range(2)
        ]

    def build_near_irs(self) -> List[List[ImpulseResponse]]:
        """Echo paths indexed ``[mic][speaker]``."""
        if self.near_irs is not None:
            shape = (len(self.near_irs), {len(row) for row in self.near_irs})
            if shape != (self.n_mics, {self.n_speakers}):
                raise ConfigurationError(
                    f"Expected {self.n_mics}x{self.n_speakers} near impulse responses, got {shape}"
                )
            return [list(row) for row in self.near_irs]
        return [
            [
                synth_room_ir(
                    self.near_rt60_ms, self.near_ir_length, self.sample_rate,
                    seed=channel_seed(self.seed, NEAR_IR_SEED_BASE + 10 * mic + spk),
                    label=f"near_mic{mic}_from_spk{spk}",
                )
                for spk in range(self.n_speakers)
            ]
            for mic in range(self.n_mics)
        ]


@dataclass
class NearEndSignals:
    """Microphone signals, each ``(n_samples, n_mics)``."""

    mic: np.ndarray
    echo: np.ndarray
    noise: np.ndarray


def simulate_near_end(
    far: AudioBuffer,
    near_irs: Sequence[Sequence[ImpulseResponse]],
    snr_db: float,
    seed: int = 0,
) -> NearEndSignals:
    """Echo at every microphone plus white noise at exactly ``snr_db``."""
    n = far.n_frames
    rng = np.random.default_rng(seed)
    echo = np.zeros((n, len(near_irs)))
    noise = np.zeros_like(echo)
    for m, row in enumerate(near_irs):
        if len(row) != far.n_channels:
            raise ConfigurationError(f"Mic {m} has {len(row)} echo paths for {far.n_channels} loudspeakers")
        for s, ir in enumerate(row):
            echo[:, m] += convolve_trimmed(far.channel(s), ir.taps)
        white = rng.standard_normal(n)
        echo_power = np.mean(echo[:, m] ** 2)
        if echo_power == 0.0:
            logger.warning(f"Mic {m} receives no echo; adding no background noise")
            continue
        noise[:, m] = white * np.sqrt(echo_power / (np.mean(white ** 2) * 10.0 ** (snr_db / 10.0)))
    return NearEndSignals(mic=echo + noise, echo=echo, noise=noise)


def _concatenated_truth(near_irs: Sequence[Sequence[ImpulseResponse]], length: int) -> np.ndarray:
    return np.concatenate([ir.truncated(length) for row in near_irs for ir in row])


def simulate_near_and_cancel(
    stereo_far: AudioBuffer,
    cfg: EchoSimConfig,
    progress: bool = False,
    on_mic: Optional[Callable[[AudioBuffer], None]] = None,
) -> MisalignmentTrace:
    """Run the echo canceller over the far-end signal and trace misalignment.

    ``stereo_far`` is what the loudspeakers play, already decorrelated.
    ``on_mic`` receives the simulated microphone signals before adaptation.
    Raises DivergenceError when misalignment rises ``divergence_margin_db``
    above its best value or any signal turns non-finite.
    """
    cfg.validate()
    if stereo_far.n_channels != cfg.n_speakers:
        raise ConfigurationError(
            f"{cfg.mode} simulation needs {cfg.n_speakers} loudspeaker channel(s), got {stereo_far.n_channels}"
        )
    if stereo_far.sample_rate != cfg.sample_rate:
        raise ConfigurationError(f"Far signal is at {stereo_far.sample_rate} Hz, simulation at {cfg.sample_rate} Hz")
    if not np.all(np.isfinite(stereo_far.samples)):
        raise DivergenceError("Far-end signal contains non-finite samples")

    near_irs = cfg.build_near_irs()
    signals = simulate_near_end(stereo_far, near_irs, cfg.snr_db, channel_seed(cfg.seed, NEAR_NOISE_SEED))
    if on_mic is not None:
        on_mic(AudioBuffer(signals.mic, cfg.sample_rate))
    filters = [MdfFilter(cfg.aec, stereo_far.n_channels) for _ in near_irs]
    truth = _concatenated_truth(near_irs, cfg.aec.filter_length_taps)

    block = cfg.aec.block_size
    interval = max(1, int(round(cfg.misalignment_interval_s * cfg.sample_rate)))
    n_blocks = stereo_far.n_frames // block
    if n_blocks * block < interval:
        raise ConfigurationError(
            f"{stereo_far.n_frames} samples do not reach the first misalignment checkpoint ({interval})"
        )

    times, etas = [], []
    best = np.inf
    next_checkpoint = interval
    far = stereo_far.samples
    for i in tqdm(range(n_blocks), desc=cfg.name, disable=not progress, leave=False):
        chunk = slice(i * block, (i + 1) * block)
        for m, mdf in enumerate(filters):
            mdf.update(far[chunk], signals.mic[chunk, m])
        done = (i + 1) * block
        if done < next_checkpoint:
            continue
        next_checkpoint += interval * ((done - next_checkpoint) // interval + 1)

        estimate = np.concatenate([mdf.taps().ravel() for mdf in filters])
        eta = misalignment_db(truth, estimate)
        if not np.isfinite(eta):
            raise DivergenceError(f"Misalignment became non-finite at t={done / cfg.sample_rate:.2f}s")
        best = min(best, eta)
        if eta > best + cfg.divergence_margin_db:
            raise DivergenceError(
                f"Misalignment rose to {eta:.1f} dB, {eta - best:.1f} dB above its minimum "
                f"{best:.1f} dB, at t={done / cfg.sample_rate:.2f}s"
            )
        times.append(done / cfg.sample_rate)
        etas.append(eta)

    trace = MisalignmentTrace(np.asarray(etas), np.asarray(times), cfg.aec.filter_length_taps)
    logger.info(f"{cfg.name}: final misalignment {trace.final_db:.2f} dB after {times[-1]:.1f}s")
    return trace


async def run_comparison(
    suite: Sequence[EchoSimConfig],
    material: Sequence[MaterialSpec],
    out_dir: Optional[str] = None,
    max_concurrency: Optional[int] = None,
    progress: bool = False,
    dump_dir: Optional[str] = None,
) -> Dict[str, Any]:
    """Run every variant on every source and build the comparison report.

    Each (variant, source) pair is an independent workflow; pairs run
    concurrently with at most ``max_concurrency`` computing at once. With
    ``out_dir`` the JSON summary and CSV traces are written there. With
    ``dump_dir`` each run also writes its far, decorrelated and microphone
    signals as float32 WAV files.
    Returns the report dictionary.
    """
    from ..components.pipeline import build_report_workflow, build_run_workflow

    if not suite:
        raise ConfigurationError("Comparison suite is empty")
    if not material:
        raise ConfigurationError("Comparison needs at least one source")
    rates = {cfg.sample_rate for cfg in suite}
    if len(rates) != 1:
        raise ConfigurationError(f"All variants must share one sample rate, got {sorted(rates)}")
    names = [cfg.name for cfg in suite]
    if len(set(names)) != len(names):
        raise ConfigurationError(f"Variant names must be unique, got {names}")
    for cfg in suite:
        cfg.validate()

    limiter = asyncio.Semaphore(max_concurrency) if max_concurrency else None
    runs = [
        build_run_workflow(cfg, source, limiter=limiter, progress=progress, dump_dir=dump_dir)
        for cfg in suite
        for source in material
    ]
    logger.info(f"Running {len(runs)} simulation(s): {len(suite)} variant(s) x {len(material)} source(s)")
    results = await asyncio.gather(*(run.execute() for run in runs))
    for result in results:
        result.raise_for_status()

    outputs = {
        run.name: {**result.output("cancel"), "runtime_s": result.execution_time}
        for run, result in zip(runs, results)
    }
    report_result = await build_report_workflow(out_dir).execute({"runs": outputs})
    report_result.raise_for_status()
    return report_result.output("aggregate")["report"]
