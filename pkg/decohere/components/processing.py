"""Signal-processing stages: remote-room pickup and decorrelation."""

import time
from pathlib import Path
from typing import Any, Dict, Optional

from ..analysis import max_blocks, stereo_coherence
from ..core.component import Component, ComponentResult, ComponentStatus
from ..core.errors import ConfigurationError
from ..dsp.chain import process_channels
from ..sim.aecsim import REMOTE_NOISE_SEED, EchoSimConfig
from ..sim.rooms import simulate_remote
from ..audio import AudioBuffer, channel_seed
from ..io.wavfile import WavFile, write_wav
from .output import slug


class SimulationStage(Component):
    """Base for stages driven by one EchoSimConfig.

    With ``dump_dir`` set, intermediate signals are written there as
    ``<run>__<kind>.wav`` in float32.
    """

    def __init__(self, name: str, config: Optional[Dict[str, Any]] = None, **kwargs):
        super().__init__(name, config, **kwargs)
        self.sim: Optional[EchoSimConfig] = self.config.get("sim")
        self.run_name: str = self.config.get("run_name", name)
        dump_dir = self.config.get("dump_dir")
        self.dump_dir: Optional[Path] = Path(dump_dir) if dump_dir else None

    def dump(self, kind: str, buffer: AudioBuffer) -> Optional[Path]:
        if self.dump_dir is None:
            return None
        path = write_wav(self.dump_dir / f"{slug(self.run_name)}__{kind}.wav", WavFile(buffer, "float32"))
        self.logger.debug(f"Wrote {kind} signal to {path}")
        return path

    def check_config(self) -> None:
        if self.sim is None:
            raise ConfigurationError(f"Component '{self.name}' has no simulation config")
        self.sim.validate()


class RemoteRoomStage(SimulationStage):
    """Mono source to the signals the loudspeakers will play.

    The source is cut to the simulated duration. Stereo runs pick it up
    with two remote microphones; mono runs pass it through unchanged.
    """

    async def execute(self, inputs: Dict[str, Any]) -> ComponentResult:
        started = time.perf_counter()
        try:
            self.check_config()
            source = self.single_input(inputs)
            limit = int(round(self.sim.duration_s * self.sim.sample_rate))
            if source.n_frames > limit:
                source = source.with_samples(source.samples[:limit])
            if self.sim.mode == "mono":
                far = source
            else:
                far = await self.run_blocking(
                    simulate_remote,
                    source,
                    self.sim.build_remote_irs(),
                    channel_seed(self.sim.seed, REMOTE_NOISE_SEED),
                    self.sim.remote_snr_db,
                )
            await self.run_blocking(self.dump, "far", far)
            return ComponentResult(
                status=ComponentStatus.COMPLETED,
                data=far,
                metadata={"mode": self.sim.mode, "n_channels": far.n_channels},
                execution_time=time.perf_counter() - started,
            )
        except Exception as e:
            return ComponentResult.failure(e, started)


class DecorrelationStage(SimulationStage):
    """Apply the variant's decorrelator and measure inter-channel coherence."""

    def _run(self, far):
        fft_size = self.sim.coherence_fft_size
        if self.sim.decorrelator is not None:
            far = process_channels(self.sim.decorrelator, far)
        self.dump("decorrelated", far)
        spectrum = None
        if far.n_channels == 2 and max_blocks(far.n_frames, fft_size) >= 2:
            spectrum = stereo_coherence(far, fft_size)
        return far, spectrum

    async def execute(self, inputs: Dict[str, Any]) -> ComponentResult:
        started = time.perf_counter()
        try:
            self.check_config()
            far, spectrum = await self.run_blocking(self._run, self.single_input(inputs))
            return ComponentResult(
                status=ComponentStatus.COMPLETED,
                data={"far": far, "coherence": spectrum},
                metadata={
                    "decorrelator": self.sim.decorrelator.label if self.sim.decorrelator else "none",
                    "coherence_blocks": spectrum.n_blocks_averaged if spectrum else 0,
                },
                execution_time=time.perf_counter() - started,
            )
        except Exception as e:
            return ComponentResult.failure(e, started)
