"""
decohere: stereo channel decorrelation for acoustic echo cancellation.

Modules:
- dsp.windows: Vorbis window and the zero-delay overlap-add engine
- dsp.decorrelators: shaped comb-allpass (SCAL) and baseline decorrelators
- dsp.psynoise: psychoacoustically masked noise injection
- analysis: inter-channel coherence and filter misalignment
- sim: synthetic rooms, the MDF echo canceller and comparison runs
"""

__version__ = "0.1.0"

from .audio import AudioBuffer, channel_seed
from .core.component import Component
from .core.workflow import Workflow
from .dsp.chain import DecorrelatorConfig, process_channels
from .dsp.decorrelators import ScalConfig, scal_process
from .dsp.psynoise import NoiseInjectorConfig, inject_noise
from .analysis import coherence, misalignment_db
from .sim.aecsim import EchoSimConfig, run_comparison

__all__ = [
    "AudioBuffer",
    "channel_seed",
    "Component",
    "Workflow",
    "DecorrelatorConfig",
    "process_channels",
    "ScalConfig",
    "scal_process",
    "NoiseInjectorConfig",
    "inject_noise",
    "coherence",
    "misalignment_db",
    "EchoSimConfig",
    "run_comparison",
]
