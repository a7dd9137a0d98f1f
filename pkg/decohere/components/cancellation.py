"""Echo cancellation stage."""

import time
from typing import Any, Dict, Optional

from ..core.component import ComponentResult, ComponentStatus
from ..sim.aecsim import simulate_near_and_cancel
from .processing import SimulationStage


class EchoCancellationStage(SimulationStage):
    """Play the far signal into the near room and adapt the echo canceller.

    Emits the misalignment trace together with the coherence measured
    upstream, ready for aggregation.
    """

    def __init__(self, name: str, config: Optional[Dict[str, Any]] = None, **kwargs):
        super().__init__(name, config, **kwargs)
        self.source_name: str = self.config.get("source_name", "")
        self.progress: bool = self.config.get("progress", False)

    async def execute(self, inputs: Dict[str, Any]) -> ComponentResult:
        started = time.perf_counter()
        try:
            self.check_config()
            upstream = self.single_input(inputs)
            trace = await self.run_blocking(
                simulate_near_and_cancel,
                upstream["far"],
                self.sim,
                self.progress,
                lambda mic: self.dump("mic", mic),
            )
            elapsed = time.perf_counter() - started
            return ComponentResult(
                status=ComponentStatus.COMPLETED,
                data={
                    "variant": self.sim.name,
                    "source": self.source_name,
                    "trace": trace,
                    "coherence": upstream["coherence"],
                    "runtime_s": elapsed,
                },
                metadata={"final_misalignment_db": trace.final_db},
                execution_time=elapsed,
            )
        except Exception as e:
            return ComponentResult.failure(e, started, variant=getattr(self.sim, "name", None))
