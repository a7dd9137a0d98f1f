"""Source material ingestion."""

import time
from typing import Any, Dict, Optional

from ..core.component import Component, ComponentResult, ComponentStatus
from ..core.errors import ConfigurationError
from ..sim.material import MaterialSpec, load_material


class MaterialIngestion(Component):
    """Produce the mono source of one run, generated or read from WAV."""

    def __init__(self, name: str, config: Optional[Dict[str, Any]] = None, **kwargs):
        super().__init__(name, config, **kwargs)
        self.material: Optional[MaterialSpec] = self.config.get("material")
        self.sample_rate: int = self.config.get("sample_rate", 16000)

    def check_config(self) -> None:
        if self.material is None:
            raise ConfigurationError(f"Component '{self.name}' has no material")
        self.material.validate()

    async def execute(self, inputs: Dict[str, Any]) -> ComponentResult:
        started = time.perf_counter()
        try:
            self.check_config()
            source = await self.run_blocking(load_material, self.material, self.sample_rate)
            return ComponentResult(
                status=ComponentStatus.COMPLETED,
                data=source,
                metadata={
                    "material": self.material.name,
                    "kind": self.material.kind,
                    "n_samples": source.n_frames,
                },
                execution_time=time.perf_counter() - started,
            )
        except Exception as e:
            return ComponentResult.failure(e, started, material=getattr(self.material, "name", None))
