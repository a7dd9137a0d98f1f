"""Report output."""

import re
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

from ..core.component import Component, ComponentResult, ComponentStatus
from ..io.reports import write_csv, write_json


def slug(key: str) -> str:
    """File-name-safe form of a run key such as ``scal+noise/speech``."""
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", key.replace("/", "__").replace("+", "_plus_"))


class ReportOutput(Component):
    """Write ``report.json`` plus per-run CSV traces and coherence spectra.

    Files are written one at a time, each atomically. Without an
    ``out_dir`` the stage is skipped.
    """

    def __init__(self, name: str, config: Optional[Dict[str, Any]] = None, **kwargs):
        super().__init__(name, config, **kwargs)
        out_dir = self.config.get("out_dir")
        self.out_dir: Optional[Path] = Path(out_dir) if out_dir else None

    def _write(self, bundle: Dict[str, Any]) -> List[str]:
        written = [str(write_json(self.out_dir / "report.json", bundle["report"]))]
        for key, trace in bundle["traces"].items():
            written.append(str(write_csv(self.out_dir / "traces" / f"{slug(key)}.csv", trace.to_frame())))
        for key, spectrum in bundle["spectra"].items():
            written.append(str(write_csv(self.out_dir / "coherence" / f"{slug(key)}.csv", spectrum.to_frame())))
        return written

    async def execute(self, inputs: Dict[str, Any]) -> ComponentResult:
        started = time.perf_counter()
        if self.out_dir is None:
            return ComponentResult(status=ComponentStatus.SKIPPED, data={"written": []},
                                   execution_time=time.perf_counter() - started)
        try:
            written = self._write(self.single_input(inputs))
            return ComponentResult(
                status=ComponentStatus.COMPLETED,
                data={"written": written},
                metadata={"out_dir": str(self.out_dir), "n_files": len(written)},
                execution_time=time.perf_counter() - started,
            )
        except Exception as e:
            return ComponentResult.failure(e, started, out_dir=str(self.out_dir))
