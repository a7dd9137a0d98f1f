"""Workflow builders for comparison runs."""

import asyncio
from typing import Optional

from ..core.workflow import Workflow
from ..sim.aecsim import EchoSimConfig
from ..sim.material import MaterialSpec
from .aggregation import ComparisonAggregation
from .cancellation import EchoCancellationStage
from .ingestion import MaterialIngestion
from .output import ReportOutput
from .processing import DecorrelationStage, RemoteRoomStage


def build_run_workflow(
    cfg: EchoSimConfig,
    material: MaterialSpec,
    limiter: Optional[asyncio.Semaphore] = None,
    progress: bool = False,
    dump_dir: Optional[str] = None,
) -> Workflow:
    """material -> remote -> decorrelate -> cancel, for one (variant, source)."""
    name = f"{cfg.name}/{material.name}"
    sim = {"sim": cfg, "run_name": name, "dump_dir": dump_dir}
    return Workflow(name).chain(
        MaterialIngestion("material", {"material": material, "sample_rate": cfg.sample_rate}, limiter=limiter),
        RemoteRoomStage("remote", sim, limiter=limiter),
        DecorrelationStage("decorrelate", sim, limiter=limiter),
        EchoCancellationStage(
            "cancel", {**sim, "source_name": material.name, "progress": progress}, limiter=limiter
        ),
    )


def build_report_workflow(out_dir: Optional[str] = None) -> Workflow:
    """aggregate -> output; the aggregate stage takes ``{"runs": ...}`` as input."""
    return Workflow("report").chain(
        ComparisonAggregation("aggregate"),
        ReportOutput("output", {"out_dir": out_dir}),
    )
