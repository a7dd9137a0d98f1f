"""Base class for pipeline stages."""

import asyncio
import logging
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional

from .errors import ConfigurationError


class ComponentStatus(Enum):
    """Status of a stage execution."""
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"
    SKIPPED = "skipped"


@dataclass
class ComponentResult:
    """Outcome of one stage.

    ``error`` keeps the original exception of a failed stage so callers
    can re-raise it with its own type (and CLI exit code).
    """
    status: ComponentStatus
    data: Any
    metadata: Dict[str, Any] = field(default_factory=dict)
    errors: List[str] = field(default_factory=list)
    execution_time: float = 0.0
    error: Optional[BaseException] = None

    @classmethod
    def failure(cls, exc: BaseException, started: float, **metadata) -> "ComponentResult":
        return cls(
            status=ComponentStatus.FAILED,
            data=None,
            metadata=metadata,
            errors=[f"{type(exc).__name__}: {exc}"],
            execution_time=time.perf_counter() - started,
            error=exc,
        )


class Component(ABC):
    """A named stage with upstream dependencies.

    Numeric work is blocking, so subclasses hand it to :meth:`run_blocking`,
    which runs it in a worker thread. An optional shared semaphore bounds
    how many stages compute at once.
    """

    def __init__(self, name: str, config: Optional[Dict[str, Any]] = None,
                 limiter: Optional[asyncio.Semaphore] = None):
        self.name = name
        self.config = config or {}
        self.status = ComponentStatus.PENDING
        self.dependencies: List[str] = []
        self.outputs: List[str] = []
        self.limiter = limiter
        self.logger = logging.getLogger(f"decohere.component.{name}")

    @abstractmethod
    async def execute(self, inputs: Dict[str, Any]) -> ComponentResult:
        """Run the stage on the outputs of its dependencies."""

    def validate_config(self) -> bool:
        """True when :meth:`check_config` raises nothing."""
        try:
            self.check_config()
        except ConfigurationError as exc:
            self.logger.warning(f"Invalid configuration: {exc}")
            return False
        return True

    def check_config(self) -> None:
        """Raise ConfigurationError for an unusable configuration."""

    async def run_blocking(self, fn: Callable[..., Any], *args, **kwargs) -> Any:
        if self.limiter is None:
            return await asyncio.to_thread(fn, *args, **kwargs)
        async with self.limiter:
            return await asyncio.to_thread(fn, *args, **kwargs)

    def single_input(self, inputs: Dict[str, Any]) -> Any:
        """The output of the only dependency."""
        if len(inputs) != 1:
            raise ConfigurationError(
                f"Component '{self.name}' expects exactly one upstream output, got {sorted(inputs)}"
            )
        return next(iter(inputs.values()))

    def add_dependency(self, dependency: str) -> None:
        if dependency not in self.dependencies:
            self.dependencies.append(dependency)

    def add_output(self, output: str) -> None:
        if output not in self.outputs:
            self.outputs.append(output)

    def get_dependencies(self) -> List[str]:
        return self.dependencies.copy()

    def get_outputs(self) -> List[str]:
        return self.outputs.copy()

    def __str__(self) -> str:
        return f"{self.__class__.__name__}(name='{self.name}', status={self.status.value})"
