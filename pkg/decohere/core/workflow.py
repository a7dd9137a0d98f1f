"""Dependency-ordered execution of pipeline stages."""

import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

from .component import Component, ComponentResult, ComponentStatus
from .errors import ConfigurationError, DecohereError


class WorkflowStatus(Enum):
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


@dataclass
class WorkflowResult:
    status: WorkflowStatus
    component_results: Dict[str, ComponentResult] = field(default_factory=dict)
    execution_time: float = 0.0
    errors: List[str] = field(default_factory=list)
    error: Optional[BaseException] = None

    def output(self, component: str) -> Any:
        return self.component_results[component].data

    def raise_for_status(self) -> None:
        """Re-raise the exception that stopped the run, if any."""
        if self.status != WorkflowStatus.FAILED:
            return
        if self.error is not None:
            raise self.error
        raise DecohereError("; ".join(self.errors) or "workflow failed")


class Workflow:
    """A DAG of components executed in topological order.

    Execution stops at the first failed component. Stages without
    dependencies receive ``initial_inputs``.
    """

    def __init__(self, name: str):
        self.name = name
        self.components: Dict[str, Component] = {}
        self.execution_order: List[str] = []
        self.status = WorkflowStatus.PENDING
        self.logger = logging.getLogger(f"decohere.workflow.{name}")

    def add_component(self, component: Component) -> None:
        if component.name in self.components:
            raise ConfigurationError(f"Component '{component.name}' already exists in workflow '{self.name}'")
        self.components[component.name] = component
        self._update_execution_order()

    def remove_component(self, name: str) -> None:
        if name not in self.components:
            raise ConfigurationError(f"Component '{name}' not found in workflow '{self.name}'")
        del self.components[name]
        for component in self.components.values():
            if name in component.dependencies:
                component.dependencies.remove(name)
            if name in component.outputs:
                component.outputs.remove(name)
        self._update_execution_order()

    def connect_components(self, source: str, target: str) -> None:
        """Feed the output of ``source`` into ``target``."""
        for name in (source, target):
            if name not in self.components:
                raise ConfigurationError(f"Component '{name}' not found in workflow '{self.name}'")
        self.components[target].add_dependency(source)
        self.components[source].add_output(target)
        try:
            self._update_execution_order()
        except ConfigurationError:
            self.components[target].dependencies.remove(source)
            self.components[source].outputs.remove(target)
            raise

    def chain(self, *components: Component) -> "Workflow":
        """Add components and connect them one after another."""
        for component in components:
            self.add_component(component)
        for upstream, downstream in zip(components, components[1:]):
            self.connect_components(upstream.name, downstream.name)
        return self

    def _update_execution_order(self) -> None:
        done, in_progress, order = set(), set(), []

        def visit(node: str) -> None:
            if node in in_progress:
                raise ConfigurationError(f"Circular dependency detected involving '{node}'")
            if node in done:
                return
            in_progress.add(node)
            for dependency in self.components[node].get_dependencies():
                if dependency in self.components:
                    visit(dependency)
            in_progress.discard(node)
            done.add(node)
            order.append(node)

        for name in self.components:
            visit(name)
        self.execution_order = order

    async def execute(self, initial_inputs: Optional[Dict[str, Any]] = None) -> WorkflowResult:
        started = time.perf_counter()
        self.status = WorkflowStatus.RUNNING
        self.logger.info(f"Starting workflow '{self.name}'")
        result = WorkflowResult(status=WorkflowStatus.RUNNING)
        outputs: Dict[str, Any] = {}

        for name in self.execution_order:
            component = self.components[name]
            component.status = ComponentStatus.RUNNING
            inputs = self._prepare_component_inputs(component, outputs, initial_inputs or {})
            component_started = time.perf_counter()
            try:
                component_result = await component.execute(inputs)
            except Exception as exc:
                component_result = ComponentResult.failure(exc, component_started)
            component.status = component_result.status
            result.component_results[name] = component_result

            if component_result.status == ComponentStatus.FAILED:
                self.logger.error(f"Component '{name}' failed: {'; '.join(component_result.errors)}")
                result.errors.extend(component_result.errors)
                result.error = component_result.error
                result.status = self.status = WorkflowStatus.FAILED
                break
            outputs[name] = component_result.data
            self.logger.debug(f"Component '{name}' finished in {component_result.execution_time:.3f}s")

        if result.status == WorkflowStatus.RUNNING:
            result.status = self.status = WorkflowStatus.COMPLETED
            self.logger.info(f"Workflow '{self.name}' completed")
        result.execution_time = time.perf_counter() - started
        return result

    def _prepare_component_inputs(
        self, component: Component, available: Dict[str, Any], initial: Dict[str, Any]
    ) -> Dict[str, Any]:
        dependencies = component.get_dependencies()
        if not dependencies:
            return dict(initial)
        return {dep: available[dep] for dep in dependencies if dep in available}

    def validate(self) -> List[str]:
        errors = []
        for name, component in self.components.items():
            for dependency in component.get_dependencies():
                if dependency not in self.components:
                    errors.append(f"Component '{name}' depends on missing component '{dependency}'")
        for name, component in self.components.items():
            if not component.validate_config():
                errors.append(f"Component '{name}' has invalid configuration")
        return errors

    def get_component_graph(self) -> Dict[str, List[str]]:
        return {name: component.get_dependencies() for name, component in self.components.items()}

    def __str__(self) -> str:
        return f"Workflow(name='{self.name}', components={len(self.components)}, status={self.status.value})"
