"""Tests for the stage workflow engine."""

import asyncio
import time
from typing import Any, Dict

import pytest

from decohere.core.component import Component, ComponentResult, ComponentStatus
from decohere.core.errors import ConfigurationError, DivergenceError
from decohere.core.workflow import Workflow, WorkflowStatus


class MockComponent(Component):
    """Stage that records its inputs and returns a fixed value."""

    def __init__(self, name: str, output: Any = None, fail_with: Exception = None, config=None, **kwargs):
        super().__init__(name, config, **kwargs)
        self.output = output if output is not None else f"{name}-out"
        self.fail_with = fail_with
        self.executed = False
        self.received: Dict[str, Any] = {}

    async def execute(self, inputs: Dict[str, Any]) -> ComponentResult:
        started = time.perf_counter()
        self.executed = True
        self.received = inputs
        if self.fail_with is not None:
            return ComponentResult.failure(self.fail_with, started)
        return ComponentResult(status=ComponentStatus.COMPLETED, data=self.output)


class RaisingComponent(Component):
    async def execute(self, inputs):
        raise RuntimeError("stage blew up")


class SlowRaisingComponent(Component):
    async def execute(self, inputs):
        await asyncio.sleep(0.05)
        raise RuntimeError("stage gave up")


class TestWorkflow:
    """Test cases for Workflow."""

    def test_add_component(self):
        """Components are stored by name."""
        workflow = Workflow("test")
        workflow.add_component(MockComponent("a"))
        assert "a" in workflow.components
        assert workflow.execution_order == ["a"]

    def test_duplicate_component_rejected(self):
        workflow = Workflow("test")
        workflow.add_component(MockComponent("a"))
        with pytest.raises(ConfigurationError, match="already exists"):
            workflow.add_component(MockComponent("a"))

    def test_connect_components(self):
        """Connecting sets dependencies, outputs and execution order."""
        workflow = Workflow("test")
        workflow.add_component(MockComponent("b"))
        workflow.add_component(MockComponent("a"))
        workflow.connect_components("a", "b")

        assert workflow.components["b"].get_dependencies() == ["a"]
        assert workflow.components["a"].get_outputs() == ["b"]
        assert workflow.execution_order.index("a") < workflow.execution_order.index("b")

    def test_connect_nonexistent_components(self):
        workflow = Workflow("test")
        workflow.add_component(MockComponent("a"))
        with pytest.raises(ValueError, match="not found"):
            workflow.connect_components("a", "missing")

    def test_circular_dependency_detection(self):
        """A cycle is rejected and the offending edge rolled back."""
        workflow = Workflow("test")
        workflow.chain(MockComponent("a"), MockComponent("b"), MockComponent("c"))

        with pytest.raises(ConfigurationError, match="Circular dependency"):
            workflow.connect_components("c", "a")
        assert "c" not in workflow.components["a"].get_dependencies()
        assert workflow.execution_order == ["a", "b", "c"]

    def test_remove_component(self):
        workflow = Workflow("test")
        workflow.chain(MockComponent("a"), MockComponent("b"))
        workflow.remove_component("a")
        assert workflow.components["b"].get_dependencies() == []
        with pytest.raises(ConfigurationError):
            workflow.remove_component("a")

    @pytest.mark.asyncio
    async def test_simple_workflow_execution(self):
        """Outputs flow downstream keyed by the producer's name."""
        a, b = MockComponent("a", output=1), MockComponent("b", output=2)
        workflow = Workflow("test").chain(a, b)

        result = await workflow.execute({"seed": 0})

        assert result.status == WorkflowStatus.COMPLETED
        assert a.received == {"seed": 0}
        assert b.received == {"a": 1}
        assert result.output("b") == 2
        assert result.execution_time >= 0.0

    @pytest.mark.asyncio
    async def test_workflow_with_failure(self):
        """Execution stops at the first failed stage and keeps its exception."""
        error = DivergenceError("misalignment exploded")
        a = MockComponent("a")
        b = MockComponent("b", fail_with=error)
        c = MockComponent("c")
        workflow = Workflow("test").chain(a, b, c)

        result = await workflow.execute()

        assert result.status == WorkflowStatus.FAILED
        assert not c.executed
        assert result.error is error
        assert any("misalignment exploded" in e for e in result.errors)
        with pytest.raises(DivergenceError):
            result.raise_for_status()

    @pytest.mark.asyncio
    async def test_raising_stage_becomes_failure(self):
        workflow = Workflow("test")
        workflow.add_component(RaisingComponent("boom"))
        result = await workflow.execute()
        assert result.status == WorkflowStatus.FAILED
        assert isinstance(result.error, RuntimeError)

    @pytest.mark.asyncio
    async def test_raising_stage_time_covers_its_run(self):
        workflow = Workflow("test")
        workflow.add_component(SlowRaisingComponent("slow"))
        result = await workflow.execute()
        assert result.status == WorkflowStatus.FAILED
        assert result.component_results["slow"].execution_time >= 0.04

    @pytest.mark.asyncio
    async def test_run_blocking_respects_limiter(self):
        """Blocking work runs in a thread, bounded by the shared semaphore."""
        limiter = asyncio.Semaphore(1)
        component = MockComponent("a", limiter=limiter)
        assert await component.run_blocking(sum, [1, 2, 3]) == 6
        assert not limiter.locked()

    def test_workflow_validation(self):
        workflow = Workflow("test")
        workflow.add_component(MockComponent("a"))
        assert workflow.validate() == []

        workflow.components["a"].add_dependency("ghost")
        errors = workflow.validate()
        assert len(errors) == 1
        assert "ghost" in errors[0]

    def test_get_component_graph(self):
        workflow = Workflow("test").chain(MockComponent("a"), MockComponent("b"), MockComponent("c"))
        assert workflow.get_component_graph() == {"a": [], "b": ["a"], "c": ["b"]}

    def test_complex_execution_order(self):
        """A diamond executes its join after both branches."""
        workflow = Workflow("test")
        for name in "abcd":
            workflow.add_component(MockComponent(name))
        workflow.connect_components("a", "b")
        workflow.connect_components("a", "c")
        workflow.connect_components("b", "d")
        workflow.connect_components("c", "d")

        order = workflow.execution_order
        assert order[0] == "a"
        assert order[-1] == "d"
        assert set(order[1:3]) == {"b", "c"}

    def test_single_input(self):
        component = MockComponent("a")
        assert component.single_input({"x": 5}) == 5
        with pytest.raises(ConfigurationError, match="exactly one"):
            component.single_input({"x": 1, "y": 2})
