from abc import ABC, abstractmethod
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from dproc.data_objects import DeclarativeProcess, TraceSet
from dproc.templates import ConstraintTemplate

Strategy = Literal["brute", "leaf"]


class LeafStep(BaseModel):
    """One peel: ``leaf_activity`` occurs only as the second argument of ``constraint``."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    constraint: ConstraintTemplate
    leaf_activity: int = Field(alias="leaf")
    anchor_activity: int = Field(alias="anchor")


class EnumerationResult(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    traces: TraceSet
    satisfies_calls: int = Field(default=0, ge=0)
    strategy: Strategy = "brute"
    # Peels in the order they were removed; re-insertion runs in reverse.
    peel_sequence: tuple[LeafStep, ...] = ()
    pruned: bool = False

    @property
    def trace_count(self) -> int:
        return len(self.traces)


class AbstractTraceEnumerator(ABC):
    @abstractmethod
    async def aenumerate(self, process: DeclarativeProcess) -> EnumerationResult:
        """Compute the unique traces of ``process`` in canonical order."""
        raise NotImplementedError
