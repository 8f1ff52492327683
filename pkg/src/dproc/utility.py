"""Stakeholder utilities over the unique traces of a process.

A stakeholder's utility is ``ln(1 + good) / ln(1 + total)`` where ``good``
counts the unique traces satisfying the stakeholder's preference and
``total`` counts all unique traces of the same process.
"""

import logging
import math
from typing import Any, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from dproc.data_objects import StakeholderSystem, TraceSet
from dproc.errors import DegenerateProcess
from dproc.templates import Preference, eval_preference

LOG = logging.getLogger(__name__)


class UtilityVector(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    values: tuple[float, ...] = Field(alias="utilities")
    # Absent when the utilities were supplied directly rather than counted.
    good_counts: Optional[tuple[int, ...]] = None
    total_count: Optional[int] = Field(default=None, alias="trace_count")

    @model_validator(mode="after")
    def _check_consistency(self) -> "UtilityVector":
        for value in self.values:
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"utility {value} outside [0, 1]")
        if (self.good_counts is None) != (self.total_count is None):
            raise ValueError("good_counts and total_count must be given together")
        if self.good_counts is not None:
            if len(self.good_counts) != len(self.values):
                raise ValueError("one good count per utility is required")
            # for large totals g < t can round up to 1.0
            for good, value in zip(self.good_counts, self.values):
                if (good == 0) != (value == 0.0) or (good == self.total_count and value != 1.0):
                    raise ValueError(
                        f"utility {value} does not match {good} of {self.total_count} traces"
                    )
        return self

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def from_counts(cls, good_counts: Sequence[int], total: int) -> "UtilityVector":
        return cls(
            values=tuple(utility(good, total) for good in good_counts),
            good_counts=tuple(good_counts),
            total_count=total,
        )


_VECTOR_KEYS = ("utilities", "values", "good_counts", "trace_count", "total_count")


def nest_vector(data: Any) -> Any:
    """Gather flat ``utilities``/``good_counts``/``trace_count`` keys into ``vector``."""
    if isinstance(data, dict) and "vector" not in data:
        if "utilities" in data or "values" in data:
            data = dict(data)
            data["vector"] = {key: data.pop(key) for key in _VECTOR_KEYS if key in data}
    return data


def flatten_vector(data: dict[str, Any]) -> dict[str, Any]:
    """Inverse of ``nest_vector`` for a serialized model."""
    vector = data.pop("vector")
    return {**data, **vector}


def utility(good: int, total: int) -> float:
    if total < 0 or good < 0:
        raise ValueError(f"trace counts must be non-negative, got {good} of {total}")
    if total == 0:
        raise DegenerateProcess()
    if good > total:
        raise ValueError(f"{good} good traces exceed the {total} unique traces")
    return math.log1p(good) / math.log1p(total)


def utility_vector_from_counts(good_counts: Sequence[int], total: int) -> UtilityVector:
    return UtilityVector.from_counts(good_counts, total)


def good_traces(traces: TraceSet, preference: Preference) -> TraceSet:
    return traces.filter(lambda trace: eval_preference(preference, trace))


def utility_vector(system: StakeholderSystem, traces: TraceSet) -> UtilityVector:
    if len(traces) == 0:
        raise DegenerateProcess(f"process {system.label} has no unique traces")
    counts = [len(good_traces(traces, g)) for g in system.preferences]
    LOG.info("Good trace counts for %s: %s of %d", system.label, counts, len(traces))
    return UtilityVector.from_counts(counts, len(traces))
