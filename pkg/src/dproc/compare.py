"""Choosing between processes by distance to the ideal utility vector.

Every non-empty subset of stakeholders gets its own optimum: the system whose
utilities, restricted to that subset, lie closest (Euclidean) to all ones.
The optima are then tallied over four families of subsets to judge how robust
the overall answer is.
"""

import asyncio
import logging
from collections import Counter
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__
from itertools import combinations
from typing import Any, Optional, Sequence

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    SerializerFunctionWrapHandler,
    model_serializer,
    model_validator,
)

from dproc.config import AnalysisSettings
from dproc.data_objects import StakeholderSystem
from dproc.enumeration import StrategyChoice, aunique_traces
from dproc.errors import EmptySubset, MismatchedStakeholders, TooManyStakeholders
from dproc.templates import format_preference
from dproc.utility import UtilityVector, flatten_vector, nest_vector, utility_vector

LOG = logging.getLogger(__name__)

# Bit k set means stakeholder k (0-based) is in the subset.
SubsetMask = int


def mask_of(indices: Sequence[int]) -> SubsetMask:
    mask = 0
    for index in indices:
        mask |= 1 << index
    return mask


def subset_indices(mask: SubsetMask) -> tuple[int, ...]:
    return tuple(k for k in range(mask.bit_length()) if mask >> k & 1)


def _values(vector: UtilityVector | Sequence[float]) -> tuple[float, ...]:
    return vector.values if isinstance(vector, UtilityVector) else tuple(vector)


def h_distance(utilities: Sequence[float]) -> float:
    """Euclidean distance from ``utilities`` to the all-ones vector."""
    return float(np.linalg.norm(1.0 - np.asarray(utilities, dtype=float)))


def reduced(vector: UtilityVector | Sequence[float], mask: SubsetMask) -> tuple[float, ...]:
    if mask == 0:
        raise EmptySubset()
    values = _values(vector)
    if mask >> len(values):
        raise ValueError(f"subset {bin(mask)} names stakeholders beyond {len(values)}")
    return tuple(values[k] for k in subset_indices(mask))


def optimal_for_subset(
    vectors: Sequence[UtilityVector | Sequence[float]],
    mask: SubsetMask,
    tolerance: float = 1e-12,
) -> tuple[int, tuple[int, ...]]:
    """Index of the closest system and every index within ``tolerance`` of it."""
    if not vectors:
        raise ValueError("at least one system is required")
    distances = [h_distance(reduced(v, mask)) for v in vectors]
    best = min(distances)
    ties = tuple(j for j, h in enumerate(distances) if h - best <= tolerance)
    return ties[0], ties


class SubsetRow(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    subset: tuple[str, ...]
    mask: int
    h: tuple[float, ...]
    winner: str
    winner_index: int
    tie: bool
    ties: tuple[str, ...]


def subset_scan(
    vectors: Sequence[UtilityVector | Sequence[float]],
    labels: Sequence[str],
    stakeholders: Sequence[str],
    tolerance: float = 1e-12,
    max_stakeholders: int = 20,
) -> list[SubsetRow]:
    """One row per non-empty stakeholder subset, by size and then lexicographically."""
    m = len(stakeholders)
    if m > max_stakeholders:
        raise TooManyStakeholders(m, max_stakeholders)
    rows = []
    for size in range(1, m + 1):
        for indices in combinations(range(m), size):
            mask = mask_of(indices)
            winner, ties = optimal_for_subset(vectors, mask, tolerance)
            rows.append(
                SubsetRow(
                    subset=tuple(stakeholders[k] for k in indices),
                    mask=mask,
                    h=tuple(h_distance(reduced(v, mask)) for v in vectors),
                    winner=labels[winner],
                    winner_index=winner,
                    tie=len(ties) > 1,
                    ties=tuple(labels[j] for j in ties),
                )
            )
    return rows


class GuidanceNote(StrEnum):
    # the full set and the almost-full sets agree: choose that process
    ALL_EQ_ALMOSTALL = "ALL_EQ_ALMOSTALL"
    # they disagree: the almost-all answer is only an alternative
    DIVERGENT = "DIVERGENT"
    # ... and the more-than-half family backs the almost-all answer
    ALMOSTALL_EQ_MORETHANHALF = "ALMOSTALL_EQ_MORETHANHALF"
    # the answer depends on which stakeholders turn out to be active
    UNKNOWN_ACTIVE_SET = "UNKNOWN_ACTIVE_SET"


class StratumResult(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    winner: str
    winner_index: int
    freq_num: int
    freq_den: int
    tie: bool
    tied: tuple[str, ...] = ()


class RobustnessSummary(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    all: StratumResult
    almostall: StratumResult
    morethanhalf: StratumResult
    any: StratumResult
    notes: tuple[GuidanceNote, ...] = ()


def _stratum(rows: Sequence[SubsetRow], labels: Sequence[str]) -> StratumResult:
    tally = Counter(row.winner_index for row in rows)
    top = max(tally.values())
    leaders = sorted(j for j, count in tally.items() if count == top)
    return StratumResult(
        winner=labels[leaders[0]],
        winner_index=leaders[0],
        freq_num=top,
        freq_den=len(rows),
        tie=len(leaders) > 1,
        tied=tuple(labels[j] for j in leaders) if len(leaders) > 1 else (),
    )


def robustness_summary(
    rows: Sequence[SubsetRow], m: int, labels: Optional[Sequence[str]] = None
) -> RobustnessSummary:
    if not rows:
        raise ValueError("robustness needs at least one subset row")
    if labels is None:
        by_index = {row.winner_index: row.winner for row in rows}
        labels = [by_index.get(j, str(j)) for j in range(max(by_index) + 1)]

    def size(row: SubsetRow) -> int:
        return len(row.subset)

    summary = dict(
        all=_stratum([r for r in rows if size(r) == m], labels),
        almostall=_stratum([r for r in rows if size(r) >= m - 1], labels),
        morethanhalf=_stratum([r for r in rows if 2 * size(r) >= m], labels),
        any=_stratum(rows, labels),
    )

    notes = []
    if summary["all"].winner_index == summary["almostall"].winner_index:
        notes.append(GuidanceNote.ALL_EQ_ALMOSTALL)
    else:
        notes.append(GuidanceNote.DIVERGENT)
        if summary["almostall"].winner_index == summary["morethanhalf"].winner_index:
            notes.append(GuidanceNote.ALMOSTALL_EQ_MORETHANHALF)
    if summary["any"].winner_index != summary["all"].winner_index:
        notes.append(GuidanceNote.UNKNOWN_ACTIVE_SET)
    return RobustnessSummary(**summary, notes=tuple(notes))


class SystemScore(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    label: str
    vector: UtilityVector
    h: float
    # preference text per stakeholder
    preferences: tuple[str, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def _nest_vector(cls, data: Any) -> Any:
        return nest_vector(data)

    @model_serializer(mode="wrap")
    def _flatten_vector(self, handler: SerializerFunctionWrapHandler) -> dict[str, Any]:
        return flatten_vector(handler(self))


class ComparisonReport(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    stakeholders: tuple[str, ...]
    systems: tuple[SystemScore, ...]
    rows: tuple[SubsetRow, ...]
    summary: RobustnessSummary
    tolerance: float = 1e-12

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.systems)

    @property
    def winner(self) -> str:
        return self.summary.all.winner


def compare_vectors(
    labels: Sequence[str],
    vectors: Sequence[UtilityVector],
    stakeholders: Sequence[str],
    settings: Optional[AnalysisSettings] = None,
    preferences: Optional[Sequence[Sequence[str]]] = None,
) -> ComparisonReport:
    settings = settings or AnalysisSettings()
    if not vectors:
        raise ValueError("at least one system is required")
    if len(labels) != len(vectors):
        raise ValueError("one label per utility vector is required")
    if len(set(labels)) != len(labels):
        raise ValueError(f"system labels must be distinct: {list(labels)}")
    m = len(stakeholders)
    for label, vector in zip(labels, vectors):
        if len(vector) != m:
            raise MismatchedStakeholders(
                f"{label} has {len(vector)} utilities but there are {m} stakeholders"
            )

    rows = subset_scan(
        vectors, labels, stakeholders, settings.tie_tolerance, settings.max_stakeholders
    )
    summary = robustness_summary(rows, m, labels)
    systems = tuple(
        SystemScore(
            label=label,
            vector=vector,
            h=h_distance(vector.values),
            preferences=tuple(preferences[j]) if preferences else (),
        )
        for j, (label, vector) in enumerate(zip(labels, vectors))
    )
    LOG.info(
        "Compared %d systems over %d subsets; overall winner %s",
        len(systems),
        len(rows),
        summary.all.winner,
    )
    return ComparisonReport(
        stakeholders=tuple(stakeholders),
        systems=systems,
        rows=tuple(rows),
        summary=summary,
        tolerance=settings.tie_tolerance,
    )


def unique_labels(labels: Sequence[str]) -> list[str]:
    """Suffix repeated labels with _2, _3, ... in order of appearance."""
    seen: set[str] = set()
    result = []
    for label in labels:
        candidate, n = label, 1
        while candidate in seen:
            n += 1
            candidate = f"{label}_{n}"
        seen.add(candidate)
        result.append(candidate)
    return result


def _check_stakeholders(systems: Sequence[StakeholderSystem]) -> tuple[str, ...]:
    reference = systems[0].stakeholders
    for system in systems[1:]:
        if system.stakeholders != reference:
            raise MismatchedStakeholders(
                f"{system.label} declares stakeholders {list(system.stakeholders)}"
                f" but {systems[0].label} declares {list(reference)}"
            )
    return reference


async def acompare(
    systems: Sequence[StakeholderSystem],
    precomputed_vectors: Optional[Sequence[UtilityVector]] = None,
    strategy: StrategyChoice = "auto",
    settings: Optional[AnalysisSettings] = None,
) -> ComparisonReport:
    settings = settings or AnalysisSettings()
    if not systems:
        raise ValueError("at least one system is required")
    stakeholders = _check_stakeholders(systems)

    if precomputed_vectors is not None:
        vectors = list(precomputed_vectors)
    else:
        results = await asyncio.gather(
            *(aunique_traces(s.process, strategy, settings) for s in systems)
        )
        vectors = [utility_vector(s, r.traces) for s, r in zip(systems, results)]

    return compare_vectors(
        unique_labels([s.label for s in systems]),
        vectors,
        stakeholders,
        settings,
        preferences=[[format_preference(g) for g in s.preferences] for s in systems],
    )


def compare(
    systems: Sequence[StakeholderSystem],
    precomputed_vectors: Optional[Sequence[UtilityVector]] = None,
    strategy: StrategyChoice = "auto",
    settings: Optional[AnalysisSettings] = None,
) -> ComparisonReport:
    return asyncio.run(acompare(systems, precomputed_vectors, strategy, settings))
