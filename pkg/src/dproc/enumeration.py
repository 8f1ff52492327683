"""Unique-trace enumeration.

``BruteForceEnumerator`` checks every arrangement of every subset of the
alphabet. ``LeafPeelingEnumerator`` first removes activities that hang off a
single resp/prec/succ constraint, brute-forces the smaller core and then puts
the removed activities back one at a time.
"""

import asyncio
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from itertools import combinations, permutations
from typing import Iterable, Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict

from dproc.config import AnalysisSettings
from dproc.data_objects import DeclarativeProcess, Trace, TraceSet, canonicalize
from dproc.enumeration_base import AbstractTraceEnumerator, EnumerationResult, LeafStep
from dproc.errors import AlphabetTooLarge
from dproc.templates import (
    LEAF_KINDS,
    ConstraintTemplate,
    TemplateKind,
    permanently_violated,
    satisfies,
)

LOG = logging.getLogger(__name__)

StrategyChoice = Literal["brute", "leaf", "auto"]


def enumeration_workload(n: int) -> int:
    """Number of arrangements of all subsets of an ``n``-element alphabet."""
    if n < 0:
        raise ValueError(f"alphabet size must be non-negative, got {n}")
    total, term = 0, 1
    for k in range(n + 1):
        total += term
        term *= n - k
    return total


class SatisfactionCounter:
    """``satisfies`` against a fixed constraint list, counting every call."""

    def __init__(self, constraints: Sequence[ConstraintTemplate]) -> None:
        self.constraints = tuple(constraints)
        self.calls = 0

    def __call__(self, trace: Sequence[int]) -> bool:
        self.calls += 1
        return satisfies(trace, self.constraints)


def subset_units(activity_ids: Sequence[int]) -> list[tuple[int, ...]]:
    """All subsets of the alphabet: by size, then lexicographic."""
    ordered = sorted(activity_ids)
    return [
        subset for size in range(len(ordered) + 1) for subset in combinations(ordered, size)
    ]


def _arrangements_pruned(
    subset: tuple[int, ...],
    constraints: tuple[ConstraintTemplate, ...],
    check: SatisfactionCounter,
) -> list[Trace]:
    found: list[Trace] = []

    def extend(prefix: Trace, remaining: tuple[int, ...]) -> None:
        if any(permanently_violated(c, prefix) for c in constraints):
            return
        if not remaining:
            if check(prefix):
                found.append(prefix)
            return
        for index, activity in enumerate(remaining):
            extend(prefix + (activity,), remaining[:index] + remaining[index + 1 :])

    extend((), subset)
    return found


def _enumerate_units(
    constraints: tuple[ConstraintTemplate, ...],
    units: Sequence[tuple[int, ...]],
    prune: bool,
) -> tuple[list[Trace], int]:
    """Worker body: the satisfying arrangements of each subset in ``units``."""
    check = SatisfactionCounter(constraints)
    found: list[Trace] = []
    for subset in units:
        if prune:
            found.extend(_arrangements_pruned(subset, constraints, check))
        else:
            found.extend(p for p in permutations(subset) if check(p))
    return found, check.calls


class BruteForceEnumerator(AbstractTraceEnumerator):
    def __init__(self, settings: Optional[AnalysisSettings] = None):
        self.settings = settings or AnalysisSettings()

    def _check_size(self, process: DeclarativeProcess) -> None:
        size = len(process.alphabet)
        if size > self.settings.max_alphabet and not self.settings.allow_large_alphabet:
            raise AlphabetTooLarge(size, self.settings.max_alphabet)

    async def aenumerate(self, process: DeclarativeProcess) -> EnumerationResult:
        self._check_size(process)
        units = subset_units(process.activity_ids)
        constraints = process.constraints
        prune = self.settings.prune_prefixes
        workers = min(self.settings.workers, len(units))

        if workers <= 1:
            traces, calls = _enumerate_units(constraints, units, prune)
        else:
            loop = asyncio.get_running_loop()
            with ProcessPoolExecutor(max_workers=workers) as pool:
                partitions = [units[w::workers] for w in range(workers)]
                for w, partition in enumerate(partitions):
                    LOG.debug("Worker %d takes %d subsets", w, len(partition))
                outcomes = await asyncio.gather(
                    *(
                        loop.run_in_executor(pool, _enumerate_units, constraints, part, prune)
                        for part in partitions
                    )
                )
            traces = [trace for found, _ in outcomes for trace in found]
            calls = sum(count for _, count in outcomes)

        result = EnumerationResult(
            traces=canonicalize(traces), satisfies_calls=calls, strategy="brute", pruned=prune
        )
        LOG.info(
            "Brute force over %d activities: %d traces, %d satisfies calls",
            len(process.alphabet),
            result.trace_count,
            calls,
        )
        return result


def _next_leaf(process: DeclarativeProcess) -> Optional[LeafStep]:
    occurrences = Counter(a for c in process.constraints for a in c.args)
    for constraint in process.constraints:
        if constraint.kind not in LEAF_KINDS:
            continue
        anchor, leaf = constraint.args
        if leaf != anchor and occurrences[leaf] == 1:
            return LeafStep(constraint=constraint, leaf_activity=leaf, anchor_activity=anchor)
    return None


def find_leaves(process: DeclarativeProcess) -> list[LeafStep]:
    """Greedy peel order; each step applies to the process left by the previous ones."""
    steps: list[LeafStep] = []
    current = process
    while (step := _next_leaf(current)) is not None:
        steps.append(step)
        current = current.without(step.leaf_activity, step.constraint)
    return steps


def _insert_after(trace: Trace, activity: int, start: int) -> Iterable[Trace]:
    for position in range(start, len(trace) + 1):
        yield trace[:position] + (activity,) + trace[position:]


def _position(trace: Trace, activity: int) -> int:
    return trace.index(activity) if activity in trace else -1


def _counter_for(
    const_check: Sequence[ConstraintTemplate], counter: Optional[SatisfactionCounter]
) -> SatisfactionCounter:
    return counter if counter is not None else SatisfactionCounter(const_check)


def reinsert_resp(
    base: TraceSet,
    step: LeafStep,
    const_check: Sequence[ConstraintTemplate],
    counter: Optional[SatisfactionCounter] = None,
) -> TraceSet:
    check = _counter_for(const_check, counter)
    i, j = step.anchor_activity, step.leaf_activity
    out: list[Trace] = []
    for trace in base.traces:
        at = _position(trace, i)
        if at >= 0:
            out.extend(mu for mu in _insert_after(trace, j, at + 1) if check(mu))
        else:
            # resp(i, j) says nothing about j when i is absent
            out.append(trace)
            out.extend(mu for mu in _insert_after(trace, j, 0) if check(mu))
    return canonicalize(out)


def reinsert_prec(
    base: TraceSet,
    step: LeafStep,
    const_check: Sequence[ConstraintTemplate],
    counter: Optional[SatisfactionCounter] = None,
) -> TraceSet:
    check = _counter_for(const_check, counter)
    i, j = step.anchor_activity, step.leaf_activity
    out: list[Trace] = []
    for trace in base.traces:
        out.append(trace)
        at = _position(trace, i)
        if at >= 0:
            out.extend(mu for mu in _insert_after(trace, j, at + 1) if check(mu))
    return canonicalize(out)


def reinsert_succ(
    base: TraceSet,
    step: LeafStep,
    const_check: Sequence[ConstraintTemplate],
    counter: Optional[SatisfactionCounter] = None,
) -> TraceSet:
    check = _counter_for(const_check, counter)
    i, j = step.anchor_activity, step.leaf_activity
    out: list[Trace] = []
    for trace in base.traces:
        at = _position(trace, i)
        if at >= 0:
            out.extend(mu for mu in _insert_after(trace, j, at + 1) if check(mu))
        else:
            out.append(trace)
    return canonicalize(out)


_REINSERT = {
    TemplateKind.RESPONSE: reinsert_resp,
    TemplateKind.PRECEDENCE: reinsert_prec,
    TemplateKind.SUCCESSION: reinsert_succ,
}


class LeafPeelingEnumerator(AbstractTraceEnumerator):
    def __init__(self, settings: Optional[AnalysisSettings] = None):
        self.settings = settings or AnalysisSettings()
        self.core_enumerator = BruteForceEnumerator(self.settings)

    async def aenumerate(self, process: DeclarativeProcess) -> EnumerationResult:
        steps = find_leaves(process)
        stages = [process]
        for step in steps:
            LOG.debug("Peeled %d via %s", step.leaf_activity, step.constraint)
            stages.append(stages[-1].without(step.leaf_activity, step.constraint))

        core = await self.core_enumerator.aenumerate(stages[-1])
        traces = core.traces
        calls = core.satisfies_calls
        for step, stage in zip(reversed(steps), reversed(stages[:-1])):
            check = SatisfactionCounter(stage.constraints)
            traces = _REINSERT[step.constraint.kind](traces, step, stage.constraints, check)
            calls += check.calls
            LOG.debug(
                "Re-inserted %d: %d traces, %d satisfies calls",
                step.leaf_activity,
                len(traces),
                check.calls,
            )

        LOG.info(
            "Leaf peeling (%d leaves, core of %d activities): %d traces, %d satisfies calls",
            len(steps),
            len(stages[-1].alphabet),
            len(traces),
            calls,
        )
        return EnumerationResult(
            traces=traces,
            satisfies_calls=calls,
            strategy="leaf",
            peel_sequence=tuple(steps),
            pruned=core.pruned,
        )


def make_enumerator(
    process: DeclarativeProcess,
    strategy: StrategyChoice = "auto",
    settings: Optional[AnalysisSettings] = None,
) -> AbstractTraceEnumerator:
    match strategy:
        case "brute":
            return BruteForceEnumerator(settings)
        case "leaf":
            return LeafPeelingEnumerator(settings)
        case "auto":
            if find_leaves(process):
                return LeafPeelingEnumerator(settings)
            return BruteForceEnumerator(settings)
        case _:
            raise ValueError(f"Unknown strategy: {strategy}")


async def aunique_traces(
    process: DeclarativeProcess,
    strategy: StrategyChoice = "auto",
    settings: Optional[AnalysisSettings] = None,
) -> EnumerationResult:
    return await make_enumerator(process, strategy, settings).aenumerate(process)


def unique_traces(
    process: DeclarativeProcess,
    strategy: StrategyChoice = "auto",
    settings: Optional[AnalysisSettings] = None,
) -> EnumerationResult:
    return asyncio.run(aunique_traces(process, strategy, settings))


def unique_traces_brute(
    process: DeclarativeProcess, settings: Optional[AnalysisSettings] = None
) -> EnumerationResult:
    return unique_traces(process, "brute", settings)


class TraceStatistics(BaseModel):
    model_config = ConfigDict(frozen=True)

    trace_count: int
    # trace length -> number of traces of that length
    length_histogram: dict[int, int]
    # activity id -> number of traces it occurs in
    activity_counts: dict[int, int]


def trace_statistics(traces: TraceSet, activity_ids: Sequence[int] = ()) -> TraceStatistics:
    lengths = Counter(len(t) for t in traces.traces)
    occurrences = Counter(a for t in traces.traces for a in set(t))
    activities = sorted(set(activity_ids) | set(occurrences))
    return TraceStatistics(
        trace_count=len(traces),
        length_histogram={length: lengths[length] for length in sorted(lengths)},
        activity_counts={a: occurrences[a] for a in activities},
    )
