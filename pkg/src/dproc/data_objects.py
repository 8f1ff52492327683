import re
from typing import Iterable, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from dproc.errors import DuplicateActivityId, UnknownActivity
from dproc.templates import ConstraintTemplate, Preference, preference_activities

Trace = tuple[int, ...]

EMPTY_TRACE_SYMBOL = "ε"


class Activity(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: int = Field(ge=0)
    label: Optional[str] = Field(default=None, min_length=1)

    @property
    def display_label(self) -> str:
        return self.label if self.label is not None else str(self.id)


class DeclarativeProcess(BaseModel):
    """A process D = (alphabet, constraints); anything not forbidden may happen."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(default="main", pattern=r"^[A-Za-z_][A-Za-z0-9_]*$")
    alphabet: tuple[Activity, ...]
    constraints: tuple[ConstraintTemplate, ...] = ()

    @model_validator(mode="after")
    def _resolve_references(self) -> "DeclarativeProcess":
        seen: set[int] = set()
        for activity in self.alphabet:
            if activity.id in seen:
                raise DuplicateActivityId(activity.id)
            seen.add(activity.id)
        for constraint in self.constraints:
            for activity_id in constraint.args:
                if activity_id not in seen:
                    raise UnknownActivity(activity_id, where=str(constraint))
        return self

    @property
    def activity_ids(self) -> tuple[int, ...]:
        return tuple(sorted(a.id for a in self.alphabet))

    def label_of(self, activity_id: int) -> str:
        for activity in self.alphabet:
            if activity.id == activity_id:
                return activity.display_label
        raise UnknownActivity(activity_id)

    def without(self, activity_id: int, constraint: ConstraintTemplate) -> "DeclarativeProcess":
        """The process with one activity and one constraint removed."""
        remaining = list(self.constraints)
        remaining.remove(constraint)
        return DeclarativeProcess(
            name=self.name,
            alphabet=tuple(a for a in self.alphabet if a.id != activity_id),
            constraints=tuple(remaining),
        )


def make_process(
    alphabet: Iterable[Activity | int],
    constraints: Iterable[ConstraintTemplate] = (),
    name: str = "main",
) -> DeclarativeProcess:
    activities = [a if isinstance(a, Activity) else Activity(id=a) for a in alphabet]
    activities.sort(key=lambda a: a.id)
    return DeclarativeProcess(name=name, alphabet=tuple(activities), constraints=tuple(constraints))


class StakeholderSystem(BaseModel):
    """A process together with stakeholder labels and one preference per stakeholder."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    process: DeclarativeProcess
    stakeholders: tuple[str, ...]
    preferences: tuple[Preference, ...]

    @model_validator(mode="after")
    def _check_preferences(self) -> "StakeholderSystem":
        if not self.stakeholders:
            raise ValueError("a stakeholder system needs at least one stakeholder")
        if len(self.stakeholders) != len(self.preferences):
            raise ValueError(
                f"{len(self.stakeholders)} stakeholders but {len(self.preferences)} preferences"
            )
        known = set(self.process.activity_ids)
        for label, preference in zip(self.stakeholders, self.preferences):
            for activity_id in sorted(preference_activities(preference)):
                if activity_id not in known:
                    raise UnknownActivity(activity_id, where=f"preference of {label}")
        return self

    @property
    def label(self) -> str:
        return self.process.name


def trace_key(trace: Trace) -> tuple[int, Trace]:
    return (len(trace), trace)


class TraceSet(BaseModel):
    """Duplicate-free traces in canonical order: by length, then lexicographic."""

    model_config = ConfigDict(frozen=True)

    traces: tuple[Trace, ...] = ()

    @model_validator(mode="after")
    def _check_canonical(self) -> "TraceSet":
        keys = [trace_key(t) for t in self.traces]
        if any(a >= b for a, b in zip(keys, keys[1:])):
            raise ValueError("traces must be unique and canonically ordered; use canonicalize()")
        return self

    def __len__(self) -> int:
        return len(self.traces)

    def __contains__(self, trace: object) -> bool:
        return isinstance(trace, Sequence) and tuple(trace) in self.traces

    def filter(self, keep) -> "TraceSet":
        # a sub-sequence of a canonical sequence is canonical
        return TraceSet.model_construct(traces=tuple(t for t in self.traces if keep(t)))


def canonicalize(traces: Iterable[Sequence[int]]) -> TraceSet:
    unique = {tuple(t) for t in traces}
    return TraceSet.model_construct(traces=tuple(sorted(unique, key=trace_key)))


def is_unique_trace(trace: Sequence[int]) -> bool:
    return len(set(trace)) == len(trace)


def format_trace(trace: Sequence[int]) -> str:
    if not trace:
        return EMPTY_TRACE_SYMBOL
    return "(" + ", ".join(str(a) for a in trace) + ")"


_TRACE_BODY = r"\s*(?:\d+(?:\s*,\s*\d+)*\s*,?)?\s*"
_TRACE_LITERAL = re.compile(rf"\((?:{_TRACE_BODY})\)|{_TRACE_BODY}")


def parse_trace(text: str) -> Trace:
    """Parse ``(1,2,4)``, ``1,2,4``, ``()`` or ``ε``."""
    stripped = text.strip()
    if stripped in (EMPTY_TRACE_SYMBOL, "", "()"):
        return ()
    if not _TRACE_LITERAL.fullmatch(stripped):
        raise ValueError(f"not a trace literal: {text!r}")
    return tuple(int(part) for part in re.findall(r"\d+", stripped))
