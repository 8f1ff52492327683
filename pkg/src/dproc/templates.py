"""Declare constraint templates and stakeholder preferences.

Each template has two meanings that must agree on every trace: its LTLf
expansion (``expand_template``) and a direct evaluation over the event
sequence (``eval_template``), which is what enumeration calls in its hot loop.
"""

from dataclasses import dataclass
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__
from itertools import combinations
from typing import Any, Iterable, Sequence

from pydantic import BaseModel, ConfigDict, model_validator

from dproc.errors import ArityError
from dproc.formulas import (
    And,
    Atom,
    Finally,
    Formula,
    Globally,
    Iff,
    Implies,
    Next,
    Not,
    Or,
    WeakUntil,
    conjunction,
    disjunction,
)


class TemplateKind(StrEnum):
    PARTICIPATION = "participation"
    INITIAL = "initial"
    RESPONSE = "resp"
    CHAIN_RESPONSE = "chainresp"
    PRECEDENCE = "prec"
    SUCCESSION = "succ"
    NOT_SUCCESSION = "notsucc"
    NOT_COEXISTENCE = "notcoexist"
    NOT_COEXISTENCE_WEAK = "notcoexist_weak"
    OPTIONAL_RESPONSE = "optresp"
    CHOICE = "choice"


UNARY_KINDS = frozenset({TemplateKind.PARTICIPATION, TemplateKind.INITIAL})
BINARY_KINDS = frozenset(
    {
        TemplateKind.RESPONSE,
        TemplateKind.CHAIN_RESPONSE,
        TemplateKind.PRECEDENCE,
        TemplateKind.SUCCESSION,
        TemplateKind.NOT_SUCCESSION,
        TemplateKind.NOT_COEXISTENCE,
        TemplateKind.NOT_COEXISTENCE_WEAK,
        TemplateKind.OPTIONAL_RESPONSE,
    }
)
# Templates whose second argument may be peeled off as a leaf.
LEAF_KINDS = frozenset(
    {TemplateKind.RESPONSE, TemplateKind.PRECEDENCE, TemplateKind.SUCCESSION}
)

# Surface names accepted by the DSL.
TEMPLATE_ALIASES = {
    "init": TemplateKind.INITIAL,
    "response": TemplateKind.RESPONSE,
    "precedence": TemplateKind.PRECEDENCE,
    "succession": TemplateKind.SUCCESSION,
    "chainresponse": TemplateKind.CHAIN_RESPONSE,
    "choice1": TemplateKind.CHOICE,
}


class ConstraintTemplate(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: TemplateKind
    args: tuple[int, ...]
    # Minimum number of distinct members for ``choice``; 1 for every other kind.
    min_count: int = 1

    @model_validator(mode="before")
    @classmethod
    def _sort_choice_members(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("kind") == TemplateKind.CHOICE and data.get("args"):
            data = {**data, "args": tuple(sorted(data["args"]))}
        return data

    @model_validator(mode="after")
    def _check_arity(self) -> "ConstraintTemplate":
        if self.kind in UNARY_KINDS and len(self.args) != 1:
            raise ArityError(f"{self.kind.value} takes 1 activity, got {len(self.args)}")
        if self.kind in BINARY_KINDS and len(self.args) != 2:
            raise ArityError(f"{self.kind.value} takes 2 activities, got {len(self.args)}")
        if self.kind is TemplateKind.CHOICE:
            if not self.args:
                raise ArityError("choice needs a non-empty activity set")
            if len(set(self.args)) != len(self.args):
                raise ArityError("choice set lists an activity twice")
            if not 1 <= self.min_count <= len(self.args):
                raise ArityError(
                    f"choice count {self.min_count} outside 1..{len(self.args)}"
                )
        elif self.min_count != 1:
            raise ArityError(f"{self.kind.value} takes no count")
        return self

    @property
    def activities(self) -> frozenset[int]:
        return frozenset(self.args)

    def __str__(self) -> str:
        return format_constraint(self)


def participation(a: int) -> ConstraintTemplate:
    return ConstraintTemplate(kind=TemplateKind.PARTICIPATION, args=(a,))


def initial(a: int) -> ConstraintTemplate:
    return ConstraintTemplate(kind=TemplateKind.INITIAL, args=(a,))


def resp(a: int, b: int) -> ConstraintTemplate:
    return ConstraintTemplate(kind=TemplateKind.RESPONSE, args=(a, b))


def chainresp(a: int, b: int) -> ConstraintTemplate:
    return ConstraintTemplate(kind=TemplateKind.CHAIN_RESPONSE, args=(a, b))


def prec(a: int, b: int) -> ConstraintTemplate:
    return ConstraintTemplate(kind=TemplateKind.PRECEDENCE, args=(a, b))


def succ(a: int, b: int) -> ConstraintTemplate:
    return ConstraintTemplate(kind=TemplateKind.SUCCESSION, args=(a, b))


def notsucc(a: int, b: int) -> ConstraintTemplate:
    return ConstraintTemplate(kind=TemplateKind.NOT_SUCCESSION, args=(a, b))


def notcoexist(a: int, b: int) -> ConstraintTemplate:
    return ConstraintTemplate(kind=TemplateKind.NOT_COEXISTENCE, args=(a, b))


def notcoexist_weak(a: int, b: int) -> ConstraintTemplate:
    return ConstraintTemplate(kind=TemplateKind.NOT_COEXISTENCE_WEAK, args=(a, b))


def optresp(a: int, b: int) -> ConstraintTemplate:
    return ConstraintTemplate(kind=TemplateKind.OPTIONAL_RESPONSE, args=(a, b))


def choice(members: Iterable[int], min_count: int = 1) -> ConstraintTemplate:
    return ConstraintTemplate(
        kind=TemplateKind.CHOICE, args=tuple(members), min_count=min_count
    )


def format_constraint(constraint: ConstraintTemplate) -> str:
    if constraint.kind is TemplateKind.CHOICE:
        members = "{" + ", ".join(str(a) for a in constraint.args) + "}"
        if constraint.min_count == 1:
            return f"choice1({members})"
        return f"choice({constraint.min_count}, {members})"
    return f"{constraint.kind.value}({', '.join(str(a) for a in constraint.args)})"


def expand_template(constraint: ConstraintTemplate) -> Formula:
    kind, args = constraint.kind, constraint.args
    if kind is TemplateKind.PARTICIPATION:
        return Finally(Atom(args[0]))
    if kind is TemplateKind.INITIAL:
        return Atom(args[0])
    if kind is TemplateKind.CHOICE:
        return disjunction(
            *(
                conjunction(*(Finally(Atom(a)) for a in group))
                for group in combinations(args, constraint.min_count)
            )
        )

    a, b = Atom(args[0]), Atom(args[1])
    match kind:
        case TemplateKind.RESPONSE:
            return Globally(Implies(a, Finally(b)))
        case TemplateKind.CHAIN_RESPONSE:
            return Globally(Implies(a, Next(b)))
        case TemplateKind.PRECEDENCE | TemplateKind.OPTIONAL_RESPONSE:
            return WeakUntil(Not(b), a)
        case TemplateKind.SUCCESSION:
            return And(Globally(Implies(a, Finally(b))), WeakUntil(Not(b), a))
        case TemplateKind.NOT_SUCCESSION:
            return Globally(Implies(a, Not(Finally(b))))
        case TemplateKind.NOT_COEXISTENCE:
            return Not(Iff(Finally(a), Finally(b)))
        case TemplateKind.NOT_COEXISTENCE_WEAK:
            return Not(And(Finally(a), Finally(b)))
    raise TypeError(f"Unsupported template kind: {kind}")


def _first(trace: Sequence[int], activity: int) -> int:
    for index, event in enumerate(trace):
        if event == activity:
            return index
    return -1


def _last(trace: Sequence[int], activity: int) -> int:
    for index in range(len(trace) - 1, -1, -1):
        if trace[index] == activity:
            return index
    return -1


def _responded(trace: Sequence[int], a: int, b: int) -> bool:
    last_a = _last(trace, a)
    return last_a < 0 or _last(trace, b) >= last_a


def _preceded(trace: Sequence[int], a: int, b: int) -> bool:
    first_b = _first(trace, b)
    if first_b < 0:
        return True
    first_a = _first(trace, a)
    return 0 <= first_a <= first_b


def _chained(trace: Sequence[int], a: int, b: int) -> bool:
    n = len(trace)
    return all(
        index + 1 < n and trace[index + 1] == b
        for index, event in enumerate(trace)
        if event == a
    )


def eval_template(constraint: ConstraintTemplate, trace: Sequence[int]) -> bool:
    kind, args = constraint.kind, constraint.args
    match kind:
        case TemplateKind.PARTICIPATION:
            return args[0] in trace
        case TemplateKind.INITIAL:
            return len(trace) > 0 and trace[0] == args[0]
        case TemplateKind.CHOICE:
            present = set(trace)
            return sum(1 for a in args if a in present) >= constraint.min_count
        case TemplateKind.RESPONSE:
            return _responded(trace, args[0], args[1])
        case TemplateKind.CHAIN_RESPONSE:
            return _chained(trace, args[0], args[1])
        case TemplateKind.PRECEDENCE | TemplateKind.OPTIONAL_RESPONSE:
            return _preceded(trace, args[0], args[1])
        case TemplateKind.SUCCESSION:
            return _responded(trace, args[0], args[1]) and _preceded(trace, args[0], args[1])
        case TemplateKind.NOT_SUCCESSION:
            first_a = _first(trace, args[0])
            return first_a < 0 or _last(trace, args[1]) < first_a
        case TemplateKind.NOT_COEXISTENCE:
            return (args[0] in trace) != (args[1] in trace)
        case TemplateKind.NOT_COEXISTENCE_WEAK:
            return not (args[0] in trace and args[1] in trace)
    raise TypeError(f"Unsupported template kind: {kind}")


def satisfies(trace: Sequence[int], constraints: Iterable[ConstraintTemplate]) -> bool:
    return all(eval_template(c, trace) for c in constraints)


def permanently_violated(constraint: ConstraintTemplate, prefix: Sequence[int]) -> bool:
    """True when no extension of ``prefix`` can satisfy ``constraint``."""
    kind, args = constraint.kind, constraint.args
    match kind:
        case TemplateKind.INITIAL:
            return len(prefix) > 0 and prefix[0] != args[0]
        case TemplateKind.PRECEDENCE | TemplateKind.OPTIONAL_RESPONSE | TemplateKind.SUCCESSION:
            return not _preceded(prefix, args[0], args[1])
        case TemplateKind.NOT_SUCCESSION | TemplateKind.NOT_COEXISTENCE_WEAK:
            return not eval_template(constraint, prefix)
        case TemplateKind.CHAIN_RESPONSE:
            # an ``a`` in last position can still be followed by ``b``
            return any(
                prefix[index] == args[0] and prefix[index + 1] != args[1]
                for index in range(len(prefix) - 1)
            )
    return False


class Preference:
    """Base of a stakeholder preference: boolean combinations of templates."""

    def __str__(self) -> str:
        return format_preference(self)


@dataclass(frozen=True)
class PreferConstraint(Preference):
    constraint: ConstraintTemplate


@dataclass(frozen=True)
class PreferNot(Preference):
    operand: Preference


@dataclass(frozen=True)
class PreferAnd(Preference):
    left: Preference
    right: Preference


@dataclass(frozen=True)
class PreferOr(Preference):
    left: Preference
    right: Preference


def eval_preference(preference: Preference, trace: Sequence[int]) -> bool:
    match preference:
        case PreferConstraint(constraint=constraint):
            return eval_template(constraint, trace)
        case PreferNot(operand=operand):
            return not eval_preference(operand, trace)
        case PreferAnd(left=left, right=right):
            return eval_preference(left, trace) and eval_preference(right, trace)
        case PreferOr(left=left, right=right):
            return eval_preference(left, trace) or eval_preference(right, trace)
    raise TypeError(f"Unsupported preference node: {preference!r}")


def preference_formula(preference: Preference) -> Formula:
    match preference:
        case PreferConstraint(constraint=constraint):
            return expand_template(constraint)
        case PreferNot(operand=operand):
            return Not(preference_formula(operand))
        case PreferAnd(left=left, right=right):
            return And(preference_formula(left), preference_formula(right))
        case PreferOr(left=left, right=right):
            return Or(preference_formula(left), preference_formula(right))
    raise TypeError(f"Unsupported preference node: {preference!r}")


def preference_activities(preference: Preference) -> frozenset[int]:
    match preference:
        case PreferConstraint(constraint=constraint):
            return constraint.activities
        case PreferNot(operand=operand):
            return preference_activities(operand)
        case PreferAnd(left=left, right=right) | PreferOr(left=left, right=right):
            return preference_activities(left) | preference_activities(right)
    raise TypeError(f"Unsupported preference node: {preference!r}")


# Binding strength: or < and < not < constraint.
_PRECEDENCE = {PreferOr: 1, PreferAnd: 2, PreferNot: 3, PreferConstraint: 4}


def format_preference(preference: Preference, min_precedence: int = 0) -> str:
    match preference:
        case PreferConstraint(constraint=constraint):
            text = format_constraint(constraint)
        case PreferNot(operand=operand):
            text = f"not {format_preference(operand, 3)}"
        case PreferAnd(left=left, right=right):
            text = f"{format_preference(left, 2)} and {format_preference(right, 3)}"
        case PreferOr(left=left, right=right):
            text = f"{format_preference(left, 1)} or {format_preference(right, 2)}"
        case _:
            raise TypeError(f"Unsupported preference node: {preference!r}")
    if _PRECEDENCE[type(preference)] < min_precedence:
        return f"({text})"
    return text
