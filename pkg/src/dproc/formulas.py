"""LTL over finite traces.

A formula is evaluated at a position of a finite trace. ``Next`` is the strong
next (false at the last position and on the empty trace); ``Finally`` and
``Globally`` range over the current position and every later one.
"""

from dataclasses import dataclass
from functools import reduce
from typing import Sequence


class Formula:
    """Base of the LTLf syntax tree."""

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class TrueFormula(Formula):
    pass


@dataclass(frozen=True)
class FalseFormula(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    activity: int


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    operand: Formula


@dataclass(frozen=True)
class Finally(Formula):
    operand: Formula


@dataclass(frozen=True)
class Globally(Formula):
    operand: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class WeakUntil(Formula):
    left: Formula
    right: Formula


def conjunction(*formulas: Formula) -> Formula:
    if not formulas:
        return TrueFormula()
    return reduce(And, formulas)


def disjunction(*formulas: Formula) -> Formula:
    if not formulas:
        return FalseFormula()
    return reduce(Or, formulas)


def eval_formula(formula: Formula, trace: Sequence[int], pos: int = 0) -> bool:
    n = len(trace)
    if pos < 0 or pos > n:
        raise ValueError(f"position {pos} outside trace of length {n}")

    match formula:
        case TrueFormula():
            return True
        case FalseFormula():
            return False
        case Atom(activity=activity):
            return pos < n and trace[pos] == activity
        case Not(operand=operand):
            return not eval_formula(operand, trace, pos)
        case And(left=left, right=right):
            return eval_formula(left, trace, pos) and eval_formula(right, trace, pos)
        case Or(left=left, right=right):
            return eval_formula(left, trace, pos) or eval_formula(right, trace, pos)
        case Implies(left=left, right=right):
            return not eval_formula(left, trace, pos) or eval_formula(right, trace, pos)
        case Iff(left=left, right=right):
            return eval_formula(left, trace, pos) == eval_formula(right, trace, pos)
        case Next(operand=operand):
            return pos + 1 < n and eval_formula(operand, trace, pos + 1)
        case Finally(operand=operand):
            return any(eval_formula(operand, trace, k) for k in range(pos, n))
        case Globally(operand=operand):
            return all(eval_formula(operand, trace, k) for k in range(pos, n))
        case Until(left=left, right=right):
            return _until(left, right, trace, pos)
        case WeakUntil(left=left, right=right):
            return _until(left, right, trace, pos) or all(
                eval_formula(left, trace, k) for k in range(pos, n)
            )
        case _:
            raise TypeError(f"Unsupported formula node: {formula!r}")


def _until(left: Formula, right: Formula, trace: Sequence[int], pos: int) -> bool:
    for k in range(pos, len(trace)):
        if eval_formula(right, trace, k):
            return True
        if not eval_formula(left, trace, k):
            return False
    return False


def activities_of(formula: Formula) -> frozenset[int]:
    match formula:
        case Atom(activity=activity):
            return frozenset({activity})
        case TrueFormula() | FalseFormula():
            return frozenset()
        case Not(operand=operand) | Next(operand=operand) | Finally(operand=operand) | Globally(
            operand=operand
        ):
            return activities_of(operand)
        case And(left=left, right=right) | Or(left=left, right=right) | Implies(
            left=left, right=right
        ) | Iff(left=left, right=right) | Until(left=left, right=right) | WeakUntil(
            left=left, right=right
        ):
            return activities_of(left) | activities_of(right)
        case _:
            raise TypeError(f"Unsupported formula node: {formula!r}")


_BINARY_SYMBOLS = {
    And: "&",
    Or: "|",
    Implies: "->",
    Iff: "<->",
    Until: "U",
    WeakUntil: "W",
}
_UNARY_SYMBOLS = {Next: "X", Finally: "F", Globally: "G"}


def format_formula(formula: Formula) -> str:
    """Render as ASCII LTL, e.g. ``G(1 -> F 2)``."""
    match formula:
        case TrueFormula():
            return "true"
        case FalseFormula():
            return "false"
        case Atom(activity=activity):
            return str(activity)
        case Not(operand=operand):
            return f"!{_wrapped(operand)}"
        case Next(operand=operand) | Finally(operand=operand) | Globally(operand=operand):
            symbol = _UNARY_SYMBOLS[type(formula)]
            inner = format_formula(operand)
            if isinstance(operand, (Atom, TrueFormula, FalseFormula)):
                return f"{symbol} {inner}"
            return f"{symbol}({_strip(inner)})"
        case _ if type(formula) in _BINARY_SYMBOLS:
            symbol = _BINARY_SYMBOLS[type(formula)]
            return f"({format_formula(formula.left)} {symbol} {format_formula(formula.right)})"
        case _:
            raise TypeError(f"Unsupported formula node: {formula!r}")


def _wrapped(formula: Formula) -> str:
    text = format_formula(formula)
    if isinstance(formula, (Atom, TrueFormula, FalseFormula)) or text.startswith("("):
        return text
    return f"({text})"


def _strip(text: str) -> str:
    if text.startswith("(") and text.endswith(")") and _balanced(text[1:-1]):
        return text[1:-1]
    return text


def _balanced(text: str) -> bool:
    depth = 0
    for char in text:
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
            if depth < 0:
                return False
    return depth == 0
