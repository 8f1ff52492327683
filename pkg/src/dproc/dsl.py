"""Text format for processes and stakeholder preferences.

A spec file holds one ``process`` block followed by any number of
``stakeholder`` blocks::

    # Example
    process example {
      activities { 1 "Register"; 2; 3; }
      constraints { resp(1, 2); prec(2, 3); }
    }
    stakeholder S1 "Patient" { prefer not participation(3) and resp(1, 2); }

In preferences ``not`` binds tighter than ``and``, which binds tighter than
``or``; both binary operators are left-associative. ``format_spec`` prints the
canonical form that ``parse_spec`` reads back to an equal structure.
"""

import json
import logging
import re
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

from dproc.data_objects import Activity, DeclarativeProcess, StakeholderSystem
from dproc.errors import ArityError, DslSyntaxError, UnknownActivity
from dproc.templates import (
    TEMPLATE_ALIASES,
    ConstraintTemplate,
    PreferAnd,
    Preference,
    PreferConstraint,
    PreferNot,
    PreferOr,
    TemplateKind,
    format_constraint,
    format_preference,
)

LOG = logging.getLogger(__name__)

KEYWORDS = frozenset(
    {"process", "activities", "constraints", "stakeholder", "prefer", "not", "and", "or"}
)

_TOKEN_PATTERN = re.compile(
    r"""
    (?P<comment>\#[^\n]*)
    |(?P<newline>\n)
    |(?P<space>[ \t\r\f\v]+)
    |(?P<int>\d+)
    |(?P<string>"(?:[^"\\\n]|\\.)*")
    |(?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    |(?P<punct>[{}();,])
    |(?P<error>.)
    """,
    re.VERBOSE,
)


class Token(NamedTuple):
    kind: str
    value: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start = 1, 0
    for match in _TOKEN_PATTERN.finditer(text):
        kind = match.lastgroup
        column = match.start() - line_start + 1
        if kind == "newline":
            line, line_start = line + 1, match.end()
        elif kind in ("comment", "space"):
            continue
        elif kind == "error":
            raise DslSyntaxError(f"unexpected character {match.group()!r}", line, column)
        else:
            tokens.append(Token(kind, match.group(), line, column))
    tokens.append(Token("eof", "", line, len(text) - line_start + 1))
    return tokens


class ParsedSpec(NamedTuple):
    """A parsed spec: the process and ``(label, preference)`` per stakeholder."""

    process: DeclarativeProcess
    preferences: list[tuple[str, Preference]]

    @property
    def stakeholders(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.preferences)

    def to_system(self) -> StakeholderSystem:
        return StakeholderSystem(
            process=self.process,
            stakeholders=self.stakeholders,
            preferences=tuple(preference for _, preference in self.preferences),
        )


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = tokenize(text)
        self.index = 0
        self.activity_ids: set[int] = set()
        # (label, description) for stakeholders declared with a quoted description
        self.descriptions: list[tuple[str, str]] = []

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _fail(self, expected: str, token: Optional[Token] = None) -> DslSyntaxError:
        token = token or self.current
        found = "end of input" if token.kind == "eof" else repr(token.value)
        return DslSyntaxError(f"expected {expected}, found {found}", token.line, token.column)

    def _advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def _check(self, value: str) -> bool:
        token = self.current
        return token.kind in ("punct", "ident") and token.value == value

    def _expect(self, value: str) -> Token:
        if not self._check(value):
            raise self._fail(repr(value))
        return self._advance()

    def _expect_kind(self, kind: str, expected: str) -> Token:
        if self.current.kind != kind:
            raise self._fail(expected)
        return self._advance()

    def _name(self, expected: str) -> Token:
        token = self._expect_kind("ident", expected)
        if token.value in KEYWORDS:
            raise self._fail(expected, token)
        return token

    def _string(self) -> Optional[str]:
        if self.current.kind != "string":
            return None
        token = self._advance()
        try:
            value = json.loads(token.value)
        except json.JSONDecodeError:
            raise DslSyntaxError("invalid escape in string", token.line, token.column) from None
        if not value:
            raise DslSyntaxError("labels must not be empty", token.line, token.column)
        return value

    def _activity_ref(self) -> tuple[int, Token]:
        token = self._expect_kind("int", "an activity id")
        activity = int(token.value)
        if activity not in self.activity_ids:
            raise UnknownActivity(activity, line=token.line, column=token.column)
        return activity, token

    def _activity_list(self) -> list[int]:
        members = [self._activity_ref()[0]]
        while self._check(","):
            self._advance()
            members.append(self._activity_ref()[0])
        return members

    def parse(self) -> ParsedSpec:
        process = self._process()
        preferences: list[tuple[str, Preference]] = []
        while self.current.kind != "eof":
            if not self._check("stakeholder"):
                raise self._fail("'stakeholder' or end of input")
            label_token, description, preference = self._stakeholder()
            if any(label == label_token.value for label, _ in preferences):
                raise DslSyntaxError(
                    f"stakeholder {label_token.value} is declared twice",
                    label_token.line,
                    label_token.column,
                )
            preferences.append((label_token.value, preference))
            if description is not None:
                self.descriptions.append((label_token.value, description))
        return ParsedSpec(process, preferences)

    def _process(self) -> DeclarativeProcess:
        self._expect("process")
        name = self._name("a process name").value
        self._expect("{")

        self._expect("activities")
        self._expect("{")
        activities: list[Activity] = []
        while not self._check("}"):
            token = self._expect_kind("int", "an activity id or '}'")
            activity = int(token.value)
            if activity in self.activity_ids:
                raise DslSyntaxError(
                    f"activity {activity} is declared more than once", token.line, token.column
                )
            self.activity_ids.add(activity)
            activities.append(Activity(id=activity, label=self._string()))
            self._expect(";")
        if not activities:
            raise self._fail("at least one activity")
        self._advance()

        self._expect("constraints")
        self._expect("{")
        constraints: list[ConstraintTemplate] = []
        while not self._check("}"):
            constraints.append(self._constraint())
            self._expect(";")
        self._advance()
        self._expect("}")

        activities.sort(key=lambda a: a.id)
        return DeclarativeProcess(
            name=name, alphabet=tuple(activities), constraints=tuple(constraints)
        )

    def _constraint(self) -> ConstraintTemplate:
        name_token = self._expect_kind("ident", "a constraint template")
        kind = TEMPLATE_ALIASES.get(name_token.value)
        if kind is None:
            try:
                kind = TemplateKind(name_token.value)
            except ValueError:
                raise DslSyntaxError(
                    f"unknown constraint template {name_token.value!r}",
                    name_token.line,
                    name_token.column,
                ) from None
        self._expect("(")
        min_count = 1
        if kind is TemplateKind.CHOICE:
            if name_token.value != "choice1" and self.current.kind == "int":
                min_count = int(self._advance().value)
                self._expect(",")
            self._expect("{")
            args = self._activity_list() if not self._check("}") else []
            self._expect("}")
        else:
            args = self._activity_list() if not self._check(")") else []
        self._expect(")")
        try:
            return ConstraintTemplate(kind=kind, args=tuple(args), min_count=min_count)
        except ArityError as e:
            raise ArityError(e.message, name_token.line, name_token.column) from None

    def _stakeholder(self) -> tuple[Token, Optional[str], Preference]:
        self._expect("stakeholder")
        label = self._name("a stakeholder name")
        description = self._string()
        self._expect("{")
        self._expect("prefer")
        preference = self._pref_or()
        self._expect(";")
        self._expect("}")
        return label, description, preference

    def _pref_or(self) -> Preference:
        left = self._pref_and()
        while self._check("or"):
            self._advance()
            left = PreferOr(left, self._pref_and())
        return left

    def _pref_and(self) -> Preference:
        left = self._pref_not()
        while self._check("and"):
            self._advance()
            left = PreferAnd(left, self._pref_not())
        return left

    def _pref_not(self) -> Preference:
        if self._check("not"):
            self._advance()
            return PreferNot(self._pref_not())
        if self._check("("):
            self._advance()
            inner = self._pref_or()
            self._expect(")")
            return inner
        if self.current.kind != "ident" or self.current.value in KEYWORDS:
            raise self._fail("a constraint, 'not' or '('")
        return PreferConstraint(self._constraint())


def parse_spec_with_descriptions(text: str) -> tuple[ParsedSpec, tuple[tuple[str, str], ...]]:
    """Parse a spec and also return the quoted stakeholder descriptions."""
    parser = _Parser(text)
    spec = parser.parse()
    LOG.debug(
        "Parsed process %s: %d activities, %d constraints, %d stakeholders",
        spec.process.name,
        len(spec.process.alphabet),
        len(spec.process.constraints),
        len(spec.preferences),
    )
    return spec, tuple(parser.descriptions)


def parse_spec(text: str) -> ParsedSpec:
    return parse_spec_with_descriptions(text)[0]


def parse_system(text: str) -> StakeholderSystem:
    """Parse a spec that must declare at least one stakeholder."""
    spec = parse_spec(text)
    if not spec.preferences:
        tokens = tokenize(text)
        raise DslSyntaxError("expected at least one stakeholder", tokens[-1].line, tokens[-1].column)
    return spec.to_system()


def load_spec(path: str | Path) -> ParsedSpec:
    return parse_spec(Path(path).read_text(encoding="utf-8"))


def _quote(text: str) -> str:
    return json.dumps(text, ensure_ascii=False)


def format_process(process: DeclarativeProcess) -> str:
    lines = [f"process {process.name} {{", "  activities {"]
    for activity in process.alphabet:
        label = f" {_quote(activity.label)}" if activity.label is not None else ""
        lines.append(f"    {activity.id}{label};")
    lines.append("  }")
    lines.append("  constraints {")
    lines.extend(f"    {format_constraint(c)};" for c in process.constraints)
    lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def format_spec(
    process: DeclarativeProcess,
    preferences: Sequence[tuple[str, Preference]] = (),
    descriptions: Sequence[tuple[str, str]] = (),
) -> str:
    described = dict(descriptions)
    parts = [format_process(process)]
    for label, preference in preferences:
        description = f" {_quote(described[label])}" if label in described else ""
        parts.append(
            f"stakeholder {label}{description} {{\n  prefer {format_preference(preference)};\n}}\n"
        )
    return "".join(parts)
