"""Exception hierarchy shared by the library and the command line.

Every error carries the exit code the CLI reports for it. None of them derive
from ``ValueError`` so that raising one inside a pydantic validator surfaces
the error itself rather than a ``ValidationError``.
"""

from typing import Optional


class DprocError(Exception):
    exit_code: int = 1


class ProcessDefinitionError(DprocError):
    exit_code = 2


class UnknownActivity(ProcessDefinitionError):
    exit_code = 4

    def __init__(
        self,
        activity: int,
        where: str = "",
        line: Optional[int] = None,
        column: Optional[int] = None,
    ) -> None:
        self.activity = activity
        self.line = line
        self.column = column
        location = f"line {line}, column {column}: " if line is not None else ""
        suffix = f" in {where}" if where else ""
        super().__init__(f"{location}unknown activity {activity}{suffix}")


class DuplicateActivityId(ProcessDefinitionError):
    def __init__(self, activity: int) -> None:
        self.activity = activity
        super().__init__(f"activity {activity} is declared more than once")


class DslError(DprocError):
    exit_code = 2

    def __init__(
        self, message: str, line: Optional[int] = None, column: Optional[int] = None
    ) -> None:
        self.message = message
        self.line = line
        self.column = column
        location = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(f"{location}{message}")


class DslSyntaxError(DslError):
    pass


class ArityError(DslError):
    pass


class ReportFormatError(DprocError):
    exit_code = 2


class AlphabetTooLarge(DprocError):
    exit_code = 3

    def __init__(self, size: int, limit: int) -> None:
        self.size = size
        self.limit = limit
        super().__init__(
            f"alphabet of {size} activities exceeds the brute-force limit of {limit}"
            " (raise DPROC_MAX_ALPHABET or pass --allow-large-alphabet)"
        )


class DegenerateProcess(DprocError):
    exit_code = 5

    def __init__(self, message: str = "process has no unique traces") -> None:
        super().__init__(message)


class EmptySubset(DprocError):
    def __init__(self) -> None:
        super().__init__("stakeholder subset must not be empty")


class MismatchedStakeholders(DprocError):
    exit_code = 6


class TooManyStakeholders(DprocError):
    exit_code = 7

    def __init__(self, count: int, limit: int) -> None:
        self.count = count
        self.limit = limit
        super().__init__(
            f"{count} stakeholders give {2 ** count - 1} subsets; the limit is {limit} stakeholders"
        )
