"""Reports printed by the command line: aligned text, TSV and JSON.

A ``Report`` is the single value each command produces. JSON is its lossless
form; ``load_report`` reads it back so a saved report can be re-rendered in any
format with identical output.
"""

import logging
from typing import Any, Literal, Optional, Sequence

from pydantic import (
    BaseModel,
    ConfigDict,
    SerializerFunctionWrapHandler,
    ValidationError,
    model_serializer,
    model_validator,
)

from dproc.compare import ComparisonReport
from dproc.data_objects import Trace, format_trace
from dproc.enumeration import TraceStatistics
from dproc.errors import ReportFormatError
from dproc.utility import UtilityVector, flatten_vector, nest_vector

LOG = logging.getLogger(__name__)

OutputFormat = Literal["text", "json", "tsv"]
OUTPUT_FORMATS = ("text", "json", "tsv")


class TracesSection(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    process: str
    strategy: str
    satisfies_calls: int
    trace_count: int
    # None when only the count was requested
    traces: Optional[tuple[Trace, ...]] = None
    statistics: Optional[TraceStatistics] = None


class UtilitiesSection(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    system: str
    stakeholders: tuple[str, ...]
    vector: UtilityVector

    @model_validator(mode="before")
    @classmethod
    def _nest_vector(cls, data: Any) -> Any:
        return nest_vector(data)

    @model_serializer(mode="wrap")
    def _flatten_vector(self, handler: SerializerFunctionWrapHandler) -> dict[str, Any]:
        return flatten_vector(handler(self))


class Report(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    kind: Literal["traces", "utilities", "comparison"]
    traces: Optional[TracesSection] = None
    utilities: Optional[UtilitiesSection] = None
    comparison: Optional[ComparisonReport] = None


def format_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Left-aligned columns separated by two spaces, with a dashed rule."""
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))

    def line(cells: Sequence[str]) -> str:
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()

    lines = [line(headers), line(["-" * w for w in widths])]
    lines.extend(line(row) for row in rows)
    return "\n".join(lines)


def format_tsv(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    return "\n".join("\t".join(cells) for cells in [headers, *rows])


def _fixed(value: float) -> str:
    return f"{value:.5f}"


def _exact(value: float) -> str:
    return repr(float(value))


def _vector_literal(values: Sequence[float]) -> str:
    return "(" + ", ".join(_fixed(v) for v in values) + ")"


def _subset_literal(subset: Sequence[str]) -> str:
    return "{" + ", ".join(subset) + "}"


def _traces_text(section: TracesSection, tsv: bool) -> str:
    blocks = []
    if section.traces is None:
        blocks.append(str(section.trace_count))
    elif tsv:
        blocks.append(
            format_tsv(
                ["length", "trace"],
                [[str(len(t)), format_trace(t)] for t in section.traces],
            )
        )
    else:
        blocks.append("\n".join(format_trace(t) for t in section.traces))

    stats = section.statistics
    if stats is not None:
        render = format_tsv if tsv else format_table
        blocks.append(
            render(
                ["length", "traces"],
                [[str(k), str(v)] for k, v in stats.length_histogram.items()],
            )
        )
        blocks.append(
            render(
                ["activity", "traces"],
                [[str(k), str(v)] for k, v in stats.activity_counts.items()],
            )
        )
    return "\n\n".join(blocks)


def _utilities_text(section: UtilitiesSection, tsv: bool) -> str:
    vector = section.vector
    counts = vector.good_counts or (None,) * len(vector.values)
    rows = [
        [label, "" if good is None else str(good), _exact(u) if tsv else _fixed(u)]
        for label, good, u in zip(section.stakeholders, counts, vector.values)
    ]
    headers = ["stakeholder", "good", "utility"]
    if tsv:
        return format_tsv(headers, rows)
    total = "" if vector.total_count is None else f" ({vector.total_count} unique traces)"
    return "\n".join(
        [
            f"System {section.system}{total}",
            format_table(headers, rows),
            f"u = {_vector_literal(vector.values)}",
        ]
    )


def _comparison_text(report: ComparisonReport, tsv: bool) -> str:
    number = _exact if tsv else _fixed
    render = format_tsv if tsv else format_table
    labels = list(report.labels)

    vectors = render(
        ["system", "H", *report.stakeholders],
        [
            [s.label, number(s.h), *(number(u) for u in s.vector.values)]
            for s in report.systems
        ],
    )

    def optimum(row) -> str:
        if row.tie and not tsv:
            return f"{row.winner} (tie: {', '.join(row.ties)})"
        return row.winner

    rows = render(
        ["subset", *labels, "optimal", *(["tie"] if tsv else [])],
        [
            [
                _subset_literal(row.subset),
                *(number(h) for h in row.h),
                optimum(row),
                *([",".join(row.ties) if row.tie else ""] if tsv else []),
            ]
            for row in report.rows
        ],
    )

    strata = []
    for name in ("all", "almostall", "morethanhalf", "any"):
        result = getattr(report.summary, name)
        winner = result.winner
        if result.tie and not tsv:
            winner = f"{winner} (tie: {', '.join(result.tied)})"
        strata.append([name, winner, f"{result.freq_num}/{result.freq_den}"])
    summary = render(["stratum", "winner", "frequency"], strata)

    blocks = [vectors, rows, summary]
    if not tsv:
        blocks.append("notes: " + ", ".join(note.value for note in report.summary.notes))
    return "\n\n".join(blocks)


def render_report(report: Report, output_format: OutputFormat = "text") -> str:
    if output_format == "json":
        return report.model_dump_json(by_alias=True, indent=2)
    tsv = output_format == "tsv"
    match report.kind:
        case "traces":
            return _traces_text(report.traces, tsv)
        case "utilities":
            return _utilities_text(report.utilities, tsv)
        case "comparison":
            return _comparison_text(report.comparison, tsv)
    raise ValueError(f"Unknown report kind: {report.kind}")


def load_report(text: str) -> Report:
    try:
        report = Report.model_validate_json(text)
    except ValidationError as e:
        raise ReportFormatError(f"not a dproc report: {e.error_count()} validation errors") from e
    if getattr(report, report.kind) is None:
        raise ReportFormatError(f"{report.kind} report is missing its {report.kind} section")
    return report


def parse_vector_file(text: str) -> tuple[list[str], list[UtilityVector]]:
    """Read ``label: u1 u2 ... um`` lines; blank lines and ``#`` comments are skipped."""
    labels: list[str] = []
    vectors: list[UtilityVector] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        label, sep, rest = line.partition(":")
        label = label.strip()
        if not sep or not label:
            raise ReportFormatError(f"line {number}: expected 'label: u1 u2 ...'")
        try:
            values = tuple(float(part) for part in rest.split())
            vector = UtilityVector(values=values)
        except ValueError as e:
            raise ReportFormatError(f"line {number}: {e}") from None
        if not values:
            raise ReportFormatError(f"line {number}: {label} has no utilities")
        if label in labels:
            raise ReportFormatError(f"line {number}: system {label} listed twice")
        labels.append(label)
        vectors.append(vector)
    if not vectors:
        raise ReportFormatError("vector file lists no systems")
    LOG.debug("Read %d utility vectors", len(vectors))
    return labels, vectors
