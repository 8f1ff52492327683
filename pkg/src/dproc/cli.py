import asyncio
import functools
import logging
from pathlib import Path
from typing import Optional, Sequence

import click
from pydantic import ValidationError

from dproc.compare import acompare, compare_vectors
from dproc.config import AnalysisSettings
from dproc.data_objects import DeclarativeProcess, parse_trace
from dproc.database import TraceCache, process_fingerprint
from dproc.dsl import ParsedSpec, load_spec
from dproc.enumeration import StrategyChoice, aunique_traces, trace_statistics
from dproc.enumeration_base import EnumerationResult
from dproc.errors import DprocError, DslSyntaxError, ProcessDefinitionError, UnknownActivity
from dproc.formulas import format_formula
from dproc.report import (
    OUTPUT_FORMATS,
    Report,
    TracesSection,
    UtilitiesSection,
    format_table,
    load_report,
    parse_vector_file,
    render_report,
)
from dproc.templates import eval_template, expand_template, format_constraint
from dproc.utility import UtilityVector, utility_vector

LOG = logging.getLogger(__name__)

SPEC_LOAD_EXIT_CODE = 2


def _exit_on_error(command):
    """Report library errors on stderr and exit with their code."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except DprocError as e:
            click.echo(f"error: {e}", err=True)
            raise SystemExit(e.exit_code)

    return wrapper


def _load(path: str) -> ParsedSpec:
    try:
        return load_spec(path)
    except (ProcessDefinitionError, ValidationError) as e:
        # a bad spec file is a parse failure, whatever the cause
        click.echo(f"error: {path}: {e}", err=True)
        raise SystemExit(SPEC_LOAD_EXIT_CODE)
    except DprocError as e:
        click.echo(f"error: {path}: {e}", err=True)
        raise SystemExit(e.exit_code)


def _settings(**overrides) -> AnalysisSettings:
    try:
        return AnalysisSettings.from_env(**overrides)
    except ValueError as e:
        raise click.UsageError(str(e))


async def _aenumerate_all(
    processes: Sequence[DeclarativeProcess],
    algorithm: StrategyChoice,
    settings: AnalysisSettings,
    cache_path: Optional[str],
) -> list[EnumerationResult]:
    if cache_path is None:
        return list(
            await asyncio.gather(*(aunique_traces(p, algorithm, settings) for p in processes))
        )

    cache = TraceCache(cache_path)
    try:
        fingerprints = [
            process_fingerprint(p, algorithm, settings.prune_prefixes) for p in processes
        ]
        results = [await cache.aload_result(f) for f in fingerprints]
        missing = [k for k, result in enumerate(results) if result is None]
        computed = await asyncio.gather(
            *(aunique_traces(processes[k], algorithm, settings) for k in missing)
        )
        for k, result in zip(missing, computed):
            results[k] = result
            await cache.asave_result(fingerprints[k], result)
        return results
    finally:
        await cache.aclose()


def _enumerate_all(processes, algorithm, settings, cache_path) -> list[EnumerationResult]:
    return asyncio.run(_aenumerate_all(processes, algorithm, settings, cache_path))


def enumeration_options(command):
    options = [
        click.option(
            "--algorithm",
            type=click.Choice(["auto", "brute", "leaf"]),
            default="auto",
            show_default=True,
            help="Brute force, leaf peeling, or leaf peeling when a leaf exists.",
        ),
        click.option(
            "--workers",
            type=click.IntRange(min=1),
            default=None,
            help="Worker processes for brute force [default: $DPROC_WORKERS or 1].",
        ),
        click.option(
            "--prune", is_flag=True, help="Skip arrangements whose prefix already fails."
        ),
        click.option(
            "--allow-large-alphabet",
            is_flag=True,
            help="Brute-force alphabets above $DPROC_MAX_ALPHABET (default 12).",
        ),
        click.option(
            "--cache",
            "cache_path",
            type=click.Path(dir_okay=False),
            default=None,
            help="SQLite file that stores enumeration results for reuse.",
        ),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def format_option(command):
    return click.option(
        "--format",
        "output_format",
        type=click.Choice(OUTPUT_FORMATS),
        default="text",
        show_default=True,
        help="Report format.",
    )(command)


def _stakeholder_labels(option: Optional[str], m: int) -> tuple[str, ...]:
    if option is None:
        return tuple(f"S{k}" for k in range(1, m + 1))
    labels = tuple(part.strip() for part in option.split(",") if part.strip())
    if len(labels) != m:
        raise click.UsageError(f"--stakeholders names {len(labels)} stakeholders, expected {m}")
    return labels


@click.group(help="Unique traces, stakeholder utilities and process comparison.")
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for detail (stderr).")
def cli(verbose: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.getLogger().setLevel(level)


@cli.command("traces")
@click.argument("spec", type=click.Path(exists=True, dir_okay=False))
@click.option("--count-only", is_flag=True, help="Print only the number of traces.")
@click.option("--stats", is_flag=True, help="Add length and activity histograms.")
@enumeration_options
@format_option
@_exit_on_error
def cmd_traces(
    spec, count_only, stats, algorithm, workers, prune, allow_large_alphabet, cache_path,
    output_format,
):
    """List the unique traces of the process in SPEC."""
    settings = _settings(
        workers=workers,
        prune_prefixes=prune or None,
        allow_large_alphabet=allow_large_alphabet or None,
    )
    process = _load(spec).process
    (result,) = _enumerate_all([process], algorithm, settings, cache_path)
    section = TracesSection(
        process=process.name,
        strategy=result.strategy,
        satisfies_calls=result.satisfies_calls,
        trace_count=result.trace_count,
        traces=None if count_only else result.traces.traces,
        statistics=trace_statistics(result.traces, process.activity_ids) if stats else None,
    )
    click.echo(render_report(Report(kind="traces", traces=section), output_format))


@cli.command("check")
@click.argument("spec", type=click.Path(exists=True, dir_okay=False))
@click.argument("trace")
@_exit_on_error
def cmd_check(spec, trace):
    """Check TRACE, e.g. "(1,2,4)" or "ε", against every constraint in SPEC."""
    process = _load(spec).process
    try:
        events = parse_trace(trace)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="TRACE")
    known = set(process.activity_ids)
    for activity in events:
        if activity not in known:
            raise UnknownActivity(activity, where="trace")

    rows, failed = [], 0
    for constraint in process.constraints:
        passed = eval_template(constraint, events)
        failed += not passed
        rows.append(
            [
                "pass" if passed else "FAIL",
                format_constraint(constraint),
                format_formula(expand_template(constraint)),
            ]
        )
    if rows:
        click.echo(format_table(["verdict", "constraint", "ltl"], rows))
    click.echo(f"{len(rows) - failed}/{len(rows)} constraints satisfied")
    if failed:
        raise SystemExit(1)


def _parse_counts(text: str) -> tuple[list[int], int]:
    goods, sep, total = text.partition("/")
    try:
        if not sep:
            raise ValueError
        return [int(g) for g in goods.split(",")], int(total)
    except ValueError:
        raise click.BadParameter(
            f"expected g1,g2,...,gm/total, got {text!r}", param_hint="--from-counts"
        ) from None


@cli.command("utilities")
@click.argument("spec", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--from-counts", "counts", help="Good counts and total, e.g. 11,3,389/459.")
@click.option("--stakeholders", help="Comma-separated stakeholder labels.")
@enumeration_options
@format_option
@_exit_on_error
def cmd_utilities(
    spec, counts, stakeholders, algorithm, workers, prune, allow_large_alphabet, cache_path,
    output_format,
):
    """Stakeholder utility vector of SPEC, or of given trace counts."""
    if (spec is None) == (counts is None):
        raise click.UsageError("give either SPEC or --from-counts")

    if counts is not None:
        goods, total = _parse_counts(counts)
        try:
            vector = UtilityVector.from_counts(goods, total)
        except ValueError as e:
            raise click.BadParameter(str(e), param_hint="--from-counts")
        section = UtilitiesSection(
            system="counts",
            stakeholders=_stakeholder_labels(stakeholders, len(goods)),
            vector=vector,
        )
    else:
        settings = _settings(
            workers=workers,
            prune_prefixes=prune or None,
            allow_large_alphabet=allow_large_alphabet or None,
        )
        parsed = _load(spec)
        if not parsed.preferences:
            click.echo(f"error: {spec}: declares no stakeholders", err=True)
            raise SystemExit(DslSyntaxError.exit_code)
        system = parsed.to_system()
        (result,) = _enumerate_all([system.process], algorithm, settings, cache_path)
        section = UtilitiesSection(
            system=system.label,
            stakeholders=_stakeholder_labels(stakeholders, len(system.stakeholders))
            if stakeholders
            else system.stakeholders,
            vector=utility_vector(system, result.traces),
        )
    click.echo(render_report(Report(kind="utilities", utilities=section), output_format))


@cli.command("compare")
@click.argument("specs", nargs=-1, type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--vectors",
    "vectors_path",
    type=click.Path(exists=True, dir_okay=False),
    help="File of 'label: u1 u2 ... um' lines.",
)
@click.option(
    "--from-report",
    "report_path",
    type=click.Path(exists=True, dir_okay=False),
    help="Re-render a saved JSON report.",
)
@click.option("--stakeholders", help="Comma-separated stakeholder labels for --vectors.")
@click.option("--allow-single", is_flag=True, help="Accept a single system.")
@click.option(
    "--tolerance", type=click.FloatRange(min=0.0), default=None, help="Tie tolerance on H."
)
@enumeration_options
@format_option
@_exit_on_error
def cmd_compare(
    specs, vectors_path, report_path, stakeholders, allow_single, tolerance, algorithm,
    workers, prune, allow_large_alphabet, cache_path, output_format,
):
    """Compare the systems in SPECS (or a vector file) stakeholder subset by subset."""
    sources = sum([bool(specs), vectors_path is not None, report_path is not None])
    if sources != 1:
        raise click.UsageError("give spec files, --vectors or --from-report (exactly one)")

    if report_path is not None:
        report = load_report(Path(report_path).read_text(encoding="utf-8"))
        click.echo(render_report(report, output_format))
        return

    settings = _settings(
        workers=workers,
        prune_prefixes=prune or None,
        allow_large_alphabet=allow_large_alphabet or None,
        tie_tolerance=tolerance,
    )
    if vectors_path is not None:
        labels, vectors = parse_vector_file(Path(vectors_path).read_text(encoding="utf-8"))
        _require_count(len(vectors), allow_single)
        comparison = compare_vectors(
            labels, vectors, _stakeholder_labels(stakeholders, len(vectors[0])), settings
        )
    else:
        _require_count(len(specs), allow_single)
        systems = []
        for path in specs:
            parsed = _load(path)
            if not parsed.preferences:
                click.echo(f"error: {path}: declares no stakeholders", err=True)
                raise SystemExit(DslSyntaxError.exit_code)
            systems.append(parsed.to_system())
        results = _enumerate_all([s.process for s in systems], algorithm, settings, cache_path)
        vectors = [utility_vector(s, r.traces) for s, r in zip(systems, results)]
        comparison = asyncio.run(acompare(systems, vectors, algorithm, settings))
    click.echo(render_report(Report(kind="comparison", comparison=comparison), output_format))


def _require_count(count: int, allow_single: bool) -> None:
    if count < 2 and not allow_single:
        raise click.UsageError("comparison needs at least two systems (or --allow-single)")
