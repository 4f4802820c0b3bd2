"""
Synthesis driver for the Synthlock project.

This module provides functions to run one synthesis job from a spec file,
write its artifacts, run a benchmark suite, and the ``synth`` command line.

Run artifacts live in ``<out>/<example>-k<bound>-<schedule>/``:
``process_<i>.lts.json``, ``<example>.gcl`` and/or ``<example>.prog.json``,
``spec.dspec``, ``run.jsonl`` and ``result.json``.
"""

import argparse
import json
import logging
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from constants import (
    DEFAULT_SCHEDULE,
    DEFAULT_SCHEDULE_LENGTH,
    DEFAULT_SEED,
    DEFAULT_TIMEOUT,
    RESULTS_DIR,
    RUNS_DIR,
)
from src.bench.dsl import SpecFile, format_spec, parse_spec, parse_spec_text, product_atoms
from src.bench.reporting import ResultRow, append_result, results_frame, write_results
from src.codegen.programs import GuardedProgram, emit, render, to_json
from src.data.benchmarks import Benchmark, default_suite
from src.errors import CodegenError, FormulaError, SpecError
from src.lts.core import dump_lts
from src.synthesis.schedules import SCHEDULE_NAMES, make_schedule
from src.synthesis.search import Outcome, RunLog, SynthesisResult, start_search

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

EMIT_FORMATS = ("gcl", "json")

EXIT_CODES = {
    Outcome.FOUND: 0,
    Outcome.NOT_FOUND: 1,
    Outcome.UNSAT: 2,
    Outcome.TIMEOUT: 3,
}
EXIT_USAGE = 4


def setup_logging(level: Optional[str] = None) -> None:
    """Configure the root logger; ``SYNTH_LOG`` gives the level when none is passed."""
    name = (level or os.environ.get("SYNTH_LOG", "WARNING")).upper()
    numeric = getattr(logging, name, None)
    if not isinstance(numeric, int):
        raise ValueError(f"Unknown log level: {name}")
    logging.basicConfig(level=numeric, format=LOG_FORMAT, force=True)


def run_dirname(example: str, bound: int, schedule: str) -> str:
    """Directory name of a run: ``mut_2-k4-exp2`` for ``mut(2)``."""
    slug = re.sub(r"[^A-Za-z0-9_.-]+", "_", example).strip("_") or "run"
    return f"{slug}-k{bound}-{schedule}"


@dataclass
class RunReport:
    """
    Outcome of :func:`run`.

    Attributes:
        row: the result table row
        result: full search result (solution LTSs included)
        directory: artifact directory
        program: emitted program when the run found a solution that passes
            the lock discipline
        files: artifact name -> path
    """

    row: ResultRow
    result: SynthesisResult
    directory: str
    program: Optional[GuardedProgram] = None
    files: Dict[str, str] = field(default_factory=dict)


def _load(spec: Union[str, SpecFile]) -> SpecFile:
    if isinstance(spec, SpecFile):
        return spec
    return parse_spec(spec)


def _write_json(path: str, data) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(data, handle, indent=2, sort_keys=True)


def _write_solution(spec: SpecFile, result: SynthesisResult, directory: str, example: str,
                    formats: Sequence[str], files: Dict[str, str]) -> Optional[GuardedProgram]:
    for i, lts in enumerate(result.solution):
        path = os.path.join(directory, f"process_{i}.lts.json")
        dump_lts(lts, path)
        files[f"process_{i}"] = path
    names = [p.name for p in spec.processes]
    try:
        program = emit(result.solution, spec.system.vocabularies, name=spec.name, process_names=names)
    except CodegenError as err:
        logger.warning("No program for %s: %s", example, err)
        return None
    stem = re.sub(r"[^A-Za-z0-9_.-]+", "_", example).strip("_") or "program"
    if "gcl" in formats:
        path = os.path.join(directory, f"{stem}.gcl")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(render(program))
        files["gcl"] = path
    if "json" in formats:
        path = os.path.join(directory, f"{stem}.prog.json")
        _write_json(path, to_json(program))
        files["program"] = path
    return program


def run(spec: Union[str, SpecFile], bound: Optional[int] = None, schedule: str = DEFAULT_SCHEDULE,
        timeout: Optional[float] = DEFAULT_TIMEOUT, out: str = RUNS_DIR, emit_formats: Sequence[str] = ("gcl",),
        seed: int = DEFAULT_SEED, batch_len: int = DEFAULT_SCHEDULE_LENGTH, example: Optional[str] = None,
        report: Optional[str] = None) -> RunReport:
    """
    Synthesize one spec and write its artifacts.

    Args:
        spec: spec file path or parsed spec
        bound: states per process (default: the spec's ``bound``)
        schedule: schedule name or comma-separated bounds; ``nocex`` is a
            single unbounded batch without counterexamples
        timeout: seconds, None for no limit
        out: artifact root
        emit_formats: program formats to write (``gcl``, ``json``)
        example: name in the result table (default: the system name)
        report: results CSV to add the row to

    Returns:
        The report; a timeout gives a TO row

    Raises:
        ValueError: without a bound or with an unknown schedule
    """
    spec = _load(spec)
    bound = bound if bound is not None else spec.bound
    if bound is None:
        raise ValueError(f"No bound given and {spec.name} declares none")
    plan = make_schedule(schedule, batch_len)
    example = example or spec.name
    directory = os.path.join(out, run_dirname(example, bound, plan.name))
    os.makedirs(directory, exist_ok=True)
    files = {"log": os.path.join(directory, "run.jsonl"), "spec": os.path.join(directory, "spec.dspec")}
    with open(files["spec"], "w", encoding="utf-8") as handle:
        handle.write(format_spec(spec))

    logger.info("Running %s with %d states, schedule %s", example, bound, plan.name)
    log = RunLog(files["log"])
    try:
        result = start_search(spec.processes, spec.system.prop, bound, schedule=plan, timeout=timeout,
                              seed=seed, log=log)
    finally:
        log.close()

    program = None
    if result.found:
        program = _write_solution(spec, result, directory, example, emit_formats, files)

    total_states = result.total_states or bound ** len(spec.processes)
    total_states_props = result.total_states_props or 2 ** len(product_atoms(spec.declarations))
    row = ResultRow(
        example=example,
        schedule=plan.name,
        scope=bound,
        l_time=round(result.l_time, 3),
        g_time=round(result.g_time, 3),
        iterations=result.iterations,
        reachable_states=result.reachable,
        total_states=total_states,
        total_states_props=total_states_props,
        result=result.outcome.value,
    )
    files["result"] = os.path.join(directory, "result.json")
    _write_json(files["result"], {
        "row": asdict(row),
        "summary": result.summary(),
        "system": spec.name,
        "property": spec.system.prop_text,
        "processes": [p.name for p in spec.processes],
        "vocabularies": [v.to_dict() for v in spec.system.vocabularies],
        "seed": seed,
        "files": {name: os.path.basename(path) for name, path in files.items()},
    })
    if report:
        append_result(row, report)
    logger.info("%s: %s after %d iterations", example, row.result, row.iterations)
    return RunReport(row, result, directory, program, files)


@dataclass(frozen=True)
class BenchConfig:
    """One benchmark table job."""

    benchmark: Benchmark
    schedule: str = DEFAULT_SCHEDULE
    timeout: Optional[float] = DEFAULT_TIMEOUT
    seed: int = DEFAULT_SEED
    batch_len: int = DEFAULT_SCHEDULE_LENGTH
    out: str = RUNS_DIR
    emit_formats: Tuple[str, ...] = ("gcl",)


def suite_configs(suite: Optional[Sequence[Benchmark]] = None, schedules: Sequence[str] = (DEFAULT_SCHEDULE,),
                  **options) -> List[BenchConfig]:
    """Every benchmark crossed with every schedule."""
    suite = default_suite() if suite is None else suite
    return [BenchConfig(bench, schedule, **options) for bench in suite for schedule in schedules]


def _run_config(config: BenchConfig) -> ResultRow:
    spec = parse_spec_text(config.benchmark.source)
    report = run(
        spec,
        bound=config.benchmark.bound,
        schedule=config.schedule,
        timeout=config.timeout,
        out=config.out,
        emit_formats=config.emit_formats,
        seed=config.seed,
        batch_len=config.batch_len,
        example=config.benchmark.example,
    )
    return report.row


def bench_all(configs: Sequence[BenchConfig], report: Optional[str] = None, workers: int = 1) -> pd.DataFrame:
    """
    Run benchmark jobs and collect one table.

    Args:
        configs: jobs to run; empty gives a header-only table
        report: CSV path to write
        workers: parallel worker processes

    Returns:
        Result rows sorted by (example, scope)
    """
    if workers > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_config, configs))
    else:
        rows = [_run_config(config) for config in configs]
    if report:
        return write_results(rows, report)
    return results_frame(rows)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="synth", description="Synthesize lock-synchronized processes from a spec file.")
    parser.add_argument("file", nargs="?", help="spec file (.dspec)")
    parser.add_argument("--bound", type=int, help="states per process (default: the spec's bound)")
    parser.add_argument("--batches", action="append", default=None,
                        help=f"batch schedule: {', '.join(SCHEDULE_NAMES)} or comma-separated bounds; "
                             f"repeat with --suite to compare schedules (default {DEFAULT_SCHEDULE})")
    parser.add_argument("--batch-len", type=int, default=DEFAULT_SCHEDULE_LENGTH,
                        help="number of batches of a named schedule")
    parser.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, help="seconds per run")
    parser.add_argument("--out", default=RUNS_DIR, help="artifact directory")
    parser.add_argument("--emit", action="append", choices=EMIT_FORMATS, default=None,
                        help="program format to write (repeatable; default gcl)")
    parser.add_argument("--report", help="results CSV to add rows to")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="solver seed")
    parser.add_argument("--suite", action="store_true", help="run the bundled benchmark suite instead of a file")
    parser.add_argument("--workers", type=int, default=1, help="parallel jobs for --suite")
    parser.add_argument("--log-level", default=None, help="overrides SYNTH_LOG")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Command-line entry point.

    Returns:
        0 found, 1 not found, 2 unsatisfiable spec, 3 timeout, 4 usage or parse error
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        setup_logging(args.log_level)
    except ValueError as err:
        print(f"synth: {err}", file=sys.stderr)
        return EXIT_USAGE
    schedules = args.batches or [DEFAULT_SCHEDULE]
    formats = tuple(args.emit or ["gcl"])
    timeout = args.timeout if args.timeout > 0 else None

    if args.suite:
        try:
            configs = suite_configs(schedules=schedules, timeout=timeout, seed=args.seed,
                                    batch_len=args.batch_len, out=args.out, emit_formats=formats)
            for config in configs:
                make_schedule(config.schedule, config.batch_len)
        except ValueError as err:
            print(f"synth: {err}", file=sys.stderr)
            return EXIT_USAGE
        report = args.report or os.path.join(RESULTS_DIR, "results.csv")
        df = bench_all(configs, report=report, workers=args.workers)
        print(df.to_string(index=False))
        print(f"Results written to {report}")
        return 0

    if not args.file:
        parser.print_usage(sys.stderr)
        print("synth: a spec file is required unless --suite is given", file=sys.stderr)
        return EXIT_USAGE
    if len(schedules) > 1:
        print("synth: give one --batches value for a single run", file=sys.stderr)
        return EXIT_USAGE
    try:
        spec = parse_spec(args.file)
        report = run(spec, bound=args.bound, schedule=schedules[0], timeout=timeout, out=args.out,
                     emit_formats=formats, seed=args.seed, batch_len=args.batch_len, report=args.report)
    except FileNotFoundError as err:
        print(f"synth: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (FormulaError, SpecError, ValueError) as err:
        print(f"synth: {err}", file=sys.stderr)
        return EXIT_USAGE

    row = report.row
    print(f"{row.example} k={row.scope} {row.schedule}: {row.result} "
          f"({row.iterations} iterations, {row.g_time:.3f}s)")
    print(f"Artifacts in {report.directory}")
    return EXIT_CODES[report.result.outcome]
