"""
Counterexample-guided search for the Synthlock project.

This module provides the two search procedures:

- :func:`simple_search` walks the instance streams of every process depth
  first and model-checks each complete tuple.
- :func:`start_search` fixes one initial instance per process and searches
  its refinements in batches; every batch bounds how many instances each
  level may try, and the counterexamples of a batch prune the refinements
  of the next one.
"""

import json
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Sequence

from constants import DEBUG_VALIDATION, DEDUP_INSTANCES, DEFAULT_TIMEOUT, INITIAL_CANDIDATES, REFINE_MID_BATCH
from src.checking.checker import check, lasso_to_path, valid_step
from src.checking.composition import ProductAction, ProductLts, compose
from src.checking.ltl import LtlFormula
from src.errors import CompositionError, SpecError, SynthesisError
from src.finder.model_finder import InstanceStream, build_problem, first_instance, open_stream
from src.lts.core import FinitePath, Lts
from src.spec.model import ProcessSpec, not_of_path, oplus, ref_spec, satisfies, saturate
from src.synthesis.schedules import BatchSchedule, make_schedule

logger = logging.getLogger(__name__)


class Outcome(str, Enum):
    FOUND = "F"
    NOT_FOUND = "N"
    UNSAT = "U"
    TIMEOUT = "TO"


class _Timeout(Exception):
    pass


@dataclass
class SynthesisResult:
    """
    Outcome and statistics of a search.

    Attributes:
        outcome: F, N, U or TO
        solution: one LTS per process when found
        iterations: model-check calls
        l_time: longest single instance find (seconds)
        g_time: total search time (seconds)
        reachable: reachable product states of the solution
        total_states: product of the component state counts
        total_states_props: 2 to the number of product propositions
        cex_count: distinct counterexamples collected
        schedule: schedule name (``simple`` for the simple search)
        batches: batches started
        skipped: tuples whose initial states disagree on shared variables
        deadlocks: reachable deadlocked product states of the solution
    """

    outcome: Outcome
    solution: List[Lts] = field(default_factory=list)
    iterations: int = 0
    l_time: float = 0.0
    g_time: float = 0.0
    reachable: int = 0
    total_states: int = 0
    total_states_props: int = 0
    cex_count: int = 0
    schedule: str = "simple"
    batches: int = 0
    skipped: int = 0
    deadlocks: List[Any] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.outcome == Outcome.FOUND

    def summary(self) -> Dict[str, Any]:
        """JSON-ready summary (solutions excluded)."""
        return {
            "outcome": self.outcome.value,
            "iterations": self.iterations,
            "l_time": round(self.l_time, 3),
            "g_time": round(self.g_time, 3),
            "reachable_states": self.reachable,
            "total_states": self.total_states,
            "total_states_props": self.total_states_props,
            "cex_count": self.cex_count,
            "schedule": self.schedule,
            "batches": self.batches,
            "skipped_tuples": self.skipped,
            "deadlocks": [list(d) for d in self.deadlocks],
        }


class CexStore:
    """Insertion-ordered set of validated product counterexample paths."""

    def __init__(self):
        self.paths: List[FinitePath] = []
        self._seen = set()

    def add(self, path: FinitePath, product: ProductLts) -> bool:
        """Store ``path``; False when it was already known."""
        for (s, a, t) in path.steps():
            if not valid_step(product, s, a, t):
                raise SynthesisError(f"Counterexample step {s} -{a}-> {t} is not a product move")
        key = (path.states, path.actions)
        if key in self._seen:
            return False
        self._seen.add(key)
        self.paths.append(path)
        return True

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)


class RunLog:
    """
    Per-iteration search log, kept in memory and optionally written as JSON lines.
    """

    def __init__(self, path: Optional[str] = None):
        self.path = path
        self.records: List[Dict[str, Any]] = []
        self._handle = open(path, "w", encoding="utf-8") if path else None

    def record(self, **fields: Any) -> None:
        self.records.append(fields)
        if self._handle is not None:
            self._handle.write(json.dumps(fields) + "\n")
            self._handle.flush()

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None


def project_and_refine(path: FinitePath, index: int, actions: Sequence[str]) -> Optional[Any]:
    """
    Exclusion formula of a product path's projection on process ``index``.

    Returns:
        The formula over the pinned constants, or None when the process
        never changes state along the path
    """
    states = tuple(s[index] for s in path.states)
    labels = tuple(
        a.action if isinstance(a, ProductAction) and a.process == index else None
        for a in path.actions
    )
    projected = FinitePath(states, labels)
    if projected.is_stutter_only():
        return None
    return not_of_path(projected, actions)


class _Searcher:
    def __init__(self, specs: Sequence[ProcessSpec], prop: LtlFormula, k: int, timeout: Optional[float],
                 seed: int, dedup: bool, validate: bool, log: Optional[RunLog], env_moves: bool):
        if not specs:
            raise SpecError("Nothing to synthesize")
        self.specs = list(specs)
        self.prop = prop
        self.k = k
        self.seed = seed
        self.dedup = dedup
        self.validate = validate
        self.log = log
        self.env_moves = env_moves
        self.start = time.perf_counter()
        self.deadline = None if timeout is None else self.start + timeout
        self.iterations = 0
        self.l_time = 0.0
        self.cexs = CexStore()
        self.batch = 0
        self.skipped = 0
        self.counts: List[int] = [0] * len(self.specs)

    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    def tick(self) -> None:
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise _Timeout()

    def open(self, spec: ProcessSpec, problem=None) -> InstanceStream:
        if problem is None:
            problem = build_problem(spec, self.k)
        return InstanceStream(spec, self.k, problem[0], problem[1], seed=self.seed, dedup=self.dedup,
                              validate=self.validate)

    def next_instance(self, stream: InstanceStream) -> Optional[Lts]:
        self.tick()
        lts = stream.next()
        self.l_time = max(self.l_time, stream.find_time)
        return lts

    def compose(self, chosen: List[Lts]) -> Optional[ProductLts]:
        """Product of a (possibly partial) tuple, or None when its initial states disagree."""
        try:
            return compose(chosen, [s.vocab for s in self.specs[:len(chosen)]], env_moves=self.env_moves)
        except CompositionError as err:
            self.skipped += 1
            logger.debug("Skipping tuple: %s", err)
            if self.log is not None:
                self.log.record(
                    iteration=self.iterations,
                    batch=self.batch,
                    instances=list(self.counts[:len(chosen)]),
                    verdict="skipped",
                    lasso_length=None,
                    cex_count=len(self.cexs),
                    elapsed=round(self.elapsed(), 6),
                )
            return None

    def check_tuple(self, chosen: List[Lts]) -> bool:
        """Model-check one complete tuple; store its counterexample."""
        self.tick()
        product = self.compose(chosen)
        if product is None:
            return False
        self.iterations += 1
        result = check(product, self.prop)
        lasso_length = None
        if not result.holds:
            path = lasso_to_path(result.lasso)
            lasso_length = len(path)
            if self.cexs.add(path, product):
                logger.debug("Counterexample %d of length %d", len(self.cexs), lasso_length)
        logger.debug("Iteration %d: %s", self.iterations, "holds" if result.holds else "fails")
        if self.log is not None:
            self.log.record(
                iteration=self.iterations,
                batch=self.batch,
                instances=list(self.counts),
                verdict="holds" if result.holds else "fails",
                lasso_length=lasso_length,
                cex_count=len(self.cexs),
                elapsed=round(self.elapsed(), 6),
            )
        return result.holds

    def finish(self, outcome: Outcome, schedule: str, solution: Optional[List[Lts]] = None) -> SynthesisResult:
        result = SynthesisResult(
            outcome=outcome,
            iterations=self.iterations,
            l_time=self.l_time,
            cex_count=len(self.cexs),
            schedule=schedule,
            batches=self.batch,
            skipped=self.skipped,
        )
        if solution is not None:
            self._reverify(solution)
            product = compose(solution, [s.vocab for s in self.specs], env_moves=self.env_moves)
            result.solution = list(solution)
            result.reachable = len(product.explore())
            result.total_states = product.total_states
            result.total_states_props = 2 ** len(product.props)
            result.deadlocks = product.deadlocks()
        result.g_time = self.elapsed()
        logger.info("Search %s after %d iterations (%.3fs)", outcome.value, result.iterations, result.g_time)
        return result

    def _reverify(self, solution: List[Lts]) -> None:
        for spec, lts in zip(self.specs, solution):
            if not satisfies(spec, lts):
                raise SynthesisError(f"Solution for {spec.name} violates its specification")
        product = compose(solution, [s.vocab for s in self.specs], env_moves=self.env_moves)
        if not check(product, self.prop).holds:
            raise SynthesisError("Solution product violates the property")


def _any_unsat(searcher: _Searcher) -> bool:
    for spec in searcher.specs:
        searcher.tick()
        if first_instance(spec, searcher.k, seed=searcher.seed) is None:
            logger.info("%s has no instance with %d states", spec.name, searcher.k)
            return True
    return False


def simple_search(specs: Sequence[ProcessSpec], prop: LtlFormula, k: int, timeout: Optional[float] = DEFAULT_TIMEOUT,
                  seed: int = 0, dedup: bool = DEDUP_INSTANCES, validate: bool = DEBUG_VALIDATION,
                  log: Optional[RunLog] = None, env_moves: bool = True) -> SynthesisResult:
    """
    Depth-first search over all instance tuples.

    Args:
        specs: one specification per process
        prop: global property
        k: states per process
        timeout: seconds, None for no limit

    Returns:
        Found with the first tuple whose product satisfies ``prop``,
        Unsat when some process has no instance, NotFound otherwise
    """
    searcher = _Searcher(specs, prop, k, timeout, seed, dedup, validate, log, env_moves)
    try:
        if _any_unsat(searcher):
            return searcher.finish(Outcome.UNSAT, "simple")
        problems = [build_problem(spec, k) for spec in searcher.specs]
        last = len(problems) - 1

        def descend(i: int, chosen: List[Lts]) -> Optional[List[Lts]]:
            stream = searcher.open(searcher.specs[i], problems[i])
            searcher.counts[i] = 0
            while True:
                lts = searcher.next_instance(stream)
                if lts is None:
                    return None
                searcher.counts[i] += 1
                if i == last:
                    if searcher.check_tuple(chosen + [lts]):
                        return chosen + [lts]
                else:
                    found = descend(i + 1, chosen + [lts])
                    if found is not None:
                        return found

        solution = descend(0, [])
        if solution is None:
            return searcher.finish(Outcome.NOT_FOUND, "simple")
        return searcher.finish(Outcome.FOUND, "simple", solution)
    except _Timeout:
        logger.info("Search timed out after %d iterations", searcher.iterations)
        return searcher.finish(Outcome.TIMEOUT, "simple")


def initial_candidates(spec: ProcessSpec, k: int, seed: int = 0, dedup: bool = DEDUP_INSTANCES) -> Iterator[Lts]:
    """
    Instances of the saturated spec, or of ``spec`` itself when saturation
    is impossible or leaves no instance with k states.
    """
    try:
        saturated = saturate(spec)
    except SpecError as err:
        logger.warning("Cannot saturate %s: %s", spec.name, err)
        saturated = None
    if saturated is not None:
        stream = open_stream(saturated, k, seed=seed, dedup=dedup)
        first = stream.next()
        if first is not None:
            yield first
            yield from stream
            return
        logger.warning("Saturated %s has no instance with %d states; using the plain specification", spec.name, k)
    yield from open_stream(spec, k, seed=seed, dedup=dedup)


class _CandidatePool:
    """Cached prefix of a candidate stream, at most ``limit`` long."""

    def __init__(self, candidates: Iterator[Lts], limit: int):
        self._candidates = candidates
        self.limit = limit
        self.seen: List[Lts] = []
        self._exhausted = False

    def get(self, j: int) -> Optional[Lts]:
        while len(self.seen) <= j and len(self.seen) < self.limit and not self._exhausted:
            lts = next(self._candidates, None)
            if lts is None:
                self._exhausted = True
            else:
                self.seen.append(lts)
        return self.seen[j] if j < len(self.seen) else None


def _composable_tuple(searcher: _Searcher, pools: List[_CandidatePool],
                      chosen: Optional[List[Lts]] = None) -> Optional[List[Lts]]:
    """First tuple of pool entries, in depth-first order, whose initial states agree."""
    chosen = chosen or []
    i = len(chosen)
    j = 0
    while True:
        searcher.tick()
        lts = pools[i].get(j)
        if lts is None:
            return None
        j += 1
        searcher.counts[i] = j
        candidate = chosen + [lts]
        if searcher.compose(candidate) is None:
            continue
        if i == len(pools) - 1:
            return candidate
        found = _composable_tuple(searcher, pools, candidate)
        if found is not None:
            return found


class _BatchSearch:
    def __init__(self, searcher: _Searcher, initial: List[Lts], schedule: BatchSchedule, refine_mid_batch: bool):
        self.searcher = searcher
        self.initial = initial
        self.schedule = schedule
        self.refine_mid_batch = refine_mid_batch
        self.refined: List[ProcessSpec] = []
        self._problems: Dict[int, Any] = {}
        self._applied: Dict[int, int] = {}

    def refine(self, index: int) -> ProcessSpec:
        spec = self.searcher.specs[index]
        refined = ref_spec(spec, self.initial[index])
        if not self.schedule.use_cex:
            return refined
        actions = spec.vocab.all_actions
        for path in self.searcher.cexs:
            psi = project_and_refine(path, index, actions)
            if psi is None:
                logger.debug("Projection on %s stays put; skipped", spec.name)
                continue
            refined = oplus(refined, psi)
        return refined

    def start_batch(self) -> None:
        self.refined = [self.refine(i) for i in range(len(self.searcher.specs))]
        self._problems = {}
        self._applied = {i: len(self.searcher.cexs) for i in range(len(self.refined))}

    def problem(self, index: int):
        if self.refine_mid_batch and self.schedule.use_cex and self._applied[index] != len(self.searcher.cexs):
            self.refined[index] = self.refine(index)
            self._applied[index] = len(self.searcher.cexs)
            self._problems.pop(index, None)
        if index not in self._problems:
            self._problems[index] = build_problem(self.refined[index], self.searcher.k)
        return self._problems[index]

    def batch_synt(self, i: int, bound: Optional[int], chosen: List[Lts]) -> Optional[List[Lts]]:
        searcher = self.searcher
        stream = searcher.open(self.refined[i], self.problem(i))
        searcher.counts[i] = 0
        last = len(searcher.specs) - 1
        j = 0
        while bound is None or j < bound:
            lts = searcher.next_instance(stream)
            if lts is None:
                break
            j += 1
            searcher.counts[i] = j
            if i == last:
                if searcher.check_tuple(chosen + [lts]):
                    return chosen + [lts]
            else:
                found = self.batch_synt(i + 1, bound, chosen + [lts])
                if found is not None:
                    return found
        return None


def start_search(specs: Sequence[ProcessSpec], prop: LtlFormula, k: int, schedule=None,
                 timeout: Optional[float] = DEFAULT_TIMEOUT, seed: int = 0, dedup: bool = DEDUP_INSTANCES,
                 validate: bool = DEBUG_VALIDATION, log: Optional[RunLog] = None,
                 refine_mid_batch: bool = REFINE_MID_BATCH, env_moves: bool = True,
                 candidates: int = INITIAL_CANDIDATES) -> SynthesisResult:
    """
    Batch search over refinements of fixed initial instances.

    Args:
        specs: one specification per process
        prop: global property
        k: states per process
        schedule: a BatchSchedule or a schedule name (default exp2)
        timeout: seconds, None for no limit
        refine_mid_batch: apply counterexamples as soon as they are found
        candidates: saturated instances per process tried for initial
            states that agree on the shared variables

    Returns:
        Found on the first batch that yields a solution; Unsat when some
        process has no instance; NotFound when the schedule is exhausted
        or no initial tuple composes
    """
    if schedule is None or isinstance(schedule, str):
        schedule = make_schedule(schedule or "exp2")
    searcher = _Searcher(specs, prop, k, timeout, seed, dedup, validate, log, env_moves)
    try:
        pools = [_CandidatePool(initial_candidates(spec, k, seed=seed, dedup=dedup), candidates)
                 for spec in searcher.specs]
        for spec, pool in zip(searcher.specs, pools):
            searcher.tick()
            if pool.get(0) is None:
                logger.info("%s has no instance with %d states", spec.name, k)
                return searcher.finish(Outcome.UNSAT, schedule.name)
        initial = _composable_tuple(searcher, pools)
        if initial is None:
            logger.warning("No composable initial tuple among the first %d instances per process", candidates)
            return searcher.finish(Outcome.NOT_FOUND, schedule.name)

        batches = _BatchSearch(searcher, initial, schedule, refine_mid_batch)
        for bound in schedule.bounds:
            searcher.batch += 1
            logger.info("Batch %d (bound %s, %d counterexamples)", searcher.batch, bound, len(searcher.cexs))
            batches.start_batch()
            solution = batches.batch_synt(0, bound, [])
            if solution is not None:
                return searcher.finish(Outcome.FOUND, schedule.name, solution)
        logger.info("Schedule %s exhausted with %d counterexamples", schedule.name, len(searcher.cexs))
        return searcher.finish(Outcome.NOT_FOUND, schedule.name)
    except _Timeout:
        logger.info("Search timed out after %d iterations", searcher.iterations)
        return searcher.finish(Outcome.TIMEOUT, schedule.name)
