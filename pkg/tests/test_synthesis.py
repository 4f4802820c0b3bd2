"""
Tests for batch schedules and the counterexample-guided searches.
"""

import json

import pytest

from src.bench.dsl import parse_spec_text
from src.checking.checker import check
from src.checking.composition import ProductAction, compose
from src.checking.ltl import parse_ltl
from src.codegen.programs import emit, simulate
from src.data.benchmarks import mutex, phil
from src.errors import SynthesisError
from src.logic.parser import parse_formula
from src.lts.core import FinitePath, Lts, Vocabulary
from src.spec.model import NamedFormula, ProcessSpec, named_sync_axioms, not_of_path, satisfies
from src.synthesis.schedules import BatchSchedule, make_schedule
from src.synthesis.search import (
    CexStore,
    Outcome,
    RunLog,
    SynthesisResult,
    _CandidatePool,
    _composable_tuple,
    _Searcher,
    initial_candidates,
    project_and_refine,
    simple_search,
    start_search,
)


@pytest.fixture
def toy_spec():
    return ProcessSpec("Toy", Vocabulary(locals=("p",), actions=("a",)))


class TestSchedules:
    @pytest.mark.parametrize("name,bounds", [
        ("exp2", (2, 4, 8)),
        ("exp4", (4, 16, 64)),
        ("exp8", (8, 64, 512)),
        ("lineal10", (10, 20, 30)),
        ("3,5,9", (3, 5, 9)),
    ])
    def test_expansion(self, name, bounds):
        schedule = make_schedule(name, length=3)
        assert schedule.bounds == bounds
        assert schedule.use_cex
        assert len(schedule) == 3

    def test_nocex(self):
        schedule = make_schedule("nocex")
        assert schedule.bounds == (None,)
        assert not schedule.use_cex

    @pytest.mark.parametrize("name,length", [("fast", 3), ("exp2", 0), ("0,2", 3)])
    def test_rejected(self, name, length):
        with pytest.raises(ValueError):
            make_schedule(name, length)

    def test_empty_schedule(self):
        with pytest.raises(ValueError):
            BatchSchedule("none", ())


class TestCounterexamples:
    def test_store_deduplicates(self, mutex_lts, mutex_vocab):
        product = compose([mutex_lts, mutex_lts], mutex_vocab)
        path = FinitePath(((5, 5), (3, 5)), (ProductAction(0, "enterTry"),))
        store = CexStore()
        assert store.add(path, product)
        assert not store.add(path, product)
        assert len(store) == 1
        assert list(store) == [path]

    def test_store_rejects_non_moves(self, mutex_lts, mutex_vocab):
        product = compose([mutex_lts, mutex_lts], mutex_vocab)
        with pytest.raises(SynthesisError):
            CexStore().add(FinitePath(((5, 5), (1, 5)), (ProductAction(0, "getLock"),)), product)

    def test_project_and_refine(self, mutex_vocab):
        path = FinitePath(
            ((5, 5), (3, 5), (1, 2)),
            (ProductAction(0, "enterTry"), ProductAction(0, "getLock")),
        )
        actions = mutex_vocab.all_actions
        expected = not_of_path(FinitePath((5, 3, 1), ("enterTry", "getLock")), actions)
        assert project_and_refine(path, 0, actions) == expected
        assert project_and_refine(path, 1, actions) == not_of_path(FinitePath((5, 5, 2), (None, "ch_m")), actions)

    def test_process_that_stays_put(self, mutex_vocab):
        path = FinitePath(((5, 5), (3, 5)), (ProductAction(0, "enterTry"),))
        assert project_and_refine(path, 1, mutex_vocab.all_actions) is None


class TestRunRecords:
    def test_run_log_writes_json_lines(self, tmp_path):
        target = tmp_path / "run.jsonl"
        log = RunLog(str(target))
        log.record(iteration=1, verdict="fails")
        log.record(iteration=2, verdict="holds")
        log.close()
        lines = target.read_text(encoding="utf-8").splitlines()
        assert [json.loads(line)["iteration"] for line in lines] == [1, 2]
        assert log.records[1]["verdict"] == "holds"

    def test_memory_only_log(self):
        log = RunLog()
        log.record(iteration=1)
        log.close()
        assert log.records == [{"iteration": 1}]

    def test_summary(self):
        result = SynthesisResult(Outcome.TIMEOUT, iterations=7, g_time=1.23456, deadlocks=[(1, 2)])
        summary = result.summary()
        assert summary["outcome"] == "TO"
        assert summary["g_time"] == 1.235
        assert summary["deadlocks"] == [[1, 2]]
        assert not result.found


class TestSimpleSearch:
    def test_trivial_property_is_found(self, toy_spec):
        result = simple_search([toy_spec], parse_ltl("G true"), 2, timeout=None)
        assert result.outcome == Outcome.FOUND
        assert result.iterations == 1
        assert len(result.solution) == 1
        assert result.reachable >= 1
        assert result.total_states == 2

    def test_unsatisfiable_property_is_not_found(self, toy_spec):
        result = simple_search([toy_spec], parse_ltl("G false"), 1, timeout=None)
        assert result.outcome == Outcome.NOT_FOUND
        assert result.iterations > 0
        assert result.cex_count > 0
        assert result.solution == []

    def test_inconsistent_spec_is_unsat(self, toy_spec):
        never = toy_spec.extend([NamedFormula("never", parse_formula("forall s . not init(s)"))])
        assert simple_search([never], parse_ltl("G true"), 2, timeout=None).outcome == Outcome.UNSAT


class TestBatchSearch:
    def test_found_in_first_batch(self, toy_spec):
        result = start_search([toy_spec], parse_ltl("G true"), 2, schedule="exp2", timeout=None)
        assert result.outcome == Outcome.FOUND
        assert result.schedule == "exp2"
        assert result.batches == 1

    def test_nocex_schedule_exhausts(self, toy_spec):
        result = start_search([toy_spec], parse_ltl("G false"), 2, schedule="nocex", timeout=None)
        assert result.outcome == Outcome.NOT_FOUND
        assert result.batches == 1

    def test_unsat(self, toy_spec):
        never = toy_spec.extend([NamedFormula("never", parse_formula("forall s . not init(s)"))])
        assert start_search([never], parse_ltl("G true"), 2, timeout=None).outcome == Outcome.UNSAT

    def test_timeout(self, toy_spec):
        assert start_search([toy_spec], parse_ltl("G true"), 2, timeout=0).outcome == Outcome.TIMEOUT

    def test_log_records_iterations(self, toy_spec):
        log = RunLog()
        result = start_search([toy_spec], parse_ltl("G true"), 2, schedule=make_schedule("exp2", 2),
                              timeout=None, log=log)
        assert len(log.records) == result.iterations
        assert log.records[-1]["verdict"] == "holds"


class TestInitialTuple:
    @pytest.fixture
    def lock_spec(self, mutex_vocab):
        return ProcessSpec("P", mutex_vocab, tuple(named_sync_axioms(mutex_vocab)))

    @pytest.fixture
    def held_elsewhere(self, mutex_lts):
        # same process, started in state 2 where the lock is taken by someone else
        return Lts.build(mutex_lts.num_states, {s: mutex_lts.label(s) for s in mutex_lts.states},
                         mutex_lts.transitions, [2], props=mutex_lts.props, actions=mutex_lts.actions,
                         env_actions=mutex_lts.env_actions)

    def _searcher(self, spec, log=None):
        return _Searcher([spec, spec], parse_ltl("G true"), 6, None, 0, False, False, log, True)

    def test_disagreeing_initial_states_are_skipped(self, lock_spec, mutex_lts, held_elsewhere):
        log = RunLog()
        searcher = self._searcher(lock_spec, log)
        pools = [_CandidatePool(iter([mutex_lts]), 4), _CandidatePool(iter([held_elsewhere, mutex_lts]), 4)]
        assert _composable_tuple(searcher, pools) == [mutex_lts, mutex_lts]
        assert searcher.skipped == 1
        assert searcher.iterations == 0
        assert [record["verdict"] for record in log.records] == ["skipped"]
        assert log.records[0]["instances"] == [1, 1]

    def test_no_composable_tuple_within_the_limit(self, lock_spec, mutex_lts, held_elsewhere):
        searcher = self._searcher(lock_spec)
        pools = [_CandidatePool(iter([mutex_lts]), 4), _CandidatePool(iter([held_elsewhere, mutex_lts]), 1)]
        assert _composable_tuple(searcher, pools) is None
        assert searcher.skipped == 1

    def test_pool_caches_and_caps(self):
        pool = _CandidatePool(iter("abc"), 2)
        assert [pool.get(j) for j in range(3)] == ["a", "b", None]
        assert pool.get(0) == "a"

    def test_candidates_without_preconditions_use_the_plain_spec(self, toy_spec):
        first = next(initial_candidates(toy_spec, 2))
        assert satisfies(toy_spec, first)

    def test_skipped_tuples_are_counted(self, lock_spec, mutex_lts, held_elsewhere):
        searcher = self._searcher(lock_spec)
        assert searcher.compose([mutex_lts, held_elsewhere]) is None
        assert searcher.compose([mutex_lts, mutex_lts]) is not None
        result = searcher.finish(Outcome.NOT_FOUND, "exp2")
        assert result.skipped == 1
        assert result.summary()["skipped_tuples"] == 1


@pytest.mark.slow
class TestMutex:
    def test_two_process_mutex(self):
        parsed = parse_spec_text(mutex(2))
        system = parsed.system
        specs = list(system.processes)
        result = start_search(specs, system.prop, parsed.bound, schedule="exp2", timeout=None)
        assert result.outcome == Outcome.FOUND
        for spec, lts in zip(specs, result.solution):
            assert satisfies(spec, lts)
        product = compose(result.solution, [s.vocab for s in specs])
        assert check(product, system.prop).holds
        assert result.reachable <= result.total_states

    def test_exp2_needs_no_more_iterations_than_nocex(self):
        parsed = parse_spec_text(mutex(2))
        specs, prop = list(parsed.system.processes), parsed.system.prop
        exp2 = start_search(specs, prop, parsed.bound, schedule="exp2", timeout=None)
        nocex = start_search(specs, prop, parsed.bound, schedule="nocex", timeout=None)
        assert exp2.found and nocex.found
        assert exp2.iterations <= nocex.iterations


@pytest.mark.slow
class TestPhilosophers:
    @pytest.fixture(scope="class")
    def parsed(self):
        return parse_spec_text(phil(3))

    def test_initial_instances_compose(self, parsed):
        specs = list(parsed.system.processes)
        initial = [next(initial_candidates(spec, parsed.bound)) for spec in specs]
        product = compose(initial, parsed.system.vocabularies)
        assert product.initials

    def test_three_philosophers(self, parsed):
        system = parsed.system
        result = start_search(list(system.processes), system.prop, parsed.bound, schedule="exp2", timeout=900)
        assert result.outcome == Outcome.FOUND
        assert result.skipped == 0
        product = compose(result.solution, system.vocabularies)
        assert check(product, system.prop).holds
        assert 0 < result.reachable <= result.total_states
        assert result.summary()["reachable_states"] == result.reachable
        program = emit(result.solution, system.vocabularies, name=system.name)
        assert check(simulate(program), system.prop).holds

    def test_exp2_against_nocex(self, parsed):
        system = parsed.system
        specs = list(system.processes)
        exp2 = start_search(specs, system.prop, parsed.bound, schedule="exp2", timeout=900)
        nocex = start_search(specs, system.prop, parsed.bound, schedule="nocex", timeout=300)
        assert exp2.found
        assert exp2.cex_count > 0
        if nocex.outcome != Outcome.TIMEOUT:
            assert exp2.iterations <= nocex.iterations
