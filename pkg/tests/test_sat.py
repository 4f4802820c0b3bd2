"""
Tests for the CDCL solver, model enumeration and DIMACS files.
"""

import io
import itertools
import random

import pytest

from src.sat.dimacs import read_dimacs, write_dimacs
from src.sat.solver import SatProblem, Solver, assume_and_extend, enumerate_models, solve


def _satisfies(model, clauses):
    return all(any(model[abs(lit)] == (lit > 0) for lit in clause) for clause in clauses)


def _brute_force_count(num_vars, clauses):
    count = 0
    for values in itertools.product([False, True], repeat=num_vars):
        model = {v + 1: values[v] for v in range(num_vars)}
        if _satisfies(model, clauses):
            count += 1
    return count


def _random_3sat(seed, num_vars, num_clauses):
    rng = random.Random(seed)
    return [
        [v if rng.random() < 0.5 else -v for v in rng.sample(range(1, num_vars + 1), 3)]
        for _ in range(num_clauses)
    ]


def _pigeonhole(holes):
    """holes+1 pigeons into ``holes`` holes; variable p*holes+h+1 puts pigeon p in hole h."""
    def var(p, h):
        return p * holes + h + 1

    clauses = [[var(p, h) for h in range(holes)] for p in range(holes + 1)]
    for h in range(holes):
        for p, q in itertools.combinations(range(holes + 1), 2):
            clauses.append([-var(p, h), -var(q, h)])
    return (holes + 1) * holes, clauses


class TestSolver:
    def test_trivial(self):
        solver = Solver(2)
        solver.add_clause([1])
        solver.add_clause([-1, 2])
        assert solver.solve() == {1: True, 2: True}

    def test_empty_clause_is_unsat(self):
        solver = Solver(1)
        assert not solver.add_clause([])
        assert solver.solve() is None

    def test_tautology_is_ignored(self):
        solver = Solver(1)
        assert solver.add_clause([1, -1])
        assert solver.solve() is not None

    def test_conflicting_units(self):
        solver = Solver(1)
        solver.add_clause([1])
        assert not solver.add_clause([-1])

    @pytest.mark.parametrize("holes", [2, 3, 4])
    def test_pigeonhole_is_unsat(self, holes):
        num_vars, clauses = _pigeonhole(holes)
        assert solve(SatProblem.from_clauses(num_vars, clauses)) is None

    @pytest.mark.parametrize("seed", range(8))
    def test_random_instances_agree_with_brute_force(self, seed):
        clauses = _random_3sat(seed, 8, 34)
        model = solve(SatProblem.from_clauses(8, clauses), seed=seed)
        satisfiable = _brute_force_count(8, clauses) > 0
        assert (model is not None) == satisfiable
        if model is not None:
            assert _satisfies(model, clauses)

    def test_incremental_clauses(self):
        solver = Solver(2)
        solver.add_clause([1, 2])
        first = solver.solve()
        assert first is not None
        solver.add_clause([-1])
        second = solver.solve()
        assert second == {1: False, 2: True}
        solver.add_clause([-2])
        assert solver.solve() is None

    def test_stats_are_counted(self):
        num_vars, clauses = _pigeonhole(3)
        solver = Solver(num_vars)
        for clause in clauses:
            solver.add_clause(clause)
        solver.solve()
        assert solver.stats["solves"] == 1
        assert solver.stats["conflicts"] > 0

    def test_deterministic(self):
        clauses = _random_3sat(3, 12, 40)
        problem = SatProblem.from_clauses(12, clauses)
        assert solve(problem) == solve(problem)


class TestEnumeration:
    @pytest.mark.parametrize("seed", range(4))
    def test_counts_match_brute_force(self, seed):
        clauses = _random_3sat(seed + 100, 6, 12)
        problem = SatProblem.from_clauses(6, clauses, range(1, 7))
        models = list(enumerate_models(problem))
        assert len(models) == _brute_force_count(6, clauses)
        assert len({tuple(sorted(m.items())) for m in models}) == len(models)
        assert all(_satisfies(m, clauses) for m in models)

    def test_projection(self):
        # x1 or x2, with x3 free: two projected models on {x1}
        problem = SatProblem.from_clauses(3, [[1, 2]], projection=[1])
        models = list(enumerate_models(problem))
        assert sorted(m[1] for m in models) == [False, True]

    def test_assume_and_extend(self):
        problem = SatProblem.from_clauses(2, [[1, 2]], projection=[1, 2])
        stronger = assume_and_extend(problem, [[-1], [3]])
        assert stronger.num_vars == 3
        assert list(enumerate_models(stronger)) == [{1: False, 2: True}]
        assert len(list(enumerate_models(problem))) == 3


class TestDimacs:
    def test_write(self):
        problem = SatProblem.from_clauses(3, [[1, -2], [3]], projection=[1, 3])
        handle = io.StringIO()
        write_dimacs(problem, handle, comments=["mutex at k=4"])
        assert handle.getvalue().splitlines() == [
            "c mutex at k=4",
            "c projection 1 3",
            "p cnf 3 2",
            "1 -2 0",
            "3 0",
        ]

    def test_read(self):
        text = "c example\np cnf 3 2\n1 -3 0\n2\n3 0\n"
        problem = read_dimacs(io.StringIO(text))
        assert problem.num_vars == 3
        assert problem.clauses == ((1, -3), (2, 3))
        assert problem.projection == (1, 2, 3)

    def test_projection_comment_is_restored(self):
        problem = SatProblem.from_clauses(2, [[1, 2]], projection=[2])
        handle = io.StringIO()
        write_dimacs(problem, handle)
        handle.seek(0)
        assert read_dimacs(handle).projection == (2,)

    @pytest.mark.parametrize("text", [
        "1 2 0\n",
        "p cnf 2\n1 0\n",
        "p cnf 2 1\n3 0\n",
        "p cnf 2 2\n1 0\n",
        "c nothing\n",
    ])
    def test_malformed(self, text):
        with pytest.raises(ValueError):
            read_dimacs(io.StringIO(text))
