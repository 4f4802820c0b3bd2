"""
CDCL SAT solver for the Synthlock project.

Watched literals, first-UIP clause learning, VSIDS branching with a lazy
heap, phase saving, geometric restarts and learnt-clause reduction.
Clauses can be added between calls to :meth:`Solver.solve`, which is how
model enumeration adds blocking clauses.

All choices are deterministic: ties in the branching order go to the lower
variable index, and the seed only perturbs the initial activities.
"""

import heapq
import logging
import random
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)

Model = Dict[int, bool]


class Solver:
    """Incremental CDCL solver over variables 1..n."""

    def __init__(self, num_vars: int = 0, seed: int = 0, var_decay: float = 0.95,
                 restart_first: int = 100, restart_factor: float = 1.5):
        self._rng = random.Random(seed)
        self._seed = seed
        self.var_decay = var_decay
        self.restart_first = restart_first
        self.restart_factor = restart_factor

        self.num_vars = 0
        self.assigns: List[Optional[bool]] = [None]
        self.level: List[int] = [0]
        self.reason: List[Optional[List[int]]] = [None]
        self.activity: List[float] = [0.0]
        self.polarity: List[bool] = [False]
        self.watches: Dict[int, List[List[int]]] = {}
        self.clauses: List[List[int]] = []
        self.learnts: List[List[int]] = []
        self.trail: List[int] = []
        self.trail_lim: List[int] = []
        self.qhead = 0
        self.var_inc = 1.0
        self.heap: List[Tuple[float, int]] = []
        self.ok = True
        self.max_learnts = 2000.0

        self.stats = {"conflicts": 0, "decisions": 0, "propagations": 0, "restarts": 0, "solves": 0}
        self.ensure_vars(num_vars)

    # Variables and values

    def new_var(self) -> int:
        self.num_vars += 1
        v = self.num_vars
        self.assigns.append(None)
        self.level.append(0)
        self.reason.append(None)
        self.activity.append(self._rng.random() * 1e-5 if self._seed else 0.0)
        self.polarity.append(False)
        self.watches[v] = []
        self.watches[-v] = []
        heapq.heappush(self.heap, (-self.activity[v], v))
        return v

    def ensure_vars(self, n: int) -> None:
        while self.num_vars < n:
            self.new_var()

    def value(self, lit: int) -> Optional[bool]:
        val = self.assigns[abs(lit)]
        if val is None:
            return None
        return val if lit > 0 else not val

    def decision_level(self) -> int:
        return len(self.trail_lim)

    # Clause database

    def add_clause(self, lits: Iterable[int]) -> bool:
        """
        Add a permanent clause at decision level 0.

        Returns:
            False when the clause set became unsatisfiable
        """
        if not self.ok:
            return False
        self._cancel_until(0)
        clause = list(dict.fromkeys(lits))
        if clause:
            self.ensure_vars(max(abs(lit) for lit in clause))
        present = set(clause)
        if any(-lit in present for lit in clause):
            return True
        pending = []
        for lit in clause:
            val = self.value(lit)
            if val is True:
                return True
            if val is None:
                pending.append(lit)
        if not pending:
            self.ok = False
            return False
        if len(pending) == 1:
            self._enqueue(pending[0], None)
            if self._propagate() is not None:
                self.ok = False
                return False
            return True
        self._attach(pending)
        self.clauses.append(pending)
        return True

    def _attach(self, clause: List[int]) -> None:
        self.watches[clause[0]].append(clause)
        self.watches[clause[1]].append(clause)

    def _enqueue(self, lit: int, reason: Optional[List[int]]) -> None:
        v = abs(lit)
        self.assigns[v] = lit > 0
        self.level[v] = self.decision_level()
        self.reason[v] = reason
        self.trail.append(lit)

    def _cancel_until(self, target: int) -> None:
        if self.decision_level() <= target:
            return
        start = self.trail_lim[target]
        for lit in reversed(self.trail[start:]):
            v = abs(lit)
            self.polarity[v] = self.assigns[v]
            self.assigns[v] = None
            self.reason[v] = None
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[start:]
        del self.trail_lim[target:]
        self.qhead = len(self.trail)

    # Propagation and analysis

    def _propagate(self) -> Optional[List[int]]:
        """Unit propagation; returns a conflicting clause or None."""
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            self.stats["propagations"] += 1
            false_lit = -p
            watchers = self.watches[false_lit]
            kept: List[List[int]] = []
            conflict = None
            idx = 0
            count = len(watchers)
            while idx < count:
                clause = watchers[idx]
                idx += 1
                if clause[0] == false_lit:
                    clause[0], clause[1] = clause[1], clause[0]
                first = clause[0]
                if self.value(first) is True:
                    kept.append(clause)
                    continue
                for pos in range(2, len(clause)):
                    if self.value(clause[pos]) is not False:
                        clause[1], clause[pos] = clause[pos], clause[1]
                        self.watches[clause[1]].append(clause)
                        break
                else:
                    kept.append(clause)
                    if self.value(first) is False:
                        conflict = clause
                        kept.extend(watchers[idx:])
                        break
                    self._enqueue(first, clause)
            self.watches[false_lit] = kept
            if conflict is not None:
                self.qhead = len(self.trail)
                return conflict
        return None

    def _analyze(self, conflict: List[int]) -> Tuple[List[int], int]:
        seen = set()
        learnt = [0]
        pending = 0
        index = len(self.trail) - 1
        clause = conflict
        p = None
        current = self.decision_level()
        while True:
            for q in (clause if p is None else clause[1:]):
                v = abs(q)
                if v not in seen and self.level[v] > 0:
                    seen.add(v)
                    self._bump(v)
                    if self.level[v] >= current:
                        pending += 1
                    else:
                        learnt.append(q)
            while abs(self.trail[index]) not in seen:
                index -= 1
            p = self.trail[index]
            index -= 1
            clause = self.reason[abs(p)]
            seen.discard(abs(p))
            pending -= 1
            if pending <= 0:
                break
        learnt[0] = -p

        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda i: self.level[abs(learnt[i])])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, self.level[abs(learnt[1])]

    # Branching heuristic

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(1, self.num_vars + 1):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100
            self._rebuild_heap()
        elif self.assigns[v] is None:
            heapq.heappush(self.heap, (-self.activity[v], v))

    def _rebuild_heap(self) -> None:
        self.heap = [(-self.activity[v], v) for v in range(1, self.num_vars + 1) if self.assigns[v] is None]
        heapq.heapify(self.heap)

    def _pick_branch_var(self) -> Optional[int]:
        if len(self.heap) > 8 * self.num_vars + 64:
            self._rebuild_heap()
        while self.heap:
            _, v = heapq.heappop(self.heap)
            if self.assigns[v] is None:
                return v
        return None

    # Learnt clause reduction

    def _reduce_db(self) -> None:
        locked = {id(self.reason[abs(c[0])]) for c in self.learnts if self.reason[abs(c[0])] is c}
        candidates = sorted(
            (c for c in self.learnts if len(c) > 2 and id(c) not in locked),
            key=len,
        )
        removed = {id(c) for c in candidates[len(candidates) // 2:]}
        if not removed:
            return
        self.learnts = [c for c in self.learnts if id(c) not in removed]
        for lit, watchers in self.watches.items():
            self.watches[lit] = [c for c in watchers if id(c) not in removed]
        logger.debug("Removed %d learnt clauses", len(removed))

    # Search

    def _search(self, budget: int) -> Optional[bool]:
        conflicts = 0
        while True:
            conflict = self._propagate()
            if conflict is not None:
                conflicts += 1
                self.stats["conflicts"] += 1
                if self.decision_level() == 0:
                    return False
                learnt, backtrack = self._analyze(conflict)
                self._cancel_until(backtrack)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self._attach(learnt)
                    self.learnts.append(learnt)
                    self._enqueue(learnt[0], learnt)
                self.var_inc /= self.var_decay
            else:
                if conflicts >= budget:
                    self._cancel_until(0)
                    return None
                if len(self.learnts) - len(self.trail) >= self.max_learnts:
                    self._reduce_db()
                    self.max_learnts *= 1.1
                v = self._pick_branch_var()
                if v is None:
                    return True
                self.stats["decisions"] += 1
                self.trail_lim.append(len(self.trail))
                self._enqueue(v if self.polarity[v] else -v, None)

    def solve(self) -> Optional[Model]:
        """
        Search for a model of the current clause set.

        Returns:
            var -> value for every variable, or None when unsatisfiable
        """
        self.stats["solves"] += 1
        if not self.ok:
            return None
        self._cancel_until(0)
        budget = float(self.restart_first)
        while True:
            status = self._search(int(budget))
            if status is True:
                return {v: bool(self.assigns[v]) for v in range(1, self.num_vars + 1)}
            if status is False:
                self.ok = False
                return None
            self.stats["restarts"] += 1
            budget *= self.restart_factor


@dataclass(frozen=True)
class SatProblem:
    """
    A clause set with the variables models are projected onto.

    ``blocking`` holds clauses added by enumeration; they are kept apart so
    a strengthened problem can drop them.
    """

    num_vars: int
    clauses: Tuple[Tuple[int, ...], ...]
    projection: Tuple[int, ...] = ()
    blocking: Tuple[Tuple[int, ...], ...] = field(default=())

    @classmethod
    def from_clauses(cls, num_vars: int, clauses: Iterable[Sequence[int]],
                     projection: Iterable[int] = ()) -> "SatProblem":
        return cls(num_vars, tuple(tuple(c) for c in clauses), tuple(projection))

    def all_clauses(self) -> Iterator[Tuple[int, ...]]:
        yield from self.clauses
        yield from self.blocking


def _load(problem: SatProblem, seed: int) -> Solver:
    solver = Solver(problem.num_vars, seed=seed)
    for clause in problem.all_clauses():
        if not solver.add_clause(clause):
            break
    return solver


def solve(problem: SatProblem, seed: int = 0) -> Optional[Model]:
    """A total satisfying assignment, or None when ``problem`` is unsatisfiable."""
    return _load(problem, seed).solve()


class Enumerator:
    """
    Stream of models projected onto ``problem.projection``.

    After each model a blocking clause over the projection variables is
    added, so no projected model repeats and the stream ends at UNSAT.
    """

    def __init__(self, problem: SatProblem, seed: int = 0):
        self.problem = problem
        self.solver = _load(problem, seed)
        self.blocking: List[Tuple[int, ...]] = []
        self.exhausted = False

    def add_clauses(self, clauses: Iterable[Sequence[int]]) -> None:
        """Strengthen the remaining stream."""
        for clause in clauses:
            self.solver.add_clause(clause)

    def next(self) -> Optional[Model]:
        if self.exhausted:
            return None
        model = self.solver.solve()
        if model is None:
            self.exhausted = True
            return None
        projected = {v: model[v] for v in self.problem.projection}
        block = tuple(-v if value else v for v, value in projected.items())
        self.blocking.append(block)
        self.solver.add_clause(block)
        return projected

    def __iter__(self) -> Iterator[Model]:
        while True:
            model = self.next()
            if model is None:
                return
            yield model


def enumerate_models(problem: SatProblem, seed: int = 0) -> Iterator[Model]:
    """All models of ``problem`` projected onto its projection variables, without repeats."""
    return iter(Enumerator(problem, seed))


def assume_and_extend(problem: SatProblem, clauses: Iterable[Sequence[int]],
                      keep_blocking: bool = True) -> SatProblem:
    """
    Strengthen a problem with extra clauses.

    Args:
        problem: base problem
        clauses: clauses over declared or fresh variables
        keep_blocking: keep the blocking clauses recorded on ``problem``

    Returns:
        A new problem whose models are the models of both
    """
    extra = tuple(tuple(c) for c in clauses)
    num_vars = max([problem.num_vars] + [abs(lit) for c in extra for lit in c])
    return SatProblem(
        num_vars=num_vars,
        clauses=problem.clauses + extra,
        projection=problem.projection,
        blocking=problem.blocking if keep_blocking else (),
    )
