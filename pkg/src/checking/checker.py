"""
LTL model checking for the Synthlock project.

Checks a transition system against an LTL property by searching the
product of the system with the Büchi automaton of the negated property
for an accepting cycle (nested depth-first search). States without
successors are completed with a self-loop and reported as deadlocks.

Any object with ``initials``, ``successors(state)`` returning
``(action, target)`` pairs and ``holds(atom, state)`` can be checked; a
:class:`ProductLts` fits directly and :class:`LtsSystem` adapts an LTS.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Hashable, List, Optional, Sequence, Set, Tuple

from src.checking import ltl
from src.checking.buchi import BuchiState, to_buchi
from src.checking.ltl import LtlFormula
from src.errors import CheckerError
from src.lts.core import FinitePath, Lts

logger = logging.getLogger(__name__)

# Action of the self-loop added to a deadlocked state.
DEADLOCK = "deadlock"


class LtsSystem:
    """Checking view of a plain LTS; atoms are its propositions."""

    def __init__(self, lts: Lts):
        self.lts = lts
        self.initials = tuple(sorted(lts.initials))

    def successors(self, state: int):
        return self.lts.moves(state)

    def holds(self, atom: str, state: int) -> bool:
        return self.lts.holds(atom, state)

    def has_atom(self, atom: str) -> bool:
        return self.lts.has_prop(atom)


@dataclass(frozen=True)
class Lasso:
    """A stem ending where a loop starts and ends."""

    stem: FinitePath
    loop: FinitePath

    def __post_init__(self):
        if len(self.loop) < 1:
            raise CheckerError("A lasso loop needs at least one step")
        if self.stem.states[-1] != self.loop.states[0] or self.loop.states[0] != self.loop.states[-1]:
            raise CheckerError("Lasso loop does not close at the end of the stem")

    def __len__(self) -> int:
        return len(self.stem) + len(self.loop)


@dataclass
class CheckResult:
    """
    Verdict of a check.

    Attributes:
        holds: every infinite execution satisfies the property
        lasso: a violating execution when the property fails
        deadlocks: system states without successors met during the search
        explored: product (system, automaton) states visited
    """

    holds: bool
    lasso: Optional[Lasso] = None
    deadlocks: List[Any] = field(default_factory=list)
    explored: int = 0


def lasso_to_path(lasso: Lasso) -> FinitePath:
    """Stem followed by the loop, the closing state appearing once at the end."""
    return FinitePath(
        lasso.stem.states + lasso.loop.states[1:],
        lasso.stem.actions + lasso.loop.actions,
    )


def lasso_word(system, lasso: Lasso, atoms: Sequence[str]):
    """Stem and loop letters of the infinite word a lasso denotes."""
    def letter(state):
        return frozenset(a for a in atoms if system.holds(a, state))

    stem = [letter(s) for s in lasso.stem.states[:-1]]
    loop = [letter(s) for s in lasso.loop.states[:-1]]
    return stem, loop


def valid_step(system, source, action, target) -> bool:
    """Whether a step is a system move or the completion loop of a deadlock."""
    moves = system.successors(source)
    if not moves:
        return action == DEADLOCK and source == target
    return (action, target) in moves


def validate_lasso(system, prop: LtlFormula, lasso: Lasso) -> None:
    """
    Raise CheckerError unless ``lasso`` is an execution violating ``prop``.
    """
    path = lasso_to_path(lasso)
    if path.states[0] not in system.initials:
        raise CheckerError("Counterexample does not start in an initial state")
    for (s, a, t) in path.steps():
        if not valid_step(system, s, a, t):
            raise CheckerError(f"Counterexample step {s} -{a}-> {t} is not a move")
    stem, loop = lasso_word(system, lasso, sorted(ltl.atom_names(prop)))
    if ltl.eval_lasso(prop, stem, loop):
        raise CheckerError("Counterexample satisfies the property")


class _Search:
    def __init__(self, system, automaton):
        self.system = system
        self.automaton = automaton
        self.deadlocks: Dict[Hashable, None] = {}
        self._cache: Dict[Tuple[Hashable, BuchiState], List[Tuple[Any, Tuple[Hashable, BuchiState]]]] = {}

    def admits(self, q: BuchiState, state) -> bool:
        return self.automaton.admits(q, lambda atom: self.system.holds(atom, state))

    def initials(self) -> List[Tuple[Hashable, BuchiState]]:
        return [
            (s, q)
            for s in self.system.initials
            for q in self.automaton.initials
            if self.admits(q, s)
        ]

    def successors(self, node):
        cached = self._cache.get(node)
        if cached is not None:
            return cached
        state, q = node
        moves = list(self.system.successors(state))
        if not moves:
            self.deadlocks[state] = None
            moves = [(DEADLOCK, state)]
        result = []
        for action, target in moves:
            for q2 in self.automaton.successors[q]:
                if self.admits(q2, target):
                    result.append((action, (target, q2)))
        self._cache[node] = result
        return result

    def accepting(self, node) -> bool:
        return node[1] in self.automaton.accepting

    def run(self) -> Tuple[Optional[Lasso], int]:
        visited: Set = set()
        flagged: Set = set()
        for root in self.initials():
            if root in visited:
                continue
            visited.add(root)
            # (node, action into node, successor list, next index)
            stack: List[List[Any]] = [[root, None, self.successors(root), 0]]
            on_stack = {root: 0}
            while stack:
                frame = stack[-1]
                node, _, succ, idx = frame
                if idx < len(succ):
                    frame[3] += 1
                    action, child = succ[idx]
                    if child not in visited:
                        visited.add(child)
                        on_stack[child] = len(stack)
                        stack.append([child, action, self.successors(child), 0])
                    continue
                if self.accepting(node):
                    cycle = self._cycle(node, on_stack, flagged)
                    if cycle is not None:
                        return self._lasso(stack, on_stack, cycle), len(visited)
                stack.pop()
                del on_stack[node]
        return None, len(visited)

    def _cycle(self, seed, on_stack, flagged):
        """Path from ``seed`` to a node on the outer stack, as (action, node) steps."""
        stack: List[List[Any]] = [[seed, None, self.successors(seed), 0]]
        while stack:
            frame = stack[-1]
            _, _, succ, idx = frame
            if idx >= len(succ):
                stack.pop()
                continue
            frame[3] += 1
            action, child = succ[idx]
            if child in on_stack:
                return [(f[1], f[0]) for f in stack[1:]] + [(action, child)]
            if child not in flagged:
                flagged.add(child)
                stack.append([child, action, self.successors(child), 0])
        return None

    def _lasso(self, stack, on_stack, cycle) -> Lasso:
        target = cycle[-1][1]
        cut = on_stack[target]
        nodes = [f[0] for f in stack]
        actions = [f[1] for f in stack[1:]]
        stem = FinitePath(
            tuple(n[0] for n in nodes[: cut + 1]),
            tuple(actions[:cut]),
        )
        loop_nodes = nodes[cut:] + [n for _, n in cycle]
        loop_actions = actions[cut:] + [a for a, _ in cycle]
        loop = FinitePath(tuple(n[0] for n in loop_nodes), tuple(loop_actions))
        return Lasso(stem, loop)


def check(system, prop: LtlFormula) -> CheckResult:
    """
    Model-check ``system`` against ``prop``.

    Args:
        system: a product, an :class:`LtsSystem` or any object with the same interface
        prop: LTL property over the system's atoms

    Returns:
        The verdict; a failing verdict carries a re-validated lasso

    Raises:
        CheckerError: when a counterexample fails re-validation
    """
    if isinstance(system, Lts):
        system = LtsSystem(system)
    unknown = sorted(a for a in ltl.atom_names(prop) if not system.has_atom(a))
    if unknown:
        raise ltl.LtlError(f"Unknown atoms in property: {unknown}")
    automaton = to_buchi(ltl.Not(prop))
    search = _Search(system, automaton)
    lasso, explored = search.run()
    deadlocks = list(search.deadlocks)
    if lasso is None:
        logger.debug("Property holds; %d product states explored", explored)
        return CheckResult(True, None, deadlocks, explored)
    validate_lasso(system, prop, lasso)
    logger.debug("Property fails; lasso of length %d", len(lasso))
    return CheckResult(False, lasso, deadlocks, explored)
