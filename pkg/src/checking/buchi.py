"""
Tableau translation of LTL to Büchi automata for the Synthlock project.

The construction expands formulas in negation normal form into nodes
(incoming, new, old, next). Each node becomes a state labeled by the
literals in its ``old`` set; a word letter is read in the state the run
is in. Every until subformula gives one acceptance set, and the
generalized condition is reduced to a single set with a counter.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Set, Tuple

from src.checking import ltl
from src.checking.ltl import LtlFormula

logger = logging.getLogger(__name__)

INIT = -1


@dataclass
class _Node:
    name: int
    incoming: Set[int]
    new: Set[LtlFormula]
    old: Set[LtlFormula]
    next: Set[LtlFormula]


@dataclass(frozen=True)
class BuchiState:
    """Automaton state: tableau node plus acceptance counter."""

    node: int
    counter: int


@dataclass
class BuchiAutomaton:
    """
    State-labeled Büchi automaton.

    A run may sit in ``q`` at position i only when letter i satisfies
    ``positive[q]`` and ``negative[q]``.
    """

    states: List[BuchiState] = field(default_factory=list)
    initials: List[BuchiState] = field(default_factory=list)
    successors: Dict[BuchiState, List[BuchiState]] = field(default_factory=dict)
    accepting: FrozenSet[BuchiState] = frozenset()
    positive: Dict[BuchiState, FrozenSet[str]] = field(default_factory=dict)
    negative: Dict[BuchiState, FrozenSet[str]] = field(default_factory=dict)

    def admits(self, q: BuchiState, holds) -> bool:
        """Whether the letter described by ``holds(atom)`` may be read in ``q``."""
        return all(holds(a) for a in self.positive[q]) and not any(holds(a) for a in self.negative[q])

    def atoms(self) -> Set[str]:
        result: Set[str] = set()
        for q in self.states:
            result |= self.positive[q] | self.negative[q]
        return result


def _is_literal(f: LtlFormula) -> bool:
    return isinstance(f, (ltl.Bool, ltl.Atom)) or (isinstance(f, ltl.Not) and isinstance(f.operand, ltl.Atom))


def _negation(f: LtlFormula) -> LtlFormula:
    if isinstance(f, ltl.Not):
        return f.operand
    if isinstance(f, ltl.Bool):
        return ltl.Bool(not f.value)
    return ltl.Not(f)


def _untils(f: LtlFormula, found: List[ltl.Until]) -> List[ltl.Until]:
    if isinstance(f, ltl.Until) and f not in found:
        found.append(f)
    if isinstance(f, ltl.Not):
        _untils(f.operand, found)
    elif isinstance(f, (ltl.And, ltl.Or, ltl.Until, ltl.Release)):
        _untils(f.left, found)
        _untils(f.right, found)
    return found


def _tableau(f: LtlFormula) -> List[_Node]:
    counter = [0]

    def fresh() -> int:
        counter[0] += 1
        return counter[0]

    done: List[_Node] = []
    work = [_Node(fresh(), {INIT}, {f}, set(), set())]
    while work:
        node = work.pop()
        if not node.new:
            for other in done:
                if other.old == node.old and other.next == node.next:
                    other.incoming |= node.incoming
                    break
            else:
                done.append(node)
                work.append(_Node(fresh(), {node.name}, set(node.next), set(), set()))
            continue

        eta = min(node.new, key=repr)
        node.new.discard(eta)
        if _is_literal(eta):
            if eta == ltl.FALSE or _negation(eta) in node.old:
                continue
            node.old.add(eta)
            work.append(node)
        elif isinstance(eta, ltl.And):
            node.new |= {eta.left, eta.right} - node.old
            node.old.add(eta)
            work.append(node)
        else:
            if isinstance(eta, ltl.Or):
                first_new, first_next, second_new = {eta.left}, set(), {eta.right}
            elif isinstance(eta, ltl.Until):
                first_new, first_next, second_new = {eta.left}, {eta}, {eta.right}
            else:
                first_new, first_next, second_new = {eta.right}, {eta}, {eta.left, eta.right}
            old = node.old | {eta}
            first = _Node(fresh(), set(node.incoming), node.new | (first_new - old), set(old), node.next | first_next)
            second = _Node(fresh(), set(node.incoming), node.new | (second_new - old), set(old), set(node.next))
            work.append(second)
            work.append(first)
    return done


def to_buchi(f: LtlFormula) -> BuchiAutomaton:
    """
    Büchi automaton accepting exactly the words satisfying ``f``.

    Args:
        f: any LTL formula; it is put in negation normal form first

    Returns:
        A degeneralized automaton (every state accepting when ``f`` has no until)
    """
    f = ltl.nnf(f)
    nodes = _tableau(f)
    untils = _untils(f, [])
    acceptance: List[Set[int]] = [
        {n.name for n in nodes if u not in n.old or u.right in n.old} for u in untils
    ]
    rounds = max(1, len(acceptance))
    if not acceptance:
        acceptance = [{n.name for n in nodes}]

    by_name = {n.name: n for n in nodes}
    automaton = BuchiAutomaton()
    for n in nodes:
        positive = frozenset(x.name for x in n.old if isinstance(x, ltl.Atom))
        negative = frozenset(x.operand.name for x in n.old if isinstance(x, ltl.Not) and isinstance(x.operand, ltl.Atom))
        for c in range(rounds):
            q = BuchiState(n.name, c)
            automaton.states.append(q)
            automaton.positive[q] = positive
            automaton.negative[q] = negative
    for q in automaton.states:
        nxt = (q.counter + 1) % rounds if q.node in acceptance[q.counter] else q.counter
        automaton.successors[q] = [
            BuchiState(m.name, nxt) for m in nodes if q.node in m.incoming
        ]
    automaton.initials = [BuchiState(n.name, 0) for n in nodes if INIT in n.incoming]
    automaton.accepting = frozenset(
        q for q in automaton.states if q.counter == 0 and q.node in acceptance[0]
    )
    logger.debug("Büchi automaton: %d nodes, %d states, %d until sets", len(by_name), len(automaton.states), len(untils))
    return automaton
