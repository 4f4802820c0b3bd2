"""
Asynchronous composition for the Synthlock project.

This module provides the interleaving product of process LTSs with
shared-variable consistency and environment-step matching, product path
projection and explicit materialization for small systems.

A product step moves one component along one of its transitions while
every other component either stays put or takes one of its environment
transitions; the resulting tuple must agree on every shared variable
observed by more than one component.
"""

import itertools
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from src.errors import CompositionError
from src.lts.core import FinitePath, Lts, Vocabulary

logger = logging.getLogger(__name__)

ProductState = Tuple[int, ...]


def local_atom(prop: str, index: int) -> str:
    """Product name of local ``prop`` of process ``index``."""
    return f"{prop}@{index}"


@dataclass(frozen=True, order=True)
class ProductAction:
    process: int
    action: str

    def __str__(self) -> str:
        return f"{self.action}@{self.process}"


class ProductLts:
    """
    On-the-fly product of component LTSs.

    Successors are generated on demand and memoized per instance, so an
    instance should be owned by one checking session.
    """

    def __init__(self, components: Sequence[Lts], vocabs: Sequence[Vocabulary], env_moves: bool = True):
        if not components:
            raise CompositionError("Nothing to compose")
        if len(components) != len(vocabs):
            raise CompositionError(f"{len(components)} components but {len(vocabs)} vocabularies")
        self.components = tuple(components)
        self.vocabs = tuple(vocabs)
        self.env_moves = env_moves

        for i, (lts, vocab) in enumerate(zip(self.components, self.vocabs)):
            missing = [p for p in vocab.props if not lts.has_prop(p)]
            if missing:
                raise CompositionError(f"Component {i} lacks propositions {missing}")

        # shared prop -> indices of the components observing it
        self.observers: Dict[str, Tuple[int, ...]] = {}
        for i, vocab in enumerate(self.vocabs):
            for g in vocab.shared_props:
                self.observers.setdefault(g, ())
                self.observers[g] += (i,)
        self._checks = [(g, idx) for g, idx in self.observers.items() if len(idx) > 1]

        self._atoms: Dict[str, Tuple[int, int]] = {}
        for g, idx in self.observers.items():
            owner = idx[0]
            self._atoms[g] = (owner, self.components[owner].prop_bit(g))
        for i, vocab in enumerate(self.vocabs):
            for p in vocab.local_props:
                self._atoms[local_atom(p, i)] = (i, self.components[i].prop_bit(p))
        self.props: Tuple[str, ...] = tuple(self._atoms)

        self._env_moves: List[List[Tuple[Tuple[str, int], ...]]] = []
        for lts in self.components:
            per_state = []
            for s in lts.states:
                per_state.append(tuple((a, t) for a, t in lts.moves(s) if a in lts.env_actions))
            self._env_moves.append(per_state)

        self.initials: Tuple[ProductState, ...] = self._initial_states()
        self._succ: Dict[ProductState, Tuple[Tuple[ProductAction, ProductState], ...]] = {}

    def _initial_states(self) -> Tuple[ProductState, ...]:
        for i, lts in enumerate(self.components):
            if not lts.initials:
                raise CompositionError(f"Component {i} has no initial state")
        candidates = itertools.product(*(sorted(lts.initials) for lts in self.components))
        initials = tuple(state for state in candidates if self.consistent(state))
        if not initials:
            raise CompositionError("Initial states disagree on shared variables")
        return initials

    def consistent(self, state: ProductState) -> bool:
        """Whether every commonly observed shared variable has one value."""
        for g, idx in self._checks:
            first = self.components[idx[0]].holds(g, state[idx[0]])
            for j in idx[1:]:
                if self.components[j].holds(g, state[j]) != first:
                    return False
        return True

    def holds(self, atom: str, state: ProductState) -> bool:
        if atom not in self._atoms:
            raise CompositionError(f"Unknown product proposition: {atom}")
        i, bit = self._atoms[atom]
        return bool(self.components[i].labels[state[i]] & bit)

    def has_atom(self, atom: str) -> bool:
        return atom in self._atoms

    def label(self, state: ProductState) -> FrozenSet[str]:
        return frozenset(p for p in self.props if self.holds(p, state))

    def successors(self, state: ProductState) -> Tuple[Tuple[ProductAction, ProductState], ...]:
        """Product moves from ``state``, ordered by (process, action, target)."""
        cached = self._succ.get(state)
        if cached is not None:
            return cached
        result = set()
        n = len(self.components)
        for i, lts in enumerate(self.components):
            for a, t in lts.moves(state[i]):
                if not self.env_moves and a in lts.env_actions:
                    continue
                options = []
                for j in range(n):
                    if j == i:
                        options.append((t,))
                    else:
                        options.append((state[j],) + tuple(u for _, u in self._env_moves[j][state[j]]))
                for target in itertools.product(*options):
                    if self.consistent(target):
                        result.add((ProductAction(i, a), target))
        moves = tuple(sorted(result))
        self._succ[state] = moves
        return moves

    def explore(self, limit: Optional[int] = None) -> List[ProductState]:
        """Reachable states in BFS order."""
        seen = set(self.initials)
        order = list(self.initials)
        queue = deque(self.initials)
        while queue:
            state = queue.popleft()
            for _, target in self.successors(state):
                if target not in seen:
                    seen.add(target)
                    order.append(target)
                    queue.append(target)
                    if limit is not None and len(order) > limit:
                        raise CompositionError(f"Product exceeds {limit} reachable states")
        return order

    def deadlocks(self) -> List[ProductState]:
        return [s for s in self.explore() if not self.successors(s)]

    def is_path(self, path: FinitePath) -> bool:
        return all((a, t) in self.successors(s) for (s, a, t) in path.steps())

    @property
    def total_states(self) -> int:
        """Size of the Cartesian state space."""
        total = 1
        for lts in self.components:
            total *= lts.num_states
        return total


def compose(components: Sequence[Lts], vocabs, env_moves: bool = True) -> ProductLts:
    """
    Asynchronous product of ``components``.

    Args:
        components: process LTSs, index-ordered
        vocabs: one vocabulary per component, or a single vocabulary shared by all
        env_moves: let a component move along its own environment transitions

    Raises:
        CompositionError: when the initial states cannot agree on shared variables
    """
    if isinstance(vocabs, Vocabulary):
        vocabs = [vocabs] * len(components)
    return ProductLts(components, list(vocabs), env_moves=env_moves)


def project(product: ProductLts, path: FinitePath, index: int) -> FinitePath:
    """
    Component ``index``'s view of a product path.

    The action at a step is the component's own action when it moved, the
    environment action it matched when it changed state, and None when it
    stayed put.
    """
    lts = product.components[index]
    states = [s[index] for s in path.states]
    actions = []
    for (s, move, t) in path.steps():
        if move.process == index:
            actions.append(move.action)
        elif s[index] != t[index]:
            matched = [a for a, u in lts.moves(s[index]) if u == t[index] and a in lts.env_actions]
            actions.append(matched[0] if matched else None)
        else:
            actions.append(None)
    return FinitePath(tuple(states), tuple(actions))


def reachable(product: ProductLts) -> FrozenSet[ProductState]:
    return frozenset(product.explore())


def state_name(state: ProductState) -> str:
    return "(" + ",".join(str(s) for s in state) + ")"


def materialize(product: ProductLts, limit: Optional[int] = None) -> Tuple[Lts, List[ProductState]]:
    """
    Explicit LTS of the reachable product.

    Returns:
        The LTS (states in BFS order, actions ``a@i``) and the product state of each LTS state
    """
    order = product.explore(limit)
    index = {state: n for n, state in enumerate(order)}
    transitions = []
    env = set()
    for state in order:
        for move, target in product.successors(state):
            name = str(move)
            if move.action in product.components[move.process].env_actions:
                env.add(name)
            transitions.append((index[state], name, index[target]))
    labeling = {index[state]: product.label(state) for state in order}
    lts = Lts.build(
        len(order),
        labeling,
        transitions,
        [index[s] for s in product.initials],
        props=product.props,
        env_actions=env,
        names=[state_name(s) for s in order],
    )
    return lts, order
