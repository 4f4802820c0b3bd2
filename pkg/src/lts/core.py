"""
Labeled transition systems for the Synthlock project.

This module provides the LTS data model used everywhere else: process
vocabularies with their derived lock/environment symbols, finite paths,
successor and reachability utilities, the semantic check of the lock
synchronization conditions (a)-(f), and JSON dump/load.

States are dense integers 0..k-1. Labels are bitsets over the LTS's
proposition index so equal label sets compare in O(1).
"""

import json
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from src.errors import LtsError

logger = logging.getLogger(__name__)

INTERNAL = "internal"
ENV = "env"

AV_PREFIX = "av_"
OWN_PREFIX = "own_"
CH_PREFIX = "ch_"
RESERVED_PREFIXES = (AV_PREFIX, OWN_PREFIX, CH_PREFIX)
RESERVED_NAMES = ("init", "reach", "star", "true", "false")


def av_name(lock: str) -> str:
    """Shared proposition telling that ``lock`` is free."""
    return AV_PREFIX + lock


def own_name(lock: str) -> str:
    """Local proposition telling that the process holds ``lock``."""
    return OWN_PREFIX + lock


def ch_name(var: str) -> str:
    """Environment action changing a lock or a shared variable."""
    return CH_PREFIX + var


def _unique(names: Iterable[str]) -> Tuple[str, ...]:
    return tuple(dict.fromkeys(names))


@dataclass(frozen=True)
class Vocabulary:
    """
    Symbols of one process specification.

    ``shared`` and ``locals`` hold the user-declared variables only; the
    derived ``av_<lock>`` (shared), ``own_<lock>`` (local) and the
    ``ch_<lock>``/``ch_<var>`` environment actions are generated from
    ``locks`` and ``shared``.
    """

    shared: Tuple[str, ...] = ()
    locals: Tuple[str, ...] = ()
    locks: Tuple[str, ...] = ()
    actions: Tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("shared", "locals", "locks", "actions"):
            object.__setattr__(self, name, _unique(getattr(self, name)))

        user = list(self.shared) + list(self.locals) + list(self.locks) + list(self.actions)
        if len(set(user)) != len(user):
            raise LtsError(f"Vocabulary names are not disjoint: {sorted(user)}")
        for name in user:
            if not name or name.startswith(RESERVED_PREFIXES) or name in RESERVED_NAMES:
                raise LtsError(f"Reserved or empty symbol name: {name!r}")

    @property
    def shared_props(self) -> Tuple[str, ...]:
        return self.shared + tuple(av_name(lock) for lock in self.locks)

    @property
    def local_props(self) -> Tuple[str, ...]:
        return self.locals + tuple(own_name(lock) for lock in self.locks)

    @property
    def props(self) -> Tuple[str, ...]:
        return self.shared_props + self.local_props

    @property
    def env_actions(self) -> Tuple[str, ...]:
        return tuple(ch_name(lock) for lock in self.locks) + tuple(ch_name(g) for g in self.shared)

    @property
    def all_actions(self) -> Tuple[str, ...]:
        return self.actions + self.env_actions

    def env_action_for(self, shared_prop: str) -> str:
        """Environment action changing a shared proposition (``ch_l`` for ``av_l``)."""
        for lock in self.locks:
            if shared_prop == av_name(lock):
                return ch_name(lock)
        if shared_prop in self.shared:
            return ch_name(shared_prop)
        raise LtsError(f"Not a shared proposition: {shared_prop}")

    def kind(self, action: str) -> str:
        if action in self.env_actions:
            return ENV
        if action in self.actions:
            return INTERNAL
        raise LtsError(f"Unknown action: {action}")

    def to_dict(self) -> Dict[str, List[str]]:
        return {
            "shared": list(self.shared),
            "locals": list(self.locals),
            "locks": list(self.locks),
            "actions": list(self.actions),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Iterable[str]]) -> "Vocabulary":
        return cls(
            shared=tuple(data.get("shared", ())),
            locals=tuple(data.get("locals", ())),
            locks=tuple(data.get("locks", ())),
            actions=tuple(data.get("actions", ())),
        )


@dataclass(frozen=True)
class Lts:
    """
    Finite labeled transition system.

    Built with :meth:`Lts.build`; the raw constructor takes label bitsets.
    Instances are immutable after construction.
    """

    num_states: int
    props: Tuple[str, ...]
    actions: Tuple[str, ...]
    env_actions: FrozenSet[str]
    transitions: FrozenSet[Tuple[int, str, int]]
    initials: FrozenSet[int]
    labels: Tuple[int, ...]
    names: Tuple[str, ...] = ()
    serial: bool = False
    _succ: Tuple[Tuple[Tuple[str, int], ...], ...] = field(default=(), init=False, repr=False, compare=False)
    _prop_index: Dict[str, int] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.num_states < 0:
            raise LtsError("State count must be non-negative")
        if len(self.labels) != self.num_states:
            raise LtsError(f"Labeling covers {len(self.labels)} states, expected {self.num_states}")
        if not set(self.env_actions) <= set(self.actions):
            raise LtsError(f"Environment actions not declared: {sorted(set(self.env_actions) - set(self.actions))}")
        if self.names and len(self.names) != self.num_states:
            raise LtsError("State names must cover every state")
        for s in self.initials:
            if not 0 <= s < self.num_states:
                raise LtsError(f"Initial state {s} out of range")

        action_set = set(self.actions)
        succ: List[List[Tuple[str, int]]] = [[] for _ in range(self.num_states)]
        for (s, a, t) in self.transitions:
            if not (0 <= s < self.num_states and 0 <= t < self.num_states):
                raise LtsError(f"Transition endpoint out of range: {(s, a, t)}")
            if a not in action_set:
                raise LtsError(f"Transition uses undeclared action: {a}")
            succ[s].append((a, t))
        for moves in succ:
            moves.sort()
        object.__setattr__(self, "_succ", tuple(tuple(moves) for moves in succ))
        object.__setattr__(self, "_prop_index", {p: i for i, p in enumerate(self.props)})

        if self.serial:
            stuck = [s for s in range(self.num_states) if not succ[s]]
            if stuck:
                raise LtsError(f"Serial LTS has states without successors: {stuck}")

    @classmethod
    def build(
        cls,
        num_states: int,
        labeling: Mapping[int, Iterable[str]],
        transitions: Iterable[Tuple[int, str, int]],
        initials: Iterable[int],
        props: Optional[Sequence[str]] = None,
        actions: Optional[Sequence[str]] = None,
        env_actions: Iterable[str] = (),
        names: Sequence[str] = (),
        serial: bool = False,
    ) -> "Lts":
        """
        Build an LTS from readable parts.

        Args:
            num_states: number of states k; states are 0..k-1
            labeling: state -> propositions holding there (missing states are unlabeled)
            transitions: (source, action, target) triples
            initials: initial states
            props: proposition order (defaults to the sorted union of labels)
            actions: declared actions (defaults to the sorted transition actions)
            env_actions: actions of environment kind
            names: optional display names
            serial: require a successor for every state

        Returns:
            The LTS
        """
        transitions = frozenset((int(s), a, int(t)) for (s, a, t) in transitions)
        env_actions = frozenset(env_actions)
        if props is None:
            props = sorted({p for ps in labeling.values() for p in ps})
        if actions is None:
            actions = sorted({a for (_, a, _) in transitions} | env_actions)
        index = {p: i for i, p in enumerate(props)}
        labels = []
        for s in range(num_states):
            bits = 0
            for p in labeling.get(s, ()):
                if p not in index:
                    raise LtsError(f"State {s} labeled with undeclared proposition {p}")
                bits |= 1 << index[p]
            labels.append(bits)
        return cls(
            num_states=num_states,
            props=tuple(props),
            actions=tuple(actions),
            env_actions=env_actions,
            transitions=transitions,
            initials=frozenset(initials),
            labels=tuple(labels),
            names=tuple(names),
            serial=serial,
        )

    @classmethod
    def for_vocabulary(
        cls,
        vocab: Vocabulary,
        num_states: int,
        labeling: Mapping[int, Iterable[str]],
        transitions: Iterable[Tuple[int, str, int]],
        initials: Iterable[int],
        names: Sequence[str] = (),
    ) -> "Lts":
        """Build an LTS over a process vocabulary (props, actions and kinds from ``vocab``)."""
        return cls.build(
            num_states,
            labeling,
            transitions,
            initials,
            props=vocab.props,
            actions=vocab.all_actions,
            env_actions=vocab.env_actions,
            names=names,
        )

    @property
    def states(self) -> range:
        return range(self.num_states)

    def prop_bit(self, prop: str) -> int:
        if prop not in self._prop_index:
            raise LtsError(f"Unknown proposition: {prop}")
        return 1 << self._prop_index[prop]

    def has_prop(self, prop: str) -> bool:
        return prop in self._prop_index

    def holds(self, prop: str, s: int) -> bool:
        return bool(self.labels[s] & self.prop_bit(prop))

    def label(self, s: int) -> FrozenSet[str]:
        bits = self.labels[s]
        return frozenset(p for i, p in enumerate(self.props) if bits >> i & 1)

    def kind(self, action: str) -> str:
        return ENV if action in self.env_actions else INTERNAL

    def state_name(self, s: int) -> str:
        return self.names[s] if self.names else f"S{s}"

    def moves(self, s: int) -> Tuple[Tuple[str, int], ...]:
        return self._succ[s]

    def deadlocks(self) -> List[int]:
        return [s for s in self.states if not self._succ[s]]


@dataclass(frozen=True)
class FinitePath:
    """Alternating states and actions; ``actions[i]`` leads from ``states[i]`` to ``states[i+1]``."""

    states: Tuple[Any, ...]
    actions: Tuple[Any, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "actions", tuple(self.actions))
        if not self.states:
            raise LtsError("A path needs at least one state")
        if len(self.actions) != len(self.states) - 1:
            raise LtsError(
                f"Path with {len(self.states)} states needs {len(self.states) - 1} actions, got {len(self.actions)}"
            )

    def __len__(self) -> int:
        return len(self.actions)

    def steps(self) -> List[Tuple[Any, Any, Any]]:
        return [(self.states[i], self.actions[i], self.states[i + 1]) for i in range(len(self.actions))]

    def prefix(self, length: int) -> "FinitePath":
        """Prefix with ``length`` steps."""
        return FinitePath(self.states[: length + 1], self.actions[:length])

    def is_stutter_only(self) -> bool:
        return all(s == t for (s, _, t) in self.steps())


def successors(lts: Lts, s: int) -> List[Tuple[str, int]]:
    """
    Outgoing moves of a state.

    Args:
        lts: transition system
        s: state

    Returns:
        (action, target) pairs ordered by action name then target
    """
    if not isinstance(s, int) or not 0 <= s < lts.num_states:
        raise LtsError(f"Unknown state: {s!r}")
    return list(lts.moves(s))


def is_path(lts: Lts, path: FinitePath) -> bool:
    """True iff every step of ``path`` is a transition of ``lts``."""
    for step in path.steps():
        if step not in lts.transitions:
            return False
    if len(path) == 0:
        s = path.states[0]
        return isinstance(s, int) and 0 <= s < lts.num_states
    return True


def destutter(labels: Sequence[Any]) -> List[Any]:
    """Collapse maximal runs of equal consecutive label sets."""
    result: List[Any] = []
    for label in labels:
        if not result or result[-1] != label:
            result.append(label)
    return result


def reachable(lts: Lts) -> FrozenSet[int]:
    """States reachable from the initial states."""
    seen = set(lts.initials)
    queue = deque(sorted(lts.initials))
    while queue:
        s = queue.popleft()
        for _, t in lts.moves(s):
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return frozenset(seen)


@dataclass(frozen=True)
class SyncViolation:
    """A failed synchronization condition with its witnesses."""

    condition: str
    symbol: str
    states: Tuple[int, ...]
    detail: str = ""

    def __str__(self) -> str:
        return f"({self.condition}) {self.symbol} at {list(self.states)}: {self.detail}"


def _framed_props(lts: Lts, s: int, t: int, keep: Iterable[str]) -> List[str]:
    diff = lts.labels[s] ^ lts.labels[t]
    for p in keep:
        if lts.has_prop(p):
            diff &= ~lts.prop_bit(p)
    return [p for i, p in enumerate(lts.props) if diff >> i & 1]


def check_sync_conditions(lts: Lts, vocab: Vocabulary) -> List[SyncViolation]:
    """
    Check the lock synchronization conditions by direct expansion.

    Args:
        lts: transition system labeled over ``vocab.props``
        vocab: vocabulary giving locks and shared variables

    Returns:
        Violations; empty iff (a)-(f) all hold
    """
    missing = [p for p in vocab.props if not lts.has_prop(p)]
    if missing:
        raise LtsError(f"LTS lacks derived or declared propositions: {missing}")

    violations: List[SyncViolation] = []
    by_action: Dict[str, List[Tuple[int, int]]] = {}
    for (s, a, t) in sorted(lts.transitions):
        by_action.setdefault(a, []).append((s, t))

    for lock in vocab.locks:
        av, own, ch = av_name(lock), own_name(lock), ch_name(lock)
        ch_sources = {s for (s, _) in by_action.get(ch, [])}
        for s in lts.states:
            if lts.holds(own, s) and lts.holds(av, s):
                violations.append(SyncViolation("a", lock, (s,), f"{own} and {av} both hold"))
            if (not lts.holds(own, s)) != (s in ch_sources):
                detail = "lock not owned but no environment step" if not lts.holds(own, s) \
                    else "lock owned but environment step present"
                violations.append(SyncViolation("b", lock, (s,), detail))
        for (s, t) in by_action.get(ch, []):
            if lts.holds(av, s) == lts.holds(av, t):
                violations.append(SyncViolation("c", lock, (s, t), f"{ch} does not flip {av}"))
            changed = _framed_props(lts, s, t, (own, av))
            if changed:
                violations.append(SyncViolation("d", lock, (s, t), f"{ch} changes {changed}"))

    for g in vocab.shared:
        ch = ch_name(g)
        for s in lts.states:
            values = {lts.holds(g, t) for (a, t) in lts.moves(s) if a == ch}
            if values != {True, False}:
                violations.append(SyncViolation("e", g, (s,), f"{ch} cannot set {g} both ways"))

    for g in vocab.shared_props:
        ch = vocab.env_action_for(g)
        for (s, t) in by_action.get(ch, []):
            changed = _framed_props(lts, s, t, (g,))
            if changed:
                violations.append(SyncViolation("f", g, (s, t), f"{ch} changes {changed}"))

    return violations


def lts_to_dict(lts: Lts) -> Dict[str, Any]:
    """JSON-ready form with a stable key order."""
    return {
        "states": [lts.state_name(s) for s in lts.states],
        "props": list(lts.props),
        "actions": [{"name": a, "kind": lts.kind(a)} for a in lts.actions],
        "transitions": [[s, a, t] for (s, a, t) in sorted(lts.transitions)],
        "initials": sorted(lts.initials),
        "labeling": {str(s): sorted(lts.label(s)) for s in lts.states},
    }


def lts_from_dict(data: Mapping[str, Any]) -> Lts:
    """Inverse of :func:`lts_to_dict`."""
    try:
        names = list(data["states"])
        actions = [entry["name"] for entry in data["actions"]]
        env = [entry["name"] for entry in data["actions"] if entry["kind"] == ENV]
        labeling = {int(s): props for s, props in data["labeling"].items()}
        default_names = [f"S{s}" for s in range(len(names))]
        return Lts.build(
            len(names),
            labeling,
            [tuple(t) for t in data["transitions"]],
            data["initials"],
            props=data.get("props"),
            actions=actions,
            env_actions=env,
            names=() if names == default_names else names,
        )
    except (KeyError, TypeError) as err:
        raise LtsError(f"Malformed LTS JSON: {err}") from err


def dump_lts(lts: Lts, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(lts_to_dict(lts), handle, indent=2)


def load_lts(path: str) -> Lts:
    with open(path, "r", encoding="utf-8") as handle:
        return lts_from_dict(json.load(handle))
