"""
Bounded model finding for the Synthlock project.

This module turns a process specification and a state bound k into a
deterministic stream of LTS instances: the specification is grounded over
k states, converted to clauses and enumerated by the SAT engine with
blocking clauses over the LTS atoms. Instances isomorphic to one already
seen can be skipped with :func:`canonical_key`.
"""

import json
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Set, Tuple

from constants import DEBUG_VALIDATION, DEDUP_INSTANCES
from src.errors import FormulaError, SpecError, SynthesisError
from src.logic import grounding as gr
from src.lts.core import Lts, Vocabulary
from src.sat.solver import Enumerator, SatProblem
from src.spec.model import ProcessSpec, satisfies

logger = logging.getLogger(__name__)


class AtomTable:
    """
    Canonical numbering of the LTS atoms over k states.

    Variables 1..n are, in order: ``Init(i)``, ``Prop(p, i)`` per
    proposition, ``Edge(a, i, j)`` per action. Grounding registers its
    closure atoms and Tseitin auxiliaries after these.
    """

    def __init__(self, vocab: Vocabulary, k: int):
        self.vocab = vocab
        self.k = k
        self.cnf = gr.CnfClauses()
        self.atoms: List[gr.Atom] = []
        for i in range(k):
            self.atoms.append(gr.Init(i))
        for p in vocab.props:
            for i in range(k):
                self.atoms.append(gr.Prop(p, i))
        for a in vocab.all_actions:
            for i in range(k):
                for j in range(k):
                    self.atoms.append(gr.Edge(a, i, j))
        for atom in self.atoms:
            self.cnf.var(atom)

    @property
    def projection(self) -> Tuple[int, ...]:
        return tuple(range(1, len(self.atoms) + 1))

    def encode(self, lts: Lts) -> Dict[int, bool]:
        """Projected model of ``lts`` (must have k states over the vocabulary)."""
        model = {}
        for atom in self.atoms:
            v = self.cnf.atom_vars[atom]
            if isinstance(atom, gr.Init):
                model[v] = atom.state in lts.initials
            elif isinstance(atom, gr.Prop):
                model[v] = lts.holds(atom.prop, atom.state)
            else:
                model[v] = (atom.src, atom.action, atom.dst) in lts.transitions
        return model


def decode(model: Mapping[int, bool], vocab: Vocabulary, k: int, table: Optional[AtomTable] = None) -> Lts:
    """
    Read an LTS off a projected model.

    Args:
        model: variable -> value over (at least) the atom table's variables
        vocab: process vocabulary
        k: state bound
        table: atom table the model was produced with (rebuilt when omitted)

    Returns:
        LTS with states 0..k-1 (possibly without initial states)
    """
    table = table or AtomTable(vocab, k)
    labeling: Dict[int, List[str]] = {i: [] for i in range(k)}
    transitions = []
    initials = []
    for atom in table.atoms:
        if not model.get(table.cnf.atom_vars[atom], False):
            continue
        if isinstance(atom, gr.Init):
            initials.append(atom.state)
        elif isinstance(atom, gr.Prop):
            labeling[atom.state].append(atom.prop)
        else:
            transitions.append((atom.src, atom.action, atom.dst))
    return Lts.for_vocabulary(vocab, k, labeling, transitions, initials)


def build_problem(spec: ProcessSpec, k: int) -> Tuple[SatProblem, AtomTable]:
    """
    Ground ``spec`` at bound ``k`` into a SAT problem over the canonical atom table.

    Raises:
        FormulaError: when k < 1
        SpecError: when a refined spec is grounded at another bound than its reference
    """
    if k < 1:
        raise FormulaError(f"State bound must be positive, got {k}")
    if spec.reference is not None and k != spec.reference.num_states:
        raise SpecError(f"Refined spec {spec.name} is pinned to {spec.reference.num_states} states, not {k}")
    table = AtomTable(spec.vocab, k)
    formulas = spec.formula_list()
    body = gr.ground(formulas, k, spec.vocab) if formulas else gr.P_TRUE
    gr.to_cnf(body, table.cnf)
    if spec.pinned:
        gr.to_cnf(gr.ground(list(spec.pinned), k, spec.vocab, spec.pin_binding()), table.cnf)
    table.cnf.clauses.append([table.cnf.var(gr.Init(i)) for i in range(k)])
    problem = SatProblem.from_clauses(table.cnf.num_vars, table.cnf.clauses, table.projection)
    logger.debug("Grounded %s at k=%d: %d variables, %d clauses", spec.name, k, problem.num_vars, len(problem.clauses))
    return problem, table


@dataclass
class InstanceStream:
    """
    Single-owner stream of instances of one grounded specification.

    Attributes:
        yielded: instances returned so far
        skipped: isomorphic duplicates skipped
        find_time: longest time spent finding one instance (seconds)
    """

    spec: ProcessSpec
    k: int
    problem: SatProblem
    table: AtomTable
    seed: int = 0
    dedup: bool = DEDUP_INSTANCES
    validate: bool = DEBUG_VALIDATION
    yielded: int = 0
    skipped: int = 0
    find_time: float = 0.0
    _enumerator: Enumerator = field(default=None, init=False, repr=False)
    _keys: Set[bytes] = field(default_factory=set, init=False, repr=False)

    def __post_init__(self):
        self._enumerator = Enumerator(self.problem, self.seed)

    @property
    def solver_stats(self) -> Dict[str, int]:
        return dict(self._enumerator.solver.stats)

    def next(self) -> Optional[Lts]:
        """Next instance, or None when the stream is exhausted."""
        start = time.perf_counter()
        try:
            while True:
                model = self._enumerator.next()
                if model is None:
                    logger.debug("%s exhausted after %d instances; solver %s", self.spec.name, self.yielded,
                                 self.solver_stats)
                    return None
                lts = decode(model, self.spec.vocab, self.k, self.table)
                if self.validate and not satisfies(self.spec, lts):
                    raise SynthesisError(f"Instance of {self.spec.name} violates its specification")
                if self.dedup:
                    key = canonical_key(lts)
                    if key in self._keys:
                        self.skipped += 1
                        continue
                    self._keys.add(key)
                self.yielded += 1
                return lts
        finally:
            self.find_time = max(self.find_time, time.perf_counter() - start)

    def __iter__(self) -> Iterator[Lts]:
        while True:
            lts = self.next()
            if lts is None:
                return
            yield lts


def open_stream(spec: ProcessSpec, k: int, seed: int = 0, dedup: bool = DEDUP_INSTANCES,
                validate: bool = DEBUG_VALIDATION) -> InstanceStream:
    problem, table = build_problem(spec, k)
    return InstanceStream(spec, k, problem, table, seed=seed, dedup=dedup, validate=validate)


def instances(spec: ProcessSpec, k: int, seed: int = 0, dedup: bool = False,
              validate: bool = DEBUG_VALIDATION) -> Iterator[Lts]:
    """
    All k-state instances of ``spec``.

    Args:
        spec: process specification
        k: exact number of states (unreachable states allowed)
        seed: solver seed; 0 keeps the canonical branching order
        dedup: skip instances isomorphic to an earlier one
        validate: evaluate every instance against the spec

    Returns:
        A deterministic iterator; empty when the spec is inconsistent at k
    """
    return iter(open_stream(spec, k, seed=seed, dedup=dedup, validate=validate))


def first_instance(spec: ProcessSpec, k: int, seed: int = 0) -> Optional[Lts]:
    return open_stream(spec, k, seed=seed, dedup=False).next()


def _initial_colours(lts: Lts) -> List[int]:
    keys = [(s in lts.initials, lts.labels[s]) for s in lts.states]
    ranks = {key: r for r, key in enumerate(sorted(set(keys)))}
    return [ranks[key] for key in keys]


def _refine_colours(lts: Lts, colours: List[int], incoming: List[List[Tuple[str, int]]]) -> List[int]:
    while True:
        signatures = [
            (
                colours[s],
                tuple(sorted((a, colours[t]) for a, t in lts.moves(s))),
                tuple(sorted((a, colours[u]) for a, u in incoming[s])),
            )
            for s in lts.states
        ]
        ranks = {sig: r for r, sig in enumerate(sorted(set(signatures)))}
        refined = [ranks[sig] for sig in signatures]
        if len(ranks) == len(set(colours)):
            return refined
        colours = refined


def _individualize(colours: List[int], state: int) -> List[int]:
    keys = [(c, s != state) for s, c in enumerate(colours)]
    ranks = {key: r for r, key in enumerate(sorted(set(keys)))}
    return [ranks[key] for key in keys]


def _swappable(lts: Lts, u: int, v: int) -> bool:
    """Whether exchanging u and v maps ``lts`` onto itself."""
    if lts.labels[u] != lts.labels[v] or (u in lts.initials) != (v in lts.initials):
        return False
    swap = {u: v, v: u}
    return all((swap.get(s, s), a, swap.get(t, t)) in lts.transitions
               for (s, a, t) in lts.transitions if s in swap or t in swap)


def _twin_classes(lts: Lts, colours: List[int]) -> List[int]:
    """Smallest state each state can be exchanged with."""
    twin = list(lts.states)
    for v in lts.states:
        for u in range(v):
            if twin[u] == u and colours[u] == colours[v] and _swappable(lts, u, v):
                twin[v] = u
                break
    return twin


def _encoding(lts: Lts, order: List[int]) -> Tuple:
    position = {s: i for i, s in enumerate(order)}
    return (
        tuple(sorted(position[s] for s in lts.initials)),
        tuple(lts.labels[s] for s in order),
        tuple(sorted((position[s], a, position[t]) for (s, a, t) in lts.transitions)),
    )


def _smallest_encoding(lts: Lts, colours: List[int], incoming, twins: List[int]) -> Tuple:
    colours = _refine_colours(lts, colours, incoming)
    cells: Dict[int, List[int]] = {}
    for s in lts.states:
        cells.setdefault(colours[s], []).append(s)
    open_cells = [c for c in sorted(cells) if len(cells[c]) > 1]
    if not open_cells:
        return _encoding(lts, sorted(lts.states, key=colours.__getitem__))
    best = None
    tried = set()
    for s in cells[open_cells[0]]:
        if twins[s] in tried:
            continue
        tried.add(twins[s])
        encoding = _smallest_encoding(lts, _individualize(colours, s), incoming, twins)
        if best is None or encoding < best:
            best = encoding
    return best


def canonical_key(lts: Lts) -> bytes:
    """
    Isomorphism-invariant key of an LTS.

    Colour refinement on (initial, label) with in/out edge signatures
    splits the states into cells. While a cell holds several states, each
    of them is individualized in turn and the refinement repeated; the key
    is the smallest encoding over the resulting discrete orderings. States
    that can be exchanged without changing the LTS are tried once.
    """
    incoming: List[List[Tuple[str, int]]] = [[] for _ in lts.states]
    for (s, a, t) in lts.transitions:
        incoming[t].append((a, s))
    colours = _initial_colours(lts)
    best = _smallest_encoding(lts, colours, incoming, _twin_classes(lts, colours))
    payload = [lts.num_states, list(lts.props), list(lts.actions), sorted(lts.env_actions), best]
    return json.dumps(payload, separators=(",", ":")).encode("utf-8")
