"""
Process and system specifications for the Synthlock project.

This module provides the specification model: lock synchronization axioms,
saturation axioms, the refinement specification of an instance together
with its strengthening operator, and the path formulas used to keep or to
exclude a counterexample path.

Refinement pins the states of the reference instance by identity: the
free variable ``s<j>`` always denotes state j of a k-state universe. Path
formulas over a component path use the same naming, so they can be
attached to a refined specification without renaming.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

from src.errors import SpecError
from src.logic import formulas as rel
from src.logic.formulas import RelFormula
from src.lts.core import FinitePath, Lts, Vocabulary, av_name, ch_name, own_name

logger = logging.getLogger(__name__)

# Free state variable of an action precondition.
PRE_VAR = "s"


def pin(state: int) -> str:
    """Name of the free variable pinned to ``state``."""
    return f"s{state}"


@dataclass(frozen=True)
class NamedFormula:
    name: str
    formula: RelFormula


@dataclass(frozen=True)
class ProcessSpec:
    """
    Specification of one process.

    Attributes:
        name: process name (``Phil0``)
        vocab: symbols the process observes
        formulas: the formula set
        preconditions: action -> precondition over ``PRE_VAR``, used for saturation
        reference: the instance a refined spec was built from
        pinned: formulas over the pinned constants (the refinement body and
            everything attached with :func:`oplus`)
    """

    name: str
    vocab: Vocabulary
    formulas: Tuple[NamedFormula, ...] = ()
    preconditions: Tuple[Tuple[str, RelFormula], ...] = ()
    reference: Optional[Lts] = None
    pinned: Tuple[RelFormula, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "formulas", tuple(self.formulas))
        object.__setattr__(self, "preconditions", tuple(self.preconditions))
        object.__setattr__(self, "pinned", tuple(self.pinned))
        for named in self.formulas:
            rel.check_symbols(named.formula, self.vocab)
            if rel.free_vars(named.formula):
                raise SpecError(
                    f"Formula {named.name} of {self.name} has free variables {sorted(rel.free_vars(named.formula))}"
                )
        for action, pre in self.preconditions:
            if action not in self.vocab.actions:
                raise SpecError(f"Precondition for undeclared action {action}")
            rel.check_symbols(pre, self.vocab)
            if not rel.free_vars(pre) <= {PRE_VAR}:
                raise SpecError(f"Precondition of {action} may only mention {PRE_VAR}")

    @property
    def pinned_constants(self) -> Tuple[str, ...]:
        if self.reference is None:
            return ()
        return tuple(pin(j) for j in self.reference.states)

    @property
    def is_refined(self) -> bool:
        return self.reference is not None

    def precondition_map(self) -> Dict[str, RelFormula]:
        return dict(self.preconditions)

    def formula_list(self) -> List[RelFormula]:
        return [named.formula for named in self.formulas]

    def extend(self, formulas: Iterable[NamedFormula]) -> "ProcessSpec":
        return replace(self, formulas=self.formulas + tuple(formulas))

    def pin_binding(self) -> Dict[str, int]:
        """Variable binding of the pinned constants."""
        return {pin(j): j for j in self.reference.states} if self.reference is not None else {}


@dataclass(frozen=True)
class SystemSpec:
    """
    Process specifications plus the global LTL property.

    The property is kept both as source text and parsed; product atoms are
    ``p@i`` for locals of process i and bare names for shared variables.
    """

    name: str
    processes: Tuple[ProcessSpec, ...]
    prop: Any = None
    prop_text: str = "true"
    locks: Tuple[str, ...] = ()
    shared: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "processes", tuple(self.processes))
        if not self.processes:
            raise SpecError("A system needs at least one process")
        for spec in self.processes:
            extra_locks = set(spec.vocab.locks) - set(self.locks)
            extra_shared = set(spec.vocab.shared) - set(self.shared)
            if extra_locks or extra_shared:
                raise SpecError(
                    f"Process {spec.name} observes undeclared locks {sorted(extra_locks)} "
                    f"or shared variables {sorted(extra_shared)}"
                )

    @property
    def vocabularies(self) -> List[Vocabulary]:
        return [spec.vocab for spec in self.processes]


@dataclass(frozen=True)
class PathFormulaSet:
    """Clause view of the path formula of a path: one disjunction per step."""

    clauses: Tuple[RelFormula, ...]

    @property
    def formula(self) -> RelFormula:
        return rel.conj(*self.clauses)

    def __len__(self) -> int:
        return len(self.clauses)


def _frame(s: str, t: str, props: Iterable[str]) -> RelFormula:
    return rel.conj(*(rel.Iff(rel.PropAtom(p, s), rel.PropAtom(p, t)) for p in props))


def named_sync_axioms(vocab: Vocabulary) -> List[NamedFormula]:
    """Synchronization axioms with readable names (``sync_b_m``)."""
    s, t = "s", "s2"
    props = vocab.props
    axioms: List[NamedFormula] = []
    for lock in vocab.locks:
        av, own, ch = av_name(lock), own_name(lock), ch_name(lock)
        axioms.append(NamedFormula(
            f"sync_a_{lock}",
            rel.Forall(s, rel.Implies(rel.PropAtom(own, s), rel.Not(rel.PropAtom(av, s)))),
        ))
        axioms.append(NamedFormula(
            f"sync_b_{lock}",
            rel.Forall(s, rel.Iff(rel.Not(rel.PropAtom(own, s)), rel.Exists(t, rel.ActAtom(ch, s, t)))),
        ))
        axioms.append(NamedFormula(
            f"sync_c_{lock}",
            rel.forall([s, t], rel.Implies(
                rel.ActAtom(ch, s, t),
                rel.Iff(rel.PropAtom(av, s), rel.Not(rel.PropAtom(av, t))),
            )),
        ))
        axioms.append(NamedFormula(
            f"sync_d_{lock}",
            rel.forall([s, t], rel.Implies(
                rel.ActAtom(ch, s, t),
                _frame(s, t, [p for p in props if p not in (own, av)]),
            )),
        ))
    for g in vocab.shared:
        ch = ch_name(g)
        axioms.append(NamedFormula(
            f"sync_e_{g}",
            rel.Forall(s, rel.conj(
                rel.Exists(t, rel.conj(rel.ActAtom(ch, s, t), rel.PropAtom(g, t))),
                rel.Exists(t, rel.conj(rel.ActAtom(ch, s, t), rel.Not(rel.PropAtom(g, t)))),
            )),
        ))
    for g in vocab.shared_props:
        ch = vocab.env_action_for(g)
        axioms.append(NamedFormula(
            f"sync_f_{g}",
            rel.forall([s, t], rel.Implies(rel.ActAtom(ch, s, t), _frame(s, t, [p for p in props if p != g]))),
        ))
    return axioms


def sync_axioms(vocab: Vocabulary) -> List[RelFormula]:
    """
    Lock synchronization axioms (a)-(f) instantiated over ``vocab``.

    (f) ranges over every shared proposition, ``av_<lock>`` included, whose
    environment action is ``ch_<lock>``.
    """
    return [named.formula for named in named_sync_axioms(vocab)]


def saturation_axioms(spec: ProcessSpec, preconds: Optional[Mapping[str, RelFormula]] = None) -> List[RelFormula]:
    """
    One formula ``forall s . Pre(s) implies exists s' . act(s, s')`` per internal action.

    Args:
        spec: process specification
        preconds: action -> precondition over ``s``; defaults to the spec's own

    Raises:
        SpecError: when an internal action has no precondition
    """
    preconds = dict(spec.preconditions if preconds is None else preconds)
    missing = [a for a in spec.vocab.actions if a not in preconds]
    if missing:
        raise SpecError(f"No precondition for actions {missing} of {spec.name}")
    result = []
    for action in spec.vocab.actions:
        pre = preconds[action]
        if not rel.free_vars(pre) <= {PRE_VAR}:
            raise SpecError(f"Precondition of {action} may only mention {PRE_VAR}")
        rel.check_symbols(pre, spec.vocab)
        result.append(rel.Forall(PRE_VAR, rel.Implies(pre, rel.Exists("s'", rel.ActAtom(action, PRE_VAR, "s'")))))
    return result


def saturate(spec: ProcessSpec) -> ProcessSpec:
    """``spec`` extended with its saturation axioms."""
    axioms = saturation_axioms(spec)
    return spec.extend(NamedFormula(f"saturate_{a}", f) for a, f in zip(spec.vocab.actions, axioms))


def satisfies(spec: ProcessSpec, lts: Lts) -> bool:
    """
    Whether ``lts`` is an instance of ``spec``.

    Pinned formulas bind ``s<j>`` to state j, so a refined spec is only
    satisfied by LTSs over the reference's state count.
    """
    if not rel.eval_all(spec.formula_list(), lts):
        return False
    if spec.reference is None:
        return True
    if lts.num_states != spec.reference.num_states:
        return False
    return rel.eval_all(spec.pinned, lts, spec.pin_binding())


def phi_t(t: Lts, vocab: Vocabulary) -> RelFormula:
    """
    Body of the refinement formula of ``t``, over ``s0..sn``.

    Conjoins distinctness, the initial-state literals, every labeling
    literal, the negation of every absent transition and every present
    environment transition.
    """
    n = t.num_states
    parts: List[RelFormula] = []
    for i in range(n):
        for j in range(i + 1, n):
            parts.append(rel.Not(rel.Eq(pin(i), pin(j))))
    for i in range(n):
        parts.append(rel.InitAtom(pin(i)) if i in t.initials else rel.Not(rel.InitAtom(pin(i))))
    for i in range(n):
        for p in vocab.props:
            atom = rel.PropAtom(p, pin(i))
            parts.append(atom if t.holds(p, i) else rel.Not(atom))
    env = set(vocab.env_actions)
    for a in vocab.all_actions:
        for i in range(n):
            for j in range(n):
                atom = rel.ActAtom(a, pin(i), pin(j))
                if (i, a, j) not in t.transitions:
                    parts.append(rel.Not(atom))
                elif a in env:
                    parts.append(atom)
    return rel.conj(*parts)


def ref_spec(spec: ProcessSpec, t: Lts) -> ProcessSpec:
    """
    Specification whose instances are the internal-transition refinements of ``t`` satisfying ``spec``.

    Raises:
        SpecError: when ``spec`` is already refined or ``t`` is not an instance of it
    """
    if spec.reference is not None:
        raise SpecError(f"{spec.name} is already refined; refine the original specification")
    missing = [p for p in spec.vocab.props if not t.has_prop(p)]
    if missing or set(spec.vocab.all_actions) != set(t.actions):
        raise SpecError(f"Reference LTS does not match the vocabulary of {spec.name}")
    if not satisfies(spec, t):
        raise SpecError(f"Reference LTS is not an instance of {spec.name}")
    return replace(spec, reference=t, pinned=(phi_t(t, spec.vocab),))


def oplus(spec: ProcessSpec, psi: RelFormula) -> ProcessSpec:
    """
    Strengthen the refinement body of ``spec`` with ``psi``.

    Raises:
        SpecError: when ``spec`` is not refined or ``psi`` has unpinned free variables
    """
    if spec.reference is None:
        raise SpecError(f"{spec.name} has no pinned constants")
    unpinned = rel.free_vars(psi) - set(spec.pinned_constants)
    if unpinned:
        raise SpecError(f"Free variables {sorted(unpinned)} are not pinned constants of {spec.name}")
    rel.check_symbols(psi, spec.vocab)
    return replace(spec, pinned=spec.pinned + (psi,))


def path_clauses(path: FinitePath, actions: Iterable[str]) -> PathFormulaSet:
    """Clause view of :func:`cnf_of_path`."""
    if len(path) == 0:
        raise SpecError("A path formula needs at least one step")
    actions = tuple(actions)
    clauses = tuple(
        rel.disj(*(rel.ActAtom(a, pin(x), pin(y)) for a in actions))
        for (x, _, y) in path.steps()
    )
    return PathFormulaSet(clauses)


def cnf_of_path(path: FinitePath, actions: Iterable[str]) -> RelFormula:
    """Every step of ``path`` is taken by some action."""
    return path_clauses(path, actions).formula


def not_of_path(path: FinitePath, actions: Iterable[str]) -> RelFormula:
    """
    Some non-stuttering step of ``path`` is taken by no action.

    Raises:
        SpecError: when every step of the path stays in place
    """
    if len(path) == 0 or path.is_stutter_only():
        raise SpecError("Exclusion formula needs a path with a step between distinct states")
    actions = tuple(actions)
    disjuncts = []
    for (x, _, y) in path.steps():
        blocked = [rel.Not(rel.ActAtom(a, pin(x), pin(y))) for a in actions]
        disjuncts.append(rel.conj(*blocked, rel.Not(rel.Eq(pin(x), pin(y)))))
    return rel.disj(*disjuncts)
