"""
Grounding of relational formulas for the Synthlock project.

This module turns a RelFormula over a bounded universe of k states into a
propositional formula over ground atoms, and a propositional formula into
clauses with the Tseitin transformation.

Ground atoms:
    Prop(p, i)                 proposition p holds at state i
    Edge(a, i, j)              transition i -a-> j
    Init(i)                    state i is initial
    Closure(r, level, i, j)    j reachable from i in at most 2**level r-steps

Closure atoms are defined by iterative squaring with biconditionals, so the
encoding is exact in both polarities.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Set, Tuple, Union

from src.errors import FormulaError
from src.logic import formulas as rel
from src.lts.core import Vocabulary

logger = logging.getLogger(__name__)

# Relation name of Post* (every action); cannot collide with an action name.
POST = "@post"


class Prop(NamedTuple):
    prop: str
    state: int


class Edge(NamedTuple):
    action: str
    src: int
    dst: int


class Init(NamedTuple):
    state: int


class Closure(NamedTuple):
    relation: str
    level: int
    src: int
    dst: int


Atom = Union[Prop, Edge, Init, Closure]


class PropFormula:
    """
    Propositional formula node with a cached structural hash.

    Build nodes with :func:`p_var`, :func:`p_not`, :func:`p_and`,
    :func:`p_or`; the constructors simplify constants and flatten.
    """

    __slots__ = ("op", "args", "atom", "_hash")

    def __init__(self, op: str, args: Tuple["PropFormula", ...] = (), atom=None):
        self.op = op
        self.args = args
        self.atom = atom
        self._hash = hash((op, args, atom))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, PropFormula) or self._hash != other._hash:
            return False
        return self.op == other.op and self.atom == other.atom and self.args == other.args

    def __repr__(self) -> str:
        if self.op == "const":
            return "TRUE" if self.atom else "FALSE"
        if self.op == "var":
            return repr(self.atom)
        if self.op == "not":
            return f"~{self.args[0]!r}"
        joiner = " & " if self.op == "and" else " | "
        return "(" + joiner.join(repr(a) for a in self.args) + ")"


P_TRUE = PropFormula("const", atom=True)
P_FALSE = PropFormula("const", atom=False)


def p_var(atom: Atom) -> PropFormula:
    return PropFormula("var", atom=atom)


def p_not(f: PropFormula) -> PropFormula:
    if f.op == "const":
        return P_FALSE if f.atom else P_TRUE
    if f.op == "not":
        return f.args[0]
    return PropFormula("not", (f,))


def _junction(op: str, items: Iterable[PropFormula]) -> PropFormula:
    unit, zero = (P_TRUE, P_FALSE) if op == "and" else (P_FALSE, P_TRUE)
    collected: Dict[PropFormula, None] = {}
    for f in items:
        if f.op == op:
            for g in f.args:
                collected[g] = None
        elif f == zero:
            return zero
        elif f != unit:
            collected[f] = None
    for f in collected:
        if p_not(f) in collected:
            return zero
    if not collected:
        return unit
    if len(collected) == 1:
        return next(iter(collected))
    return PropFormula(op, tuple(collected))


def p_and(items: Iterable[PropFormula]) -> PropFormula:
    return _junction("and", items)


def p_or(items: Iterable[PropFormula]) -> PropFormula:
    return _junction("or", items)


def p_iff(a: PropFormula, b: PropFormula) -> PropFormula:
    return p_and([p_or([p_not(a), b]), p_or([a, p_not(b)])])


def p_eval(f: PropFormula, assignment: Mapping[Atom, bool]) -> bool:
    """Truth value under a total assignment of the formula's atoms."""
    if f.op == "const":
        return f.atom
    if f.op == "var":
        return assignment[f.atom]
    if f.op == "not":
        return not p_eval(f.args[0], assignment)
    if f.op == "and":
        return all(p_eval(g, assignment) for g in f.args)
    return any(p_eval(g, assignment) for g in f.args)


def p_atoms(f: PropFormula) -> Set[Atom]:
    found: Set[Atom] = set()
    seen: Set[int] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if id(g) in seen:
            continue
        seen.add(id(g))
        if g.op == "var":
            found.add(g.atom)
        stack.extend(g.args)
    return found


def closure_levels(k: int) -> int:
    """Squaring rounds needed so that level paths cover k-1 steps."""
    return math.ceil(math.log2(k)) if k > 1 else 0


class _Grounder:
    def __init__(self, k: int, vocab: Vocabulary):
        self.k = k
        self.levels = closure_levels(k)
        self.props = set(vocab.props)
        self.actions = tuple(vocab.all_actions)
        self.action_set = set(self.actions)
        self.relations: Dict[str, None] = {}

    def index(self, term: str, env: Mapping[str, int]) -> int:
        if term not in env:
            raise FormulaError(f"Unbound state variable: {term}")
        return env[term]

    def closure_atom(self, relation: str, src: int, dst: int) -> PropFormula:
        self.relations[relation] = None
        return p_var(Closure(relation, self.levels, src, dst))

    def run(self, f: rel.RelFormula, env: Dict[str, int]) -> PropFormula:
        if isinstance(f, rel.Const):
            return P_TRUE if f.value else P_FALSE
        if isinstance(f, rel.PropAtom):
            if f.prop not in self.props:
                raise FormulaError(f"Undeclared proposition: {f.prop}")
            return p_var(Prop(f.prop, self.index(f.term, env)))
        if isinstance(f, rel.InitAtom):
            return p_var(Init(self.index(f.term, env)))
        if isinstance(f, rel.ActAtom):
            if f.action not in self.action_set:
                raise FormulaError(f"Undeclared action: {f.action}")
            return p_var(Edge(f.action, self.index(f.src, env), self.index(f.dst, env)))
        if isinstance(f, rel.StarAtom):
            if f.action not in self.action_set:
                raise FormulaError(f"Undeclared action: {f.action}")
            return self.closure_atom(f.action, self.index(f.src, env), self.index(f.dst, env))
        if isinstance(f, rel.ReachAtom):
            return self.closure_atom(POST, self.index(f.src, env), self.index(f.dst, env))
        if isinstance(f, rel.Eq):
            return P_TRUE if self.index(f.left, env) == self.index(f.right, env) else P_FALSE
        if isinstance(f, rel.Not):
            return p_not(self.run(f.operand, env))
        if isinstance(f, rel.And):
            return p_and(self.run(g, env) for g in f.operands)
        if isinstance(f, rel.Or):
            return p_or(self.run(g, env) for g in f.operands)
        if isinstance(f, rel.Implies):
            return p_or([p_not(self.run(f.left, env)), self.run(f.right, env)])
        if isinstance(f, rel.Iff):
            return p_iff(self.run(f.left, env), self.run(f.right, env))
        if isinstance(f, rel.Forall):
            return p_and(self.run(f.body, {**env, f.var: s}) for s in range(self.k))
        if isinstance(f, rel.Exists):
            return p_or(self.run(f.body, {**env, f.var: s}) for s in range(self.k))
        raise FormulaError(f"Unknown formula node: {f!r}")

    def definitions(self) -> List[PropFormula]:
        defs = []
        k = self.k
        for relation in self.relations:
            base = self.actions if relation == POST else (relation,)
            for i in range(k):
                for j in range(k):
                    step = P_TRUE if i == j else p_or(p_var(Edge(a, i, j)) for a in base)
                    defs.append(p_iff(p_var(Closure(relation, 0, i, j)), step))
            for level in range(self.levels):
                for i in range(k):
                    for j in range(k):
                        joined = p_or(
                            p_and([p_var(Closure(relation, level, i, m)), p_var(Closure(relation, level, m, j))])
                            for m in range(k)
                        )
                        defs.append(p_iff(p_var(Closure(relation, level + 1, i, j)), joined))
        return defs


def ground(
    f: Union[rel.RelFormula, Sequence[rel.RelFormula]],
    k: int,
    vocab: Vocabulary,
    binding: Optional[Mapping[str, int]] = None,
) -> PropFormula:
    """
    Ground a formula (or a conjunction of formulas) over states 0..k-1.

    Args:
        f: formula or list of formulas (conjoined)
        k: number of states
        vocab: vocabulary declaring the symbols
        binding: free variable -> state constant (< k)

    Returns:
        Propositional formula over ground atoms, closure definitions included
    """
    if k <= 0:
        raise FormulaError(f"State bound must be positive, got {k}")
    env = dict(binding or {})
    for var, state in env.items():
        if not 0 <= state < k:
            raise FormulaError(f"Variable {var} bound to state {state} outside 0..{k - 1}")
    grounder = _Grounder(k, vocab)
    items = [f] if isinstance(f, rel.RelFormula) else list(f)
    main = p_and(grounder.run(g, env) for g in items)
    return p_and([main] + grounder.definitions())


@dataclass
class CnfClauses:
    """Clause set with the variable numbering of its atoms."""

    clauses: List[List[int]] = field(default_factory=list)
    atom_vars: Dict[Atom, int] = field(default_factory=dict)
    num_vars: int = 0

    def var(self, atom: Atom) -> int:
        """Variable of ``atom``, registering it when new."""
        if atom not in self.atom_vars:
            self.num_vars += 1
            self.atom_vars[atom] = self.num_vars
        return self.atom_vars[atom]

    def fresh(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def projection(self, atoms: Optional[Iterable[Atom]] = None) -> Tuple[int, ...]:
        """Variables of the given atoms (default: every registered atom)."""
        if atoms is None:
            return tuple(self.atom_vars.values())
        return tuple(self.atom_vars[a] for a in atoms)


class _Tseitin:
    def __init__(self, cnf: CnfClauses):
        self.cnf = cnf
        self.memo: Dict[PropFormula, int] = {}

    def literal(self, f: PropFormula) -> int:
        if f.op == "var":
            return self.cnf.var(f.atom)
        if f.op == "not":
            return -self.literal(f.args[0])
        if f in self.memo:
            return self.memo[f]
        v = self.cnf.fresh()
        clauses = self.cnf.clauses
        if f.op == "const":
            clauses.append([v] if f.atom else [-v])
        else:
            lits = [self.literal(g) for g in f.args]
            if f.op == "and":
                for lit in lits:
                    clauses.append([-v, lit])
                clauses.append([v] + [-lit for lit in lits])
            else:
                clauses.append([-v] + lits)
                for lit in lits:
                    clauses.append([v, -lit])
        self.memo[f] = v
        return v

    def require(self, f: PropFormula) -> None:
        if f.op == "const":
            if not f.atom:
                self.cnf.clauses.append([])
        elif f.op == "and":
            for g in f.args:
                self.require(g)
        elif f.op == "or":
            self.cnf.clauses.append([self.literal(g) for g in f.args])
        else:
            self.cnf.clauses.append([self.literal(f)])


def to_cnf(f: PropFormula, cnf: Optional[CnfClauses] = None) -> CnfClauses:
    """
    Tseitin transformation with structural hashing.

    Auxiliary variables get full biconditional definitions, so every model
    of ``f`` extends to exactly one model of the clauses.

    Args:
        f: propositional formula
        cnf: clause set to extend (its atom numbering is reused)

    Returns:
        The clause set
    """
    cnf = cnf if cnf is not None else CnfClauses()
    _Tseitin(cnf).require(f)
    logger.debug("Tseitin: %d variables, %d clauses", cnf.num_vars, len(cnf.clauses))
    return cnf
