"""
Relational formulas for the Synthlock project.

First-order logic over a single state sort with reflexive-transitive
closure. Terms are state variables; pinned state constants of a refined
specification are free variables named ``s0..sn`` bound by the caller.

The evaluator in this module is the reference semantics: the grounding,
the model finder and the synthesis loop are all tested against it.
"""

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Set, Tuple

from src.errors import FormulaError
from src.lts.core import Lts, Vocabulary


@dataclass(frozen=True)
class RelFormula:
    pass


@dataclass(frozen=True)
class Const(RelFormula):
    value: bool


@dataclass(frozen=True)
class PropAtom(RelFormula):
    prop: str
    term: str


@dataclass(frozen=True)
class InitAtom(RelFormula):
    term: str


@dataclass(frozen=True)
class ActAtom(RelFormula):
    action: str
    src: str
    dst: str


@dataclass(frozen=True)
class StarAtom(RelFormula):
    """``action*(src, dst)``: reflexive-transitive closure of one action."""

    action: str
    src: str
    dst: str


@dataclass(frozen=True)
class ReachAtom(RelFormula):
    """``Post*(src, dst)``: reflexive-transitive closure over all actions."""

    src: str
    dst: str


@dataclass(frozen=True)
class Eq(RelFormula):
    left: str
    right: str


@dataclass(frozen=True)
class Not(RelFormula):
    operand: RelFormula


@dataclass(frozen=True)
class And(RelFormula):
    operands: Tuple[RelFormula, ...]


@dataclass(frozen=True)
class Or(RelFormula):
    operands: Tuple[RelFormula, ...]


@dataclass(frozen=True)
class Implies(RelFormula):
    left: RelFormula
    right: RelFormula


@dataclass(frozen=True)
class Iff(RelFormula):
    left: RelFormula
    right: RelFormula


@dataclass(frozen=True)
class Forall(RelFormula):
    var: str
    body: RelFormula


@dataclass(frozen=True)
class Exists(RelFormula):
    var: str
    body: RelFormula


TRUE = Const(True)
FALSE = Const(False)


def conj(*operands: RelFormula) -> RelFormula:
    """Conjunction; flattens nested conjunctions."""
    items = []
    for f in operands:
        if isinstance(f, And):
            items.extend(f.operands)
        elif f != TRUE:
            items.append(f)
    if not items:
        return TRUE
    if len(items) == 1:
        return items[0]
    return And(tuple(items))


def disj(*operands: RelFormula) -> RelFormula:
    """Disjunction; flattens nested disjunctions."""
    items = []
    for f in operands:
        if isinstance(f, Or):
            items.extend(f.operands)
        elif f != FALSE:
            items.append(f)
    if not items:
        return FALSE
    if len(items) == 1:
        return items[0]
    return Or(tuple(items))


def forall(variables: Iterable[str], body: RelFormula) -> RelFormula:
    for var in reversed(list(variables)):
        body = Forall(var, body)
    return body


def exists(variables: Iterable[str], body: RelFormula) -> RelFormula:
    for var in reversed(list(variables)):
        body = Exists(var, body)
    return body


def free_vars(f: RelFormula) -> FrozenSet[str]:
    """Free state variables of a formula."""
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, (PropAtom, InitAtom)):
        return frozenset((f.term,))
    if isinstance(f, (ActAtom, StarAtom, ReachAtom)):
        return frozenset((f.src, f.dst))
    if isinstance(f, Eq):
        return frozenset((f.left, f.right))
    if isinstance(f, Not):
        return free_vars(f.operand)
    if isinstance(f, (And, Or)):
        result: FrozenSet[str] = frozenset()
        for g in f.operands:
            result |= free_vars(g)
        return result
    if isinstance(f, (Implies, Iff)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (Forall, Exists)):
        return free_vars(f.body) - {f.var}
    raise FormulaError(f"Unknown formula node: {f!r}")


def symbols(f: RelFormula) -> Tuple[Set[str], Set[str]]:
    """Propositions and actions mentioned by a formula."""
    props: Set[str] = set()
    actions: Set[str] = set()

    def walk(g: RelFormula) -> None:
        if isinstance(g, PropAtom):
            props.add(g.prop)
        elif isinstance(g, (ActAtom, StarAtom)):
            actions.add(g.action)
        elif isinstance(g, Not):
            walk(g.operand)
        elif isinstance(g, (And, Or)):
            for h in g.operands:
                walk(h)
        elif isinstance(g, (Implies, Iff)):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, (Forall, Exists)):
            walk(g.body)

    walk(f)
    return props, actions


def check_symbols(f: RelFormula, vocab: Vocabulary) -> None:
    """Raise FormulaError when ``f`` mentions a symbol ``vocab`` does not declare."""
    props, actions = symbols(f)
    unknown_props = sorted(props - set(vocab.props))
    unknown_actions = sorted(actions - set(vocab.all_actions))
    if unknown_props:
        raise FormulaError(f"Undeclared propositions: {unknown_props}")
    if unknown_actions:
        raise FormulaError(f"Undeclared actions: {unknown_actions}")


def depth(f: RelFormula) -> int:
    if isinstance(f, Not):
        return 1 + depth(f.operand)
    if isinstance(f, (And, Or)):
        return 1 + max((depth(g) for g in f.operands), default=0)
    if isinstance(f, (Implies, Iff)):
        return 1 + max(depth(f.left), depth(f.right))
    if isinstance(f, (Forall, Exists)):
        return 1 + depth(f.body)
    return 0


class _Evaluator:
    def __init__(self, lts: Lts):
        self.lts = lts
        self._closures: Dict[Optional[str], Dict[int, FrozenSet[int]]] = {}

    def closure(self, action: Optional[str]) -> Dict[int, FrozenSet[int]]:
        """Reflexive-transitive successors per state; ``None`` means every action."""
        if action not in self._closures:
            lts = self.lts
            result = {}
            for s in lts.states:
                seen = {s}
                stack = [s]
                while stack:
                    u = stack.pop()
                    for a, t in lts.moves(u):
                        if (action is None or a == action) and t not in seen:
                            seen.add(t)
                            stack.append(t)
                result[s] = frozenset(seen)
            self._closures[action] = result
        return self._closures[action]

    def term(self, name: str, env: Mapping[str, int]) -> int:
        if name not in env:
            raise FormulaError(f"Unbound state variable: {name}")
        return env[name]

    def run(self, f: RelFormula, env: Mapping[str, int]) -> bool:
        lts = self.lts
        if isinstance(f, Const):
            return f.value
        if isinstance(f, PropAtom):
            if not lts.has_prop(f.prop):
                raise FormulaError(f"Undeclared proposition: {f.prop}")
            return lts.holds(f.prop, self.term(f.term, env))
        if isinstance(f, InitAtom):
            return self.term(f.term, env) in lts.initials
        if isinstance(f, ActAtom):
            if f.action not in lts.actions:
                raise FormulaError(f"Undeclared action: {f.action}")
            return (self.term(f.src, env), f.action, self.term(f.dst, env)) in lts.transitions
        if isinstance(f, StarAtom):
            if f.action not in lts.actions:
                raise FormulaError(f"Undeclared action: {f.action}")
            return self.term(f.dst, env) in self.closure(f.action)[self.term(f.src, env)]
        if isinstance(f, ReachAtom):
            return self.term(f.dst, env) in self.closure(None)[self.term(f.src, env)]
        if isinstance(f, Eq):
            return self.term(f.left, env) == self.term(f.right, env)
        if isinstance(f, Not):
            return not self.run(f.operand, env)
        if isinstance(f, And):
            return all(self.run(g, env) for g in f.operands)
        if isinstance(f, Or):
            return any(self.run(g, env) for g in f.operands)
        if isinstance(f, Implies):
            return (not self.run(f.left, env)) or self.run(f.right, env)
        if isinstance(f, Iff):
            return self.run(f.left, env) == self.run(f.right, env)
        if isinstance(f, Forall):
            return all(self.run(f.body, {**env, f.var: s}) for s in lts.states)
        if isinstance(f, Exists):
            return any(self.run(f.body, {**env, f.var: s}) for s in lts.states)
        raise FormulaError(f"Unknown formula node: {f!r}")


def eval_formula(f: RelFormula, lts: Lts, env: Optional[Mapping[str, int]] = None) -> bool:
    """
    Truth value of ``f`` in ``lts``.

    Args:
        f: formula
        lts: transition system interpreting the symbols
        env: binding of the free variables to states

    Returns:
        True iff ``lts`` satisfies ``f`` under ``env``
    """
    return _Evaluator(lts).run(f, dict(env or {}))


def eval_all(formulas: Iterable[RelFormula], lts: Lts, env: Optional[Mapping[str, int]] = None) -> bool:
    """Evaluate several formulas sharing one closure cache."""
    evaluator = _Evaluator(lts)
    env = dict(env or {})
    return all(evaluator.run(f, env) for f in formulas)


_BINARY_RANK = {Iff: 1, Implies: 2, Or: 3, And: 4}


def to_text(f: RelFormula) -> str:
    """Concrete syntax accepted by :func:`src.logic.parser.parse_formula`."""
    return _text(f, 0)


def _text(f: RelFormula, context: int) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, PropAtom):
        return f"{f.prop}({f.term})"
    if isinstance(f, InitAtom):
        return f"init({f.term})"
    if isinstance(f, ActAtom):
        return f"{f.action}({f.src}, {f.dst})"
    if isinstance(f, StarAtom):
        return f"star({f.action})({f.src}, {f.dst})"
    if isinstance(f, ReachAtom):
        return f"reach({f.src}, {f.dst})"
    if isinstance(f, Eq):
        return f"{f.left} = {f.right}"
    if isinstance(f, Not):
        return "not " + _text(f.operand, 5)
    if isinstance(f, (Forall, Exists)):
        word = "forall" if isinstance(f, Forall) else "exists"
        variables = [f.var]
        body = f.body
        while isinstance(body, type(f)):
            variables.append(body.var)
            body = body.body
        text = f"{word} {', '.join(variables)} . {_text(body, 0)}"
        return text if context == 0 else f"({text})"
    rank = _BINARY_RANK[type(f)]
    if isinstance(f, And):
        text = " and ".join(_text(g, rank + 1) for g in f.operands)
    elif isinstance(f, Or):
        text = " or ".join(_text(g, rank + 1) for g in f.operands)
    elif isinstance(f, Implies):
        text = f"{_text(f.left, rank + 1)} implies {_text(f.right, rank)}"
    else:
        text = f"{_text(f.left, rank + 1)} iff {_text(f.right, rank + 1)}"
    return text if rank >= context else f"({text})"
