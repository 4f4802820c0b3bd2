"""
LTL without next for the Synthlock project.

Concrete syntax (loosest binding first)::

    ->   right associative implication
    |    disjunction
    &    conjunction
    U W  until, weak until (right associative)
    ! G F  negation, always, eventually

Atoms are ``name`` (shared variables) or ``name@i`` (local of process i),
plus ``true`` and ``false``. ``X`` is recognised only to be rejected.

Derived operators are desugared while parsing: ``F p = true U p``,
``G p = !F !p``, ``p W q = (p U q) | G p``. :func:`nnf` pushes negations to
the atoms with a release operator.
"""

from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Sequence, Set

from lark import Lark, Transformer
from lark.exceptions import UnexpectedInput, VisitError

from src.errors import LtlError


@dataclass(frozen=True)
class LtlFormula:
    pass


@dataclass(frozen=True)
class Bool(LtlFormula):
    value: bool


@dataclass(frozen=True)
class Atom(LtlFormula):
    name: str


@dataclass(frozen=True)
class Not(LtlFormula):
    operand: LtlFormula


@dataclass(frozen=True)
class And(LtlFormula):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class Or(LtlFormula):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class Until(LtlFormula):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class Release(LtlFormula):
    left: LtlFormula
    right: LtlFormula


TRUE = Bool(True)
FALSE = Bool(False)


def eventually(f: LtlFormula) -> LtlFormula:
    return Until(TRUE, f)


def always(f: LtlFormula) -> LtlFormula:
    return Not(eventually(Not(f)))


def weak_until(f: LtlFormula, g: LtlFormula) -> LtlFormula:
    return Or(Until(f, g), always(f))


def implies(f: LtlFormula, g: LtlFormula) -> LtlFormula:
    return Or(Not(f), g)


LTL_GRAMMAR = r"""
?start: implication

?implication: disjunction
            | disjunction "->" implication   -> implies

?disjunction: conjunction
            | disjunction "|" conjunction    -> or_

?conjunction: temporal
            | conjunction "&" temporal       -> and_

?temporal: unary
         | unary "U" temporal                -> until
         | unary "W" temporal                -> weak_until

?unary: "!" unary        -> not_
      | "G" unary        -> always
      | "F" unary        -> eventually
      | "X" unary        -> next_
      | "true"           -> true
      | "false"          -> false
      | NAME             -> atom
      | NAME "@" INT     -> indexed
      | "(" implication ")"

NAME: /[A-Za-z_][A-Za-z0-9_]*/

%import common.INT
%import common.WS
%ignore WS
"""


class _LtlBuilder(Transformer):
    def implies(self, items):
        return implies(items[0], items[1])

    def or_(self, items):
        return Or(items[0], items[1])

    def and_(self, items):
        return And(items[0], items[1])

    def until(self, items):
        return Until(items[0], items[1])

    def weak_until(self, items):
        return weak_until(items[0], items[1])

    def not_(self, items):
        return Not(items[0])

    def always(self, items):
        return always(items[0])

    def eventually(self, items):
        return eventually(items[0])

    def next_(self, _items):
        raise LtlError("The next operator X is not allowed: properties must be stutter invariant")

    def true(self, _items):
        return TRUE

    def false(self, _items):
        return FALSE

    def atom(self, items):
        return Atom(str(items[0]))

    def indexed(self, items):
        return Atom(f"{items[0]}@{int(items[1])}")


_PARSER = Lark(LTL_GRAMMAR, start="start", parser="lalr")


def parse_ltl(text: str, atoms: Optional[Iterable[str]] = None) -> LtlFormula:
    """
    Parse an LTL formula.

    Args:
        text: formula source
        atoms: when given, the atom names the formula may mention

    Raises:
        LtlError: on syntax errors, the X operator or unknown atoms
    """
    try:
        tree = _PARSER.parse(text)
    except UnexpectedInput as err:
        line = getattr(err, "line", None)
        column = getattr(err, "column", None)
        if line is not None and line < 0:
            line, column = None, None
        raise LtlError(f"Invalid LTL syntax in {text.strip()!r}", line, column) from None
    try:
        formula = _LtlBuilder().transform(tree)
    except VisitError as err:
        raise err.orig_exc from None
    if atoms is not None:
        unknown = sorted(atom_names(formula) - set(atoms))
        if unknown:
            raise LtlError(f"Unknown atoms in property: {unknown}")
    return formula


def atom_names(f: LtlFormula) -> Set[str]:
    if isinstance(f, Atom):
        return {f.name}
    if isinstance(f, Bool):
        return set()
    if isinstance(f, Not):
        return atom_names(f.operand)
    return atom_names(f.left) | atom_names(f.right)


def nnf(f: LtlFormula, negate: bool = False) -> LtlFormula:
    """Negation normal form of ``f`` (of ``!f`` when ``negate``)."""
    if isinstance(f, Bool):
        return Bool(f.value != negate)
    if isinstance(f, Atom):
        return Not(f) if negate else f
    if isinstance(f, Not):
        return nnf(f.operand, not negate)
    if isinstance(f, And):
        return (Or if negate else And)(nnf(f.left, negate), nnf(f.right, negate))
    if isinstance(f, Or):
        return (And if negate else Or)(nnf(f.left, negate), nnf(f.right, negate))
    if isinstance(f, Until):
        return (Release if negate else Until)(nnf(f.left, negate), nnf(f.right, negate))
    if isinstance(f, Release):
        return (Until if negate else Release)(nnf(f.left, negate), nnf(f.right, negate))
    raise LtlError(f"Unknown LTL node: {f!r}")


def to_text(f: LtlFormula) -> str:
    """Fully parenthesized concrete syntax."""
    if isinstance(f, Bool):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return f"!{to_text(f.operand)}"
    if isinstance(f, Release):
        return f"!(!{to_text(f.left)} U !{to_text(f.right)})"
    symbol = {And: "&", Or: "|", Until: "U"}[type(f)]
    return f"({to_text(f.left)} {symbol} {to_text(f.right)})"


def eval_lasso(f: LtlFormula, stem: Sequence[FrozenSet[str]], loop: Sequence[FrozenSet[str]]) -> bool:
    """
    Truth of ``f`` on the infinite word ``stem loop loop ...``.

    Args:
        f: formula
        stem: letters before the loop (atom sets)
        loop: the repeated letters, at least one

    Returns:
        Whether the word satisfies ``f`` at position 0
    """
    if not loop:
        raise LtlError("A lasso word needs a non-empty loop")
    word = list(stem) + list(loop)
    size = len(word)
    succ = [i + 1 for i in range(size - 1)] + [len(stem)]
    return _values(f, word, succ)[0]


def _values(f: LtlFormula, word: List[FrozenSet[str]], succ: List[int]) -> List[bool]:
    size = len(word)
    if isinstance(f, Bool):
        return [f.value] * size
    if isinstance(f, Atom):
        return [f.name in letter for letter in word]
    if isinstance(f, Not):
        return [not v for v in _values(f.operand, word, succ)]
    left = _values(f.left, word, succ)
    right = _values(f.right, word, succ)
    if isinstance(f, And):
        return [a and b for a, b in zip(left, right)]
    if isinstance(f, Or):
        return [a or b for a, b in zip(left, right)]
    if isinstance(f, Until):
        values = [False] * size
        changed = True
        while changed:
            changed = False
            for i in reversed(range(size)):
                v = right[i] or (left[i] and values[succ[i]])
                if v != values[i]:
                    values[i] = v
                    changed = True
        return values
    if isinstance(f, Release):
        values = [True] * size
        changed = True
        while changed:
            changed = False
            for i in reversed(range(size)):
                v = right[i] and (left[i] or values[succ[i]])
                if v != values[i]:
                    values[i] = v
                    changed = True
        return values
    raise LtlError(f"Unknown LTL node: {f!r}")
