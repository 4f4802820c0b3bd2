"""
Parser for the relational formula syntax of the Synthlock project.

Syntax (quantifiers bind as far right as possible; nest them inside
parentheses when they are not the whole formula)::

    forall s, s2 . p(s) and act(s, s2) implies (exists t . reach(s2, t) and q(t))

Atoms: ``p(s)``, ``act(s, s2)``, ``star(act)(s, s2)``, ``reach(s, s2)``,
``init(s)``, ``s = s2``, ``s != s2``, ``true``, ``false``.
Connectives by increasing binding strength: ``iff``, ``implies`` (right
associative), ``or``, ``and``, ``not``.
"""

from typing import Optional

from lark import Lark, Transformer
from lark.exceptions import UnexpectedInput, VisitError

from src.errors import FormulaError, ParseError
from src.logic import formulas as rel
from src.lts.core import Vocabulary

FORMULA_GRAMMAR = r"""
?formula: quantified
        | equiv

quantified: "forall" names "." formula  -> forall_
          | "exists" names "." formula  -> exists_

names: NAME ("," NAME)*

?equiv: implication
      | implication "iff" implication   -> iff

?implication: disjunction
            | disjunction "implies" implication  -> implies

?disjunction: conjunction
            | disjunction "or" conjunction   -> or_

?conjunction: negation
            | conjunction "and" negation     -> and_

?negation: "not" negation   -> not_
         | atom
         | "(" formula ")"

?atom: "true"                                -> true
     | "false"                               -> false
     | NAME "(" NAME ")"                     -> unary
     | NAME "(" NAME "," NAME ")"            -> binary
     | "star" "(" NAME ")" "(" NAME "," NAME ")"  -> star
     | NAME "=" NAME                         -> eq
     | NAME "!=" NAME                        -> neq

NAME: /[A-Za-z_][A-Za-z0-9_]*'*/

%import common.WS
%ignore WS
"""


class _FormulaBuilder(Transformer):
    def names(self, items):
        return [str(token) for token in items]

    def forall_(self, items):
        variables, body = items
        return rel.forall(variables, body)

    def exists_(self, items):
        variables, body = items
        return rel.exists(variables, body)

    def iff(self, items):
        return rel.Iff(items[0], items[1])

    def implies(self, items):
        return rel.Implies(items[0], items[1])

    def or_(self, items):
        return rel.disj(*items)

    def and_(self, items):
        return rel.conj(*items)

    def not_(self, items):
        return rel.Not(items[0])

    def true(self, _items):
        return rel.TRUE

    def false(self, _items):
        return rel.FALSE

    def unary(self, items):
        name, term = (str(token) for token in items)
        if name == "init":
            return rel.InitAtom(term)
        if name == "reach":
            raise FormulaError("reach takes two state arguments")
        return rel.PropAtom(name, term)

    def binary(self, items):
        name, src, dst = (str(token) for token in items)
        if name == "reach":
            return rel.ReachAtom(src, dst)
        if name == "init":
            raise FormulaError("init takes one state argument")
        return rel.ActAtom(name, src, dst)

    def star(self, items):
        action, src, dst = (str(token) for token in items)
        return rel.StarAtom(action, src, dst)

    def eq(self, items):
        return rel.Eq(str(items[0]), str(items[1]))

    def neq(self, items):
        return rel.Not(rel.Eq(str(items[0]), str(items[1])))


_PARSER = Lark(FORMULA_GRAMMAR, start="formula", parser="lalr")


def parse_formula(text: str, vocab: Optional[Vocabulary] = None) -> rel.RelFormula:
    """
    Parse a relational formula.

    Args:
        text: formula source
        vocab: when given, every proposition and action must be declared in it

    Returns:
        The formula AST

    Raises:
        ParseError: on syntax errors, with line and column
        FormulaError: on undeclared symbols
    """
    try:
        tree = _PARSER.parse(text)
    except UnexpectedInput as err:
        line = getattr(err, "line", None)
        column = getattr(err, "column", None)
        if line is not None and line < 0:
            line, column = None, None
        raise ParseError(f"Invalid formula syntax near {_context(text, err)!r}", line, column) from None
    try:
        formula = _FormulaBuilder().transform(tree)
    except VisitError as err:
        raise err.orig_exc from None
    if vocab is not None:
        rel.check_symbols(formula, vocab)
    return formula


def _context(text: str, err: UnexpectedInput) -> str:
    try:
        return err.get_context(text, span=20).splitlines()[0].strip()
    except Exception:
        return text[:40]
