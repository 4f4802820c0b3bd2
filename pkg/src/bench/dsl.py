"""
Specification language for the Synthlock project.

A spec file declares the system vocabulary, process templates and the
global property::

    system Mutex
    bound 4
    locks m

    process P(i in 0..1)
      locals ncs, cs
      action enterCS
        pre ncs(s) and av_m(s);
        post cs(s') and not ncs(s') and own_m(s');
      formula start: forall s . init(s) implies ncs(s) and not cs(s);
    end

    property G !(cs@0 & cs@1);

``pre`` is a formula over ``s``; it constrains the source of every
``action`` step and drives saturation. ``post`` may mention ``s`` and
``s'`` and constrains every step. ``uses`` restricts the locks and shared
variables a process observes (default: all of them). Inside a template,
``{i}``, ``{i+c}`` and ``{i-c}`` are replaced textually, modulo the number
of instances. Comments start with ``#`` and must sit between declarations.

The synchronization axioms are added to every process automatically.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from lark import Lark, Token, Tree
from lark.exceptions import UnexpectedInput

from src.checking.composition import local_atom
from src.checking.ltl import parse_ltl
from src.errors import FormulaError, LtsError, ParseError, SpecError
from src.logic import formulas as rel
from src.logic.formulas import RelFormula
from src.logic.parser import parse_formula
from src.lts.core import Vocabulary, av_name, own_name
from src.spec.model import PRE_VAR, NamedFormula, ProcessSpec, SystemSpec, named_sync_axioms

logger = logging.getLogger(__name__)

POST_VAR = "s'"

DSL_GRAMMAR = r"""
start: decl*

?decl: system | bound | locks | shared | process | property

system: "system" IDENT
bound: "bound" INT
locks: "locks" names
shared: "shared" names
property: "property" BODY ";"

names: IDENT ("," IDENT)*

process: "process" IDENT range? item* "end"
range: "(" IDENT "in" INT ".." INT ")"

?item: locals | uses | action | formula
locals: "locals" names
uses: "uses" names
action: "action" IDENT pre? post?
pre: "pre" BODY ";"
post: "post" BODY ";"
formula: "formula" IDENT ":" BODY ";"

IDENT: /[A-Za-z_][A-Za-z0-9_]*(\{[^}\n]*\}[A-Za-z0-9_]*)*/
BODY: /[^;\s#][^;]*/
COMMENT: /#[^\n]*/

%import common.INT
%import common.WS
%ignore WS
%ignore COMMENT
"""

_PARSER = Lark(DSL_GRAMMAR, start="start", parser="lalr")

_TEMPLATE = re.compile(r"\{\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:([+-])\s*(\d+))?\s*\}")


@dataclass(frozen=True)
class ActionDecl:
    name: str
    pre: Optional[RelFormula] = None
    post: Optional[RelFormula] = None


@dataclass(frozen=True)
class ProcessDecl:
    """User-level declarations of one expanded process."""

    name: str
    locals: Tuple[str, ...]
    locks: Tuple[str, ...]
    shared: Tuple[str, ...]
    actions: Tuple[ActionDecl, ...]
    formulas: Tuple[NamedFormula, ...]

    @property
    def vocab(self) -> Vocabulary:
        return Vocabulary(self.shared, self.locals, self.locks, tuple(a.name for a in self.actions))


@dataclass(frozen=True)
class SpecFile:
    """
    A parsed spec file.

    Attributes:
        name: system name
        bound: suggested state bound (None when not declared)
        system: the system specification, synchronization axioms included
        declarations: per-process declarations as written
    """

    name: str
    bound: Optional[int]
    system: SystemSpec
    declarations: Tuple[ProcessDecl, ...] = field(default=())

    @property
    def processes(self) -> Tuple[ProcessSpec, ...]:
        return self.system.processes


def _located(message: str, token: Token) -> ParseError:
    return ParseError(message, getattr(token, "line", None), getattr(token, "column", None))


def _expand(text: str, var: str, value: int, lo: int, count: int) -> str:
    def substitute(match: "re.Match") -> str:
        if match.group(1) != var:
            return match.group(0)
        offset = int(match.group(3) or 0)
        if match.group(2) == "-":
            offset = -offset
        return str(lo + (value - lo + offset) % count)

    return _TEMPLATE.sub(substitute, text)


def _body_formula(token: Token, text: str, vocab: Vocabulary, allowed: Sequence[str]) -> RelFormula:
    try:
        formula = parse_formula(text, vocab)
    except ParseError as err:
        line, column = token.line, token.column
        if err.line is not None:
            column = err.column + (column - 1 if err.line == 1 else 0)
            line = line + err.line - 1
        raise ParseError(err.message, line, column) from None
    except FormulaError as err:
        raise _located(str(err), token) from None
    extra = sorted(rel.free_vars(formula) - set(allowed))
    if extra:
        raise _located(f"Unbound state variables {extra}; allowed: {list(allowed)}", token)
    return formula


class _Builder:
    def __init__(self):
        self.name = "System"
        self.bound: Optional[int] = None
        self.locks: List[str] = []
        self.shared: List[str] = []
        self.templates: List[Tree] = []
        self.property: Optional[Token] = None

    def names(self, tree: Tree) -> List[Token]:
        return list(tree.children)

    def collect(self, tree: Tree) -> None:
        for decl in tree.children:
            kind = decl.data
            if kind == "system":
                self.name = str(decl.children[0])
            elif kind == "bound":
                self.bound = int(decl.children[0])
                if self.bound < 1:
                    raise _located("bound must be positive", decl.children[0])
            elif kind == "locks":
                self.locks += [str(t) for t in self.names(decl.children[0])]
            elif kind == "shared":
                self.shared += [str(t) for t in self.names(decl.children[0])]
            elif kind == "process":
                self.templates.append(decl)
            elif kind == "property":
                if self.property is not None:
                    raise _located("property declared twice", decl.children[0])
                self.property = decl.children[0]

    def instances(self, tree: Tree):
        name_token = tree.children[0]
        rest = tree.children[1:]
        if rest and isinstance(rest[0], Tree) and rest[0].data == "range":
            var_token, lo_token, hi_token = rest[0].children
            lo, hi = int(lo_token), int(hi_token)
            if hi < lo:
                raise _located(f"empty range {lo}..{hi}", lo_token)
            count = hi - lo + 1
            items = rest[1:]
            for value in range(lo, hi + 1):
                name = str(name_token)
                if "{" in name:
                    name = _expand(name, str(var_token), value, lo, count)
                else:
                    name = f"{name}{value}"
                yield name, items, (str(var_token), value, lo, count)
        else:
            yield str(name_token), rest, None

    def process(self, name: str, items: List[Tree], template) -> ProcessDecl:
        def text(token: Token) -> str:
            value = str(token)
            return _expand(value, *template) if template else value

        local_names: List[str] = []
        uses: Optional[List[Tuple[str, Token]]] = None
        action_items: List[Tree] = []
        formula_items: List[Tree] = []
        for item in items:
            if item.data == "locals":
                local_names += [text(t) for t in self.names(item.children[0])]
            elif item.data == "uses":
                uses = (uses or []) + [(text(t), t) for t in self.names(item.children[0])]
            elif item.data == "action":
                action_items.append(item)
            else:
                formula_items.append(item)

        if uses is None:
            locks, shared = tuple(self.locks), tuple(self.shared)
        else:
            locks_l, shared_l = [], []
            for used, token in uses:
                if used in self.locks:
                    locks_l.append(used)
                elif used in self.shared:
                    shared_l.append(used)
                else:
                    raise _located(f"{name} uses undeclared lock or shared variable {used}", token)
            locks, shared = tuple(dict.fromkeys(locks_l)), tuple(dict.fromkeys(shared_l))

        action_names = [text(item.children[0]) for item in action_items]
        try:
            vocab = Vocabulary(shared, tuple(local_names), locks, tuple(action_names))
        except LtsError as err:
            raise ParseError(f"{name}: {err}") from None

        actions = []
        for item, action in zip(action_items, action_names):
            pre = post = None
            for part in item.children[1:]:
                body = part.children[0]
                if part.data == "pre":
                    pre = _body_formula(body, text(body), vocab, [PRE_VAR])
                else:
                    post = _body_formula(body, text(body), vocab, [PRE_VAR, POST_VAR])
            actions.append(ActionDecl(action, pre, post))

        formulas = []
        seen = set()
        for item in formula_items:
            label, body = item.children
            label_text = text(label)
            if label_text in seen:
                raise _located(f"formula {label_text} declared twice in {name}", label)
            seen.add(label_text)
            formulas.append(NamedFormula(label_text, _body_formula(body, text(body), vocab, [])))
        return ProcessDecl(name, tuple(local_names), locks, shared, tuple(actions), tuple(formulas))


def process_spec(decl: ProcessDecl) -> ProcessSpec:
    """Process specification of a declaration: sync axioms, action constraints and formulas."""
    vocab = decl.vocab
    formulas = list(named_sync_axioms(vocab))
    preconditions = []
    for action in decl.actions:
        step = rel.ActAtom(action.name, PRE_VAR, POST_VAR)
        if action.pre is not None:
            formulas.append(NamedFormula(
                f"pre_{action.name}", rel.forall([PRE_VAR, POST_VAR], rel.Implies(step, action.pre)),
            ))
            preconditions.append((action.name, action.pre))
        if action.post is not None:
            formulas.append(NamedFormula(
                f"post_{action.name}", rel.forall([PRE_VAR, POST_VAR], rel.Implies(step, action.post)),
            ))
    formulas += decl.formulas
    return ProcessSpec(decl.name, vocab, tuple(formulas), tuple(preconditions))


def product_atoms(declarations: Sequence[ProcessDecl]) -> List[str]:
    """Atoms a global property may mention."""
    atoms: Dict[str, None] = {}
    for decl in declarations:
        for g in decl.shared:
            atoms[g] = None
        for lock in decl.locks:
            atoms[av_name(lock)] = None
    for i, decl in enumerate(declarations):
        for p in decl.locals:
            atoms[local_atom(p, i)] = None
        for lock in decl.locks:
            atoms[local_atom(own_name(lock), i)] = None
    return list(atoms)


def parse_spec_text(text: str) -> SpecFile:
    """
    Parse spec source.

    Raises:
        ParseError: on syntax errors, undeclared symbols or an empty system,
            with the line and column of the offending text
    """
    try:
        tree = _PARSER.parse(text)
    except UnexpectedInput as err:
        line = getattr(err, "line", None)
        column = getattr(err, "column", None)
        if line is not None and line < 0:
            line, column = None, None
        raise ParseError("Invalid specification syntax", line, column) from None

    builder = _Builder()
    builder.collect(tree)
    if not builder.templates:
        raise ParseError("Specification declares no processes")

    declarations: List[ProcessDecl] = []
    for template in builder.templates:
        for name, items, binding in builder.instances(template):
            declarations.append(builder.process(name, items, binding))
    names = [d.name for d in declarations]
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        raise ParseError(f"Duplicate process names: {duplicates}")

    try:
        processes = [process_spec(d) for d in declarations]
    except (FormulaError, SpecError) as err:
        raise ParseError(str(err)) from None

    prop_text = "true"
    prop = parse_ltl("true")
    if builder.property is not None:
        token = builder.property
        prop_text = str(token).strip()
        try:
            prop = parse_ltl(prop_text, product_atoms(declarations))
        except ParseError as err:
            raise ParseError(err.message, token.line, token.column) from None
    try:
        system = SystemSpec(
            builder.name, tuple(processes), prop, prop_text, tuple(builder.locks), tuple(builder.shared),
        )
    except SpecError as err:
        raise ParseError(str(err)) from None
    logger.debug("Parsed %s: %d processes", builder.name, len(processes))
    return SpecFile(builder.name, builder.bound, system, tuple(declarations))


def parse_spec(path: str) -> SpecFile:
    """Parse a spec file."""
    with open(path, "r", encoding="utf-8") as handle:
        return parse_spec_text(handle.read())


def format_spec(spec: SpecFile) -> str:
    """Spec source that parses back to an equal :class:`SpecFile`."""
    lines = [f"system {spec.name}"]
    if spec.bound is not None:
        lines.append(f"bound {spec.bound}")
    if spec.system.locks:
        lines.append(f"locks {', '.join(spec.system.locks)}")
    if spec.system.shared:
        lines.append(f"shared {', '.join(spec.system.shared)}")
    for decl in spec.declarations:
        lines.append("")
        lines.append(f"process {decl.name}")
        if decl.locals:
            lines.append(f"  locals {', '.join(decl.locals)}")
        used = list(decl.locks) + list(decl.shared)
        if used:
            lines.append(f"  uses {', '.join(used)}")
        for action in decl.actions:
            lines.append(f"  action {action.name}")
            if action.pre is not None:
                lines.append(f"    pre {rel.to_text(action.pre)};")
            if action.post is not None:
                lines.append(f"    post {rel.to_text(action.post)};")
        for named in decl.formulas:
            lines.append(f"  formula {named.name}: {rel.to_text(named.formula)};")
        lines.append("end")
    lines.append("")
    lines.append(f"property {spec.system.prop_text};")
    return "\n".join(lines) + "\n"
