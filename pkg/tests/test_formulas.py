"""
Tests for relational formulas: construction, evaluation, printing and parsing.
"""

import pytest

from src.errors import FormulaError, ParseError
from src.logic import formulas as rel
from src.logic.parser import parse_formula


class TestConstruction:
    def test_conj_flattens_and_drops_true(self):
        p, q, r = (rel.PropAtom(x, "s") for x in "pqr")
        assert rel.conj(p, rel.conj(q, r), rel.TRUE) == rel.And((p, q, r))
        assert rel.conj() == rel.TRUE
        assert rel.conj(p) == p

    def test_disj_flattens_and_drops_false(self):
        p, q = rel.PropAtom("p", "s"), rel.PropAtom("q", "s")
        assert rel.disj(rel.FALSE, p, rel.disj(q)) == rel.Or((p, q))
        assert rel.disj() == rel.FALSE

    def test_quantifier_helpers_nest_left_to_right(self):
        body = rel.ActAtom("a", "s", "t")
        assert rel.forall(["s", "t"], body) == rel.Forall("s", rel.Forall("t", body))
        assert rel.exists([], body) == body

    def test_free_vars(self):
        f = parse_formula("forall s . a(s, t) and (exists u . reach(u, v))")
        assert rel.free_vars(f) == frozenset({"t", "v"})

    def test_symbols_and_check(self, mutex_vocab):
        f = parse_formula("forall s . try(s) implies (exists t . getLock(s, t) or star(ch_m)(s, t))")
        props, actions = rel.symbols(f)
        assert props == {"try"}
        assert actions == {"getLock", "ch_m"}
        rel.check_symbols(f, mutex_vocab)
        with pytest.raises(FormulaError):
            rel.check_symbols(parse_formula("forall s . lost(s)"), mutex_vocab)
        with pytest.raises(FormulaError):
            rel.check_symbols(parse_formula("forall s, t . jump(s, t)"), mutex_vocab)

    def test_depth(self):
        assert rel.depth(parse_formula("p(s)")) == 0
        assert rel.depth(parse_formula("not (p(s) and q(s))")) == 2


class TestEvaluation:
    def test_initial_state(self, mutex_lts):
        assert rel.eval_formula(parse_formula("forall s . init(s) implies ncs(s) and av_m(s)"), mutex_lts)
        assert not rel.eval_formula(parse_formula("forall s . init(s) implies cs(s)"), mutex_lts)

    def test_mutual_exclusion_invariant(self, mutex_lts):
        assert rel.eval_formula(parse_formula("forall s . cs(s) implies own_m(s)"), mutex_lts)

    def test_transitions(self, mutex_lts):
        f = parse_formula("forall s, t . getLock(s, t) implies av_m(s) and own_m(t)")
        assert rel.eval_formula(f, mutex_lts)
        assert rel.eval_formula(parse_formula("getLock(x, y)"), mutex_lts, {"x": 3, "y": 1})
        assert not rel.eval_formula(parse_formula("getLock(x, y)"), mutex_lts, {"x": 4, "y": 1})

    def test_action_closure(self, mutex_lts):
        assert rel.eval_formula(parse_formula("star(ch_m)(x, y)"), mutex_lts, {"x": 5, "y": 2})
        assert rel.eval_formula(parse_formula("star(ch_m)(x, x)"), mutex_lts, {"x": 0})
        assert not rel.eval_formula(parse_formula("star(ch_m)(x, y)"), mutex_lts, {"x": 5, "y": 3})

    def test_reachability(self, mutex_lts):
        f = parse_formula("forall s . init(s) implies (exists t . reach(s, t) and cs(t))")
        assert rel.eval_formula(f, mutex_lts)

    def test_equality(self, mutex_lts):
        assert rel.eval_formula(parse_formula("forall s . s = s"), mutex_lts)
        assert rel.eval_formula(parse_formula("exists s, t . s != t"), mutex_lts)

    def test_unbound_variable(self, mutex_lts):
        with pytest.raises(FormulaError):
            rel.eval_formula(parse_formula("cs(x)"), mutex_lts)

    def test_eval_all(self, mutex_lts):
        formulas = [parse_formula("forall s . ncs(s) implies not cs(s)"), parse_formula("exists s . try(s)")]
        assert rel.eval_all(formulas, mutex_lts)
        assert not rel.eval_all(formulas + [rel.FALSE], mutex_lts)


class TestParser:
    def test_precedence(self):
        f = parse_formula("p(s) or q(s) and not r(s)")
        p, q, r = (rel.PropAtom(x, "s") for x in "pqr")
        assert f == rel.Or((p, rel.And((q, rel.Not(r)))))

    def test_implies_is_right_associative(self):
        p, q, r = (rel.PropAtom(x, "s") for x in "pqr")
        assert parse_formula("p(s) implies q(s) implies r(s)") == rel.Implies(p, rel.Implies(q, r))

    def test_iff_binds_loosest(self):
        p, q, r = (rel.PropAtom(x, "s") for x in "pqr")
        assert parse_formula("p(s) implies q(s) iff r(s)") == rel.Iff(rel.Implies(p, q), r)

    def test_quantifier_scope(self):
        f = parse_formula("forall s, t . a(s, t) implies p(t)")
        assert f == rel.Forall("s", rel.Forall("t", rel.Implies(rel.ActAtom("a", "s", "t"), rel.PropAtom("p", "t"))))

    def test_primed_variables(self):
        assert parse_formula("cs(s')") == rel.PropAtom("cs", "s'")

    def test_atoms(self):
        assert parse_formula("init(s)") == rel.InitAtom("s")
        assert parse_formula("reach(s, t)") == rel.ReachAtom("s", "t")
        assert parse_formula("star(a)(s, t)") == rel.StarAtom("a", "s", "t")
        assert parse_formula("s != t") == rel.Not(rel.Eq("s", "t"))
        assert parse_formula("true") == rel.TRUE

    @pytest.mark.parametrize("text", ["init(s, t)", "reach(s)"])
    def test_wrong_arity(self, text):
        with pytest.raises(FormulaError):
            parse_formula(text)

    def test_syntax_error_has_location(self):
        with pytest.raises(ParseError) as info:
            parse_formula("forall s .\n  p(s) and and q(s)")
        assert info.value.line == 2

    def test_vocabulary_check(self, mutex_vocab):
        parse_formula("forall s . cs(s) implies own_m(s)", mutex_vocab)
        with pytest.raises(FormulaError):
            parse_formula("forall s . crit(s)", mutex_vocab)

    @pytest.mark.parametrize("text", [
        "forall s . init(s) implies ncs(s) and not cs(s) and not own_m(s)",
        "forall s . (ncs(s) and not cs(s)) or (cs(s) and not ncs(s))",
        "forall s . av_m(s) implies (exists t . ch_m(s, t) and not av_m(t))",
        "forall s, t . (a(s, t) implies p(s)) implies not (s = t)",
        "p(s) iff (q(s) iff r(s))",
        "not (forall s . star(a)(s, s))",
    ])
    def test_printed_text_parses_back(self, text):
        f = parse_formula(text)
        assert parse_formula(rel.to_text(f)) == f
