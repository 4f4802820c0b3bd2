"""
Tests for the spec file language and the bundled benchmarks.
"""

import pytest

from src.bench.dsl import format_spec, parse_spec, parse_spec_text, product_atoms
from src.checking import ltl
from src.data.benchmarks import default_suite, mutex, phil, rw, write_benchmarks
from src.errors import ParseError
from src.logic.parser import parse_formula

TOY = """\
system Toy
bound 3
locks m

# a single process with one action
process P
  locals a
  action go
    pre a(s);
    post not a(s');
  formula start: forall s . init(s) implies a(s);
end

property G (a@0 | !a@0);
"""


class TestParse:
    def test_toy(self):
        spec = parse_spec_text(TOY)
        assert spec.name == "Toy"
        assert spec.bound == 3
        assert spec.system.locks == ("m",)
        (process,) = spec.processes
        assert process.name == "P"
        assert process.vocab.locals == ("a",)
        assert process.vocab.locks == ("m",)
        assert dict(process.preconditions) == {"go": parse_formula("a(s)")}
        names = [named.name for named in process.formulas]
        assert names[:5] == ["sync_a_m", "sync_b_m", "sync_c_m", "sync_d_m", "sync_f_av_m"]
        assert names[5:] == ["pre_go", "post_go", "start"]
        assert spec.system.prop_text == "G (a@0 | !a@0)"

    def test_missing_property_defaults_to_true(self):
        spec = parse_spec_text(TOY.split("property")[0])
        assert spec.system.prop == ltl.TRUE
        assert spec.system.prop_text == "true"

    def test_mutex_template(self):
        spec = parse_spec_text(mutex(3))
        assert [p.name for p in spec.processes] == ["P0", "P1", "P2"]
        assert spec.bound == 4
        assert "cs@2" in product_atoms(spec.declarations)

    def test_index_arithmetic_wraps(self):
        spec = parse_spec_text(phil(3))
        assert [p.name for p in spec.processes] == ["Phil0", "Phil1", "Phil2"]
        assert spec.processes[0].vocab.locks == ("fork0", "fork1")
        assert spec.processes[2].vocab.locks == ("fork2", "fork0")

    def test_both_circular_waits_sit_under_always(self):
        prop = parse_spec_text(phil(3)).system.prop
        body = prop.operand.right.operand
        assert isinstance(body, ltl.And)
        assert prop == ltl.always(body)

    def test_readers_and_writers(self):
        spec = parse_spec_text(rw(1, 2))
        assert [p.name for p in spec.processes] == ["R0", "W0", "W1"]
        atoms = product_atoms(spec.declarations)
        assert atoms[0] == "av_db"
        assert "writing@2" in atoms

    def test_parse_file(self, tmp_path):
        path = tmp_path / "toy.dspec"
        path.write_text(TOY, encoding="utf-8")
        assert parse_spec(str(path)) == parse_spec_text(TOY)


class TestFormat:
    @pytest.mark.parametrize("source", [TOY, mutex(2), rw(1, 1)])
    def test_formatted_source_parses_back(self, source):
        spec = parse_spec_text(source)
        assert parse_spec_text(format_spec(spec)) == spec


class TestErrors:
    def test_no_processes(self):
        with pytest.raises(ParseError, match="no processes"):
            parse_spec_text("system Empty\nlocks m\nproperty true;\n")

    def test_duplicate_processes(self):
        body = "process P\n  locals a\nend\n"
        with pytest.raises(ParseError, match="Duplicate"):
            parse_spec_text("system Twice\n" + body + body)

    def test_unbound_variable(self):
        source = TOY.replace("forall s . init(s) implies a(s)", "init(t) implies a(t)")
        with pytest.raises(ParseError):
            parse_spec_text(source)

    def test_undeclared_symbol(self):
        with pytest.raises(ParseError):
            parse_spec_text(TOY.replace("pre a(s);", "pre b(s);"))

    def test_unknown_property_atom(self):
        with pytest.raises(ParseError) as err:
            parse_spec_text(TOY.replace("a@0 | !a@0", "a@1"))
        assert err.value.line == 14

    def test_formula_syntax_error_is_located(self):
        with pytest.raises(ParseError) as err:
            parse_spec_text(TOY.replace("post not a(s');", "post not and a(s');"))
        assert err.value.line == 10

    def test_undeclared_lock_in_uses(self):
        source = TOY.replace("  locals a\n", "  locals a\n  uses n\n")
        with pytest.raises(ParseError):
            parse_spec_text(source)

    def test_duplicate_formula_names(self):
        source = TOY.replace("end\n", "  formula start: forall s . a(s);\nend\n")
        with pytest.raises(ParseError, match="twice"):
            parse_spec_text(source)


class TestBenchmarks:
    def test_default_suite_parses(self):
        for bench in default_suite():
            spec = parse_spec_text(bench.source)
            assert spec.bound == bench.bound

    def test_mutex_needs_two_processes(self):
        with pytest.raises(ValueError):
            mutex(1)

    def test_write_benchmarks(self, tmp_path):
        paths = write_benchmarks(str(tmp_path), default_suite()[:2])
        assert [p.rsplit("/", 1)[-1] for p in paths] == ["mutex2.dspec", "mutex3.dspec"]
        assert parse_spec(paths[0]).name == "mut2"
