"""
Tests for the LTS core: vocabularies, successors, paths and the
synchronization conditions.
"""

import json

import pytest

from src.errors import LtsError
from src.lts.core import (
    ENV,
    INTERNAL,
    FinitePath,
    Lts,
    Vocabulary,
    check_sync_conditions,
    destutter,
    dump_lts,
    is_path,
    load_lts,
    lts_from_dict,
    lts_to_dict,
    reachable,
    successors,
)
from tests.conftest import MUTEX_LABELS, MUTEX_TRANSITIONS, random_lts, synchronized_lts


class TestVocabulary:
    def test_derived_symbols(self, mutex_vocab):
        assert mutex_vocab.shared_props == ("av_m",)
        assert mutex_vocab.local_props == ("ncs", "try", "cs", "own_m")
        assert mutex_vocab.env_actions == ("ch_m",)
        assert mutex_vocab.all_actions == ("enterTry", "getLock", "enterCS", "enterNCS", "ch_m")

    def test_env_action_for_lock_availability(self, mutex_vocab):
        assert mutex_vocab.env_action_for("av_m") == "ch_m"

    def test_env_action_for_shared_variable(self):
        vocab = Vocabulary(shared=("flag",), locals=("a",), actions=("go",))
        assert vocab.env_action_for("flag") == "ch_flag"
        with pytest.raises(LtsError):
            vocab.env_action_for("a")

    def test_kind(self, mutex_vocab):
        assert mutex_vocab.kind("ch_m") == ENV
        assert mutex_vocab.kind("getLock") == INTERNAL
        with pytest.raises(LtsError):
            mutex_vocab.kind("missing")

    @pytest.mark.parametrize("name", ["av_x", "own_x", "ch_x", "init", "reach", "true"])
    def test_reserved_names_rejected(self, name):
        with pytest.raises(LtsError):
            Vocabulary(locals=(name,))

    def test_overlapping_names_rejected(self):
        with pytest.raises(LtsError):
            Vocabulary(locals=("m",), locks=("m",))

    def test_dict_form(self, mutex_vocab):
        assert Vocabulary.from_dict(mutex_vocab.to_dict()) == mutex_vocab


class TestLts:
    def test_successors_are_ordered(self, mutex_lts):
        assert successors(mutex_lts, 3) == [("ch_m", 4), ("getLock", 1)]
        assert successors(mutex_lts, 0) == [("enterNCS", 5)]

    def test_successors_unknown_state(self, mutex_lts):
        with pytest.raises(LtsError):
            successors(mutex_lts, 6)
        with pytest.raises(LtsError):
            successors(mutex_lts, -1)

    def test_labels(self, mutex_lts):
        assert mutex_lts.label(5) == frozenset({"ncs", "av_m"})
        assert mutex_lts.holds("own_m", 0)
        assert not mutex_lts.holds("av_m", 4)

    def test_kinds_follow_vocabulary(self, mutex_lts):
        assert mutex_lts.kind("ch_m") == ENV
        assert mutex_lts.kind("enterCS") == INTERNAL

    def test_undeclared_label_rejected(self, mutex_vocab):
        with pytest.raises(LtsError):
            Lts.for_vocabulary(mutex_vocab, 1, {0: ["bogus"]}, [], [0])

    def test_state_names_default(self, mutex_lts):
        assert mutex_lts.state_name(2) == "S2"

    def test_deadlocks(self, mutex_vocab):
        lts = Lts.for_vocabulary(mutex_vocab, 2, {0: ["ncs", "own_m"], 1: ["cs", "own_m"]},
                                 [(0, "enterCS", 1)], [0])
        assert lts.deadlocks() == [1]

    def test_reachable(self, mutex_lts):
        assert reachable(mutex_lts) == frozenset(range(6))
        isolated = Lts.build(3, {}, [(0, "a", 1)], [0])
        assert reachable(isolated) == frozenset({0, 1})


class TestPaths:
    def test_path_shape_is_checked(self):
        with pytest.raises(LtsError):
            FinitePath((0, 1), ())
        with pytest.raises(LtsError):
            FinitePath(())

    def test_is_path(self, mutex_lts):
        assert is_path(mutex_lts, FinitePath((5, 3, 1, 0), ("enterTry", "getLock", "enterCS")))
        assert not is_path(mutex_lts, FinitePath((5, 1), ("getLock",)))
        assert is_path(mutex_lts, FinitePath((2,)))

    def test_prefix_and_steps(self):
        path = FinitePath((0, 1, 2), ("a", "b"))
        assert path.prefix(1) == FinitePath((0, 1), ("a",))
        assert path.steps() == [(0, "a", 1), (1, "b", 2)]
        assert not path.is_stutter_only()
        assert FinitePath((3, 3), ("a",)).is_stutter_only()

    def test_destutter(self):
        assert destutter(["a", "a", "b", "b", "a"]) == ["a", "b", "a"]
        assert destutter([]) == []


class TestSyncConditions:
    def test_mutex_process_is_synchronized(self, mutex_lts, mutex_vocab):
        assert check_sync_conditions(mutex_lts, mutex_vocab) == []

    def test_missing_environment_step(self, mutex_vocab):
        transitions = [t for t in MUTEX_TRANSITIONS if t != (5, "ch_m", 2)]
        lts = Lts.for_vocabulary(mutex_vocab, 6, MUTEX_LABELS, transitions, [5])
        violations = check_sync_conditions(lts, mutex_vocab)
        assert [(v.condition, v.states) for v in violations] == [("b", (5,))]

    def test_owned_and_available(self, mutex_vocab):
        labels = dict(MUTEX_LABELS)
        labels[0] = ["cs", "own_m", "av_m"]
        lts = Lts.for_vocabulary(mutex_vocab, 6, labels, MUTEX_TRANSITIONS, [5])
        conditions = {v.condition for v in check_sync_conditions(lts, mutex_vocab)}
        assert "a" in conditions

    def test_environment_step_must_flip_and_frame(self, mutex_vocab):
        labels = dict(MUTEX_LABELS)
        labels[2] = ["ncs", "av_m"]
        labels[4] = ["cs"]
        lts = Lts.for_vocabulary(mutex_vocab, 6, labels, MUTEX_TRANSITIONS, [5])
        conditions = {v.condition for v in check_sync_conditions(lts, mutex_vocab)}
        assert {"c", "d", "f"} <= conditions

    def test_shared_variable_choice(self):
        vocab = Vocabulary(shared=("flag",), locals=("a",), actions=("go",))
        both = Lts.for_vocabulary(
            vocab, 2, {0: ["a"], 1: ["a", "flag"]},
            [(0, "ch_flag", 0), (0, "ch_flag", 1), (1, "ch_flag", 0), (1, "ch_flag", 1)], [0],
        )
        assert check_sync_conditions(both, vocab) == []
        one_way = Lts.for_vocabulary(vocab, 2, {0: ["a"], 1: ["a", "flag"]},
                                     [(0, "ch_flag", 1), (1, "ch_flag", 0)], [0])
        assert {v.condition for v in check_sync_conditions(one_way, vocab)} == {"e"}

    @pytest.mark.parametrize("seed", range(5))
    def test_generated_synchronized_instances(self, seed, mutex_vocab):
        lts = synchronized_lts(seed, mutex_vocab, k=6)
        assert check_sync_conditions(lts, mutex_vocab) == []

    def test_lts_without_derived_props(self, mutex_vocab):
        lts = Lts.build(1, {0: ["ncs"]}, [], [0])
        with pytest.raises(LtsError):
            check_sync_conditions(lts, mutex_vocab)


class TestSerialization:
    def test_dict_form_is_stable(self, mutex_lts):
        data = lts_to_dict(mutex_lts)
        assert data["initials"] == [5]
        assert data["labeling"]["0"] == ["cs", "own_m"]
        assert {"name": "ch_m", "kind": ENV} in data["actions"]
        assert lts_from_dict(data) == mutex_lts

    def test_file_form(self, mutex_lts, tmp_path):
        path = tmp_path / "process.lts.json"
        dump_lts(mutex_lts, str(path))
        assert json.loads(path.read_text())["states"][0] == "S0"
        assert load_lts(str(path)) == mutex_lts

    def test_random_lts_dict_form(self, mutex_vocab):
        lts = random_lts(7, mutex_vocab)
        assert lts_from_dict(json.loads(json.dumps(lts_to_dict(lts)))) == lts

    def test_malformed_dict(self):
        with pytest.raises(LtsError):
            lts_from_dict({"states": []})
