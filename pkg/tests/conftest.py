"""
Shared fixtures for the Synthlock tests.
"""

import os
import random
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from src.lts.core import Lts, Vocabulary, av_name, ch_name, own_name  # noqa: E402

# Mutex process with a try section: S5 is initial, ch_m toggles av_m while the lock is not held.
MUTEX_LABELS = {
    0: ["cs", "own_m"],
    1: ["try", "own_m"],
    2: ["ncs"],
    3: ["try", "av_m"],
    4: ["try"],
    5: ["ncs", "av_m"],
}
MUTEX_TRANSITIONS = [
    (5, "enterTry", 3),
    (2, "enterTry", 4),
    (3, "getLock", 1),
    (1, "enterCS", 0),
    (0, "enterNCS", 5),
    (5, "ch_m", 2),
    (2, "ch_m", 5),
    (3, "ch_m", 4),
    (4, "ch_m", 3),
]


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: end-to-end synthesis runs")


@pytest.fixture
def mutex_vocab():
    return Vocabulary(locals=("ncs", "try", "cs"), locks=("m",), actions=("enterTry", "getLock", "enterCS", "enterNCS"))


@pytest.fixture
def mutex_lts(mutex_vocab):
    return Lts.for_vocabulary(mutex_vocab, 6, MUTEX_LABELS, MUTEX_TRANSITIONS, [5])


def random_lts(seed, vocab, k=4, density=0.3):
    """An arbitrary (not necessarily synchronized) LTS over ``vocab``."""
    rng = random.Random(seed)
    labeling = {s: [p for p in vocab.props if rng.random() < 0.5] for s in range(k)}
    transitions = [
        (s, a, t)
        for a in vocab.all_actions
        for s in range(k)
        for t in range(k)
        if rng.random() < density
    ]
    initials = [s for s in range(k) if rng.random() < 0.4] or [0]
    return Lts.for_vocabulary(vocab, k, labeling, transitions, initials)


def synchronized_lts(seed, vocab, k=4):
    """
    A random LTS that satisfies every lock synchronization condition.

    States come in pairs differing only in ``av_<lock>`` for a single lock;
    the environment action of the lock flips between them.
    """
    assert len(vocab.locks) == 1 and not vocab.shared
    lock = vocab.locks[0]
    av, own, ch = av_name(lock), own_name(lock), ch_name(lock)
    rng = random.Random(seed)
    pairs = max(1, k // 2)
    labeling = {}
    transitions = []
    state = 0
    for _ in range(pairs):
        locals_ = [p for p in vocab.locals if rng.random() < 0.5]
        if rng.random() < 0.3:
            labeling[state] = locals_ + [own]
            state += 1
        else:
            labeling[state] = locals_ + [av]
            labeling[state + 1] = list(locals_)
            transitions += [(state, ch, state + 1), (state + 1, ch, state)]
            state += 2
    for a in vocab.actions:
        for s in range(state):
            for t in range(state):
                if rng.random() < 0.2:
                    transitions.append((s, a, t))
    return Lts.for_vocabulary(vocab, state, labeling, transitions, [0])
