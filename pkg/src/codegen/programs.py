"""
Guarded-command programs for the Synthlock project.

This module provides the translation of synthesized process LTSs into a
guarded-command program, its rendering (text and JSON) and an explicit
simulation of the program as an LTS.

Each process gets a state variable over the environment classes of its
LTS (states connected by environment transitions). A lock becomes a
shared variable holding the owner's index, or None (printed ``⊥``) when
the lock is free.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from constants import SIMULATION_STATE_CAP
from src.checking.composition import compose, local_atom
from src.errors import CodegenError, CompositionError, SimulationError
from src.lts.core import Lts, Vocabulary, av_name, check_sync_conditions, own_name

logger = logging.getLogger(__name__)

MINE = "mine"
FREE = "free"
OTHER = "other"
STUTTER = "stutter"


@dataclass(frozen=True)
class Command:
    """
    ``[action] guard -> assignments`` of one process.

    ``lock_tests`` maps each observed lock to ``mine``, ``free`` or
    ``other`` (held by another process); ``lock_writes`` maps a lock to
    ``mine`` (acquire) or ``free`` (release).
    """

    process: int
    action: str
    source: str
    target: str
    guard: Tuple[Tuple[str, bool], ...]
    lock_tests: Tuple[Tuple[str, str], ...]
    writes: Tuple[Tuple[str, bool], ...]
    lock_writes: Tuple[Tuple[str, str], ...]


@dataclass(frozen=True)
class ProcessProgram:
    index: int
    name: str
    locals: Tuple[str, ...]
    shared: Tuple[str, ...]
    locks: Tuple[str, ...]
    classes: Tuple[str, ...]
    commands: Tuple[Command, ...]


@dataclass(frozen=True)
class ProgramState:
    """Valuation of every program variable."""

    shared: Tuple[bool, ...]
    locks: Tuple[Optional[int], ...]
    processes: Tuple[Tuple[str, Tuple[bool, ...]], ...]


@dataclass(frozen=True)
class GuardedProgram:
    name: str
    shared: Tuple[str, ...]
    locks: Tuple[str, ...]
    processes: Tuple[ProcessProgram, ...]
    initial: Tuple[ProgramState, ...]


def env_classes(lts: Lts) -> Dict[int, str]:
    """
    Environment class of every state.

    Classes are the connected components of the undirected graph of
    environment transitions, named ``S<rep>`` after their smallest initial
    state, or their smallest state when they hold no initial state.
    """
    graph = nx.Graph()
    graph.add_nodes_from(lts.states)
    graph.add_edges_from((s, t) for (s, a, t) in lts.transitions if a in lts.env_actions)
    partition: Dict[int, str] = {}
    for component in nx.connected_components(graph):
        initial = sorted(s for s in component if s in lts.initials)
        rep = initial[0] if initial else min(component)
        for s in component:
            partition[s] = f"S{rep}"
    return partition


def _lock_status(lts: Lts, lock: str, s: int) -> str:
    if lts.holds(own_name(lock), s):
        return MINE
    if lts.holds(av_name(lock), s):
        return FREE
    return OTHER


def _process_program(index: int, name: str, lts: Lts, vocab: Vocabulary) -> ProcessProgram:
    partition = env_classes(lts)
    variables = list(vocab.shared) + list(vocab.locals)
    commands = []
    for (s, a, t) in sorted(lts.transitions):
        if a in lts.env_actions or partition[s] == partition[t]:
            continue
        lock_writes = []
        for lock in vocab.locks:
            after = _lock_status(lts, lock, t)
            if after != OTHER:
                lock_writes.append((lock, after))
        commands.append(Command(
            process=index,
            action=a,
            source=partition[s],
            target=partition[t],
            guard=tuple((x, lts.holds(x, s)) for x in variables),
            lock_tests=tuple((lock, _lock_status(lts, lock, s)) for lock in vocab.locks),
            writes=tuple((x, lts.holds(x, t)) for x in variables),
            lock_writes=tuple(lock_writes),
        ))
    classes = tuple(sorted(set(partition.values()), key=lambda c: int(c[1:])))
    return ProcessProgram(index, name, vocab.locals, vocab.shared, vocab.locks, classes, tuple(dict.fromkeys(commands)))


def check_lock_discipline(program: GuardedProgram) -> List[str]:
    """
    Commands that misuse a lock.

    A command may acquire a free lock, release its own lock, or leave a
    lock alone; it may not touch a lock held by another process, nor leave
    the lock in a state where nobody holds it without being free.
    """
    problems = []
    for proc in program.processes:
        for cmd in proc.commands:
            tests = dict(cmd.lock_tests)
            writes = dict(cmd.lock_writes)
            for lock in proc.locks:
                before, after = tests.get(lock), writes.get(lock)
                if before == OTHER and after is not None:
                    problems.append(f"[{cmd.action}] of {proc.name} writes {lock} held by another process")
                elif before in (MINE, FREE) and after is None:
                    problems.append(f"[{cmd.action}] of {proc.name} hands {lock} to another process")
    return problems


def _initial_states(components: Sequence[Lts], vocabs: Sequence[Vocabulary], shared: Sequence[str],
                    locks: Sequence[str], partitions: List[Dict[int, str]]) -> Tuple[ProgramState, ...]:
    try:
        product = compose(components, vocabs)
    except CompositionError as err:
        raise CodegenError(str(err)) from err
    states = []
    for tup in product.initials:
        shared_values = tuple(product.holds(g, tup) for g in shared)
        lock_values: List[Optional[int]] = []
        for lock in locks:
            owners = [i for i, v in enumerate(vocabs)
                      if lock in v.locks and components[i].holds(own_name(lock), tup[i])]
            if len(owners) > 1:
                raise CodegenError(f"Lock {lock} initially owned by processes {owners}")
            if owners:
                lock_values.append(owners[0])
            elif product.holds(av_name(lock), tup):
                lock_values.append(None)
            else:
                raise CodegenError(f"Lock {lock} is initially neither free nor owned")
        processes = tuple(
            (partitions[i][tup[i]], tuple(components[i].holds(p, tup[i]) for p in vocabs[i].locals))
            for i in range(len(components))
        )
        states.append(ProgramState(shared_values, tuple(lock_values), processes))
    return tuple(dict.fromkeys(states))


def emit(components: Sequence[Lts], vocabs, name: str = "Program",
         process_names: Optional[Sequence[str]] = None) -> GuardedProgram:
    """
    Guarded-command program of the product of ``components``.

    Args:
        components: process LTSs, index-ordered
        vocabs: one vocabulary per process, or one shared by all
        name: program name
        process_names: display names (default ``P<i>``)

    Raises:
        CodegenError: when a component violates the synchronization
            conditions or a command misuses a lock
    """
    if isinstance(vocabs, Vocabulary):
        vocabs = [vocabs] * len(components)
    vocabs = list(vocabs)
    process_names = list(process_names or [f"P{i}" for i in range(len(components))])
    for i, (lts, vocab) in enumerate(zip(components, vocabs)):
        violations = check_sync_conditions(lts, vocab)
        if violations:
            raise CodegenError(f"{process_names[i]} violates synchronization: {violations[0]}")
    shared = tuple(dict.fromkeys(g for v in vocabs for g in v.shared))
    locks = tuple(dict.fromkeys(lock for v in vocabs for lock in v.locks))
    processes = tuple(
        _process_program(i, process_names[i], lts, vocab)
        for i, (lts, vocab) in enumerate(zip(components, vocabs))
    )
    partitions = [env_classes(lts) for lts in components]
    initial = _initial_states(components, vocabs, shared, locks, partitions)
    program = GuardedProgram(name, shared, locks, processes, initial)
    problems = check_lock_discipline(program)
    if problems:
        raise CodegenError("; ".join(problems))
    logger.debug("Emitted %s with %d commands", name, sum(len(p.commands) for p in processes))
    return program


def _enabled(program: GuardedProgram, state: ProgramState, proc: ProcessProgram, cmd: Command) -> bool:
    st, local_values = state.processes[proc.index]
    if st != cmd.source:
        return False
    values = dict(zip(program.shared, state.shared))
    values.update(zip(proc.locals, local_values))
    if any(values[x] != v for x, v in cmd.guard):
        return False
    owners = dict(zip(program.locks, state.locks))
    for lock, test in cmd.lock_tests:
        owner = owners[lock]
        if test == MINE and owner != proc.index:
            return False
        if test == FREE and owner is not None:
            return False
        if test == OTHER and (owner is None or owner == proc.index):
            return False
    return True


def _execute(program: GuardedProgram, state: ProgramState, proc: ProcessProgram, cmd: Command) -> ProgramState:
    writes = dict(cmd.writes)
    shared = tuple(writes.get(g, v) for g, v in zip(program.shared, state.shared))
    lock_writes = dict(cmd.lock_writes)
    locks = []
    for lock, owner in zip(program.locks, state.locks):
        if lock in lock_writes:
            owner = proc.index if lock_writes[lock] == MINE else None
        locks.append(owner)
    processes = list(state.processes)
    _, local_values = processes[proc.index]
    processes[proc.index] = (cmd.target, tuple(writes.get(p, v) for p, v in zip(proc.locals, local_values)))
    return ProgramState(shared, tuple(locks), tuple(processes))


def program_props(program: GuardedProgram) -> Tuple[str, ...]:
    props = list(program.shared) + [av_name(lock) for lock in program.locks]
    for proc in program.processes:
        props += [local_atom(p, proc.index) for p in proc.locals]
        props += [local_atom(own_name(lock), proc.index) for lock in proc.locks]
    return tuple(props)


def _label(program: GuardedProgram, state: ProgramState) -> List[str]:
    label = [g for g, v in zip(program.shared, state.shared) if v]
    label += [av_name(lock) for lock, owner in zip(program.locks, state.locks) if owner is None]
    owners = dict(zip(program.locks, state.locks))
    for proc in program.processes:
        _, local_values = state.processes[proc.index]
        label += [local_atom(p, proc.index) for p, v in zip(proc.locals, local_values) if v]
        label += [local_atom(own_name(lock), proc.index) for lock in proc.locks if owners[lock] == proc.index]
    return label


def simulate(program: GuardedProgram, cap: int = SIMULATION_STATE_CAP) -> Lts:
    """
    Explicit LTS of the program's interleaving semantics.

    A state where no command is enabled gets a ``stutter`` self-loop.
    Actions are named ``<action>@<process>``.

    Raises:
        SimulationError: when more than ``cap`` states are reachable
    """
    initial = list(program.initial) or [ProgramState((), (), ())]
    index: Dict[ProgramState, int] = {}
    order: List[ProgramState] = []
    for state in initial:
        if state not in index:
            index[state] = len(order)
            order.append(state)
    queue = deque(order)
    transitions = []
    while queue:
        state = queue.popleft()
        moved = False
        for proc in program.processes:
            for cmd in proc.commands:
                if not _enabled(program, state, proc, cmd):
                    continue
                moved = True
                target = _execute(program, state, proc, cmd)
                if target not in index:
                    if len(order) >= cap:
                        raise SimulationError(f"Program {program.name} exceeds {cap} states")
                    index[target] = len(order)
                    order.append(target)
                    queue.append(target)
                transitions.append((index[state], f"{cmd.action}@{proc.index}", index[target]))
        if not moved:
            transitions.append((index[state], STUTTER, index[state]))
    labeling = {index[s]: _label(program, s) for s in order}
    return Lts.build(
        len(order),
        labeling,
        transitions,
        [index[s] for s in initial],
        props=program_props(program),
    )


def _var(name: str, proc: Optional[ProcessProgram]) -> str:
    return f"{name}_{proc.index}" if proc is not None and name in proc.locals else name


def _guard_text(proc: ProcessProgram, cmd: Command) -> str:
    parts = [f"st_{proc.index}={cmd.source}"]
    parts += [f"{_var(x, proc)}={int(v)}" for x, v in cmd.guard]
    for lock, test in cmd.lock_tests:
        if test == MINE:
            parts.append(f"{lock}={proc.index}")
        elif test == FREE:
            parts.append(f"{lock}=⊥")
        else:
            parts.append(f"{lock}≠{proc.index} ∧ {lock}≠⊥")
    return " ∧ ".join(parts)


def _assign_text(proc: ProcessProgram, cmd: Command) -> str:
    parts = [f"st_{proc.index}:={cmd.target}"]
    parts += [f"{_var(x, proc)}:={int(v)}" for x, v in cmd.writes]
    for lock, write in cmd.lock_writes:
        parts.append(f"{lock}:={proc.index}" if write == MINE else f"{lock}:=⊥")
    return ", ".join(parts)


def _literal(name: str, value: bool) -> str:
    return name if value else f"¬{name}"


def render(program: GuardedProgram) -> str:
    """Program text in guarded-command notation."""
    lines = [f"Program {program.name}"]
    if program.locks:
        lines.append(f" var {', '.join(program.locks)}: Lock;")
    if program.shared:
        lines.append(f" var {', '.join(program.shared)}: bit;")
    for proc in program.processes:
        lines.append(f"  Process {proc.name}")
        if proc.locals:
            lines.append(f"   var {', '.join(_var(p, proc) for p in proc.locals)}: bit")
        lines.append(f"   var st_{proc.index}: {{{', '.join(proc.classes)}}}")
        starts = []
        for state in program.initial:
            st, values = state.processes[proc.index]
            text = " ∧ ".join([f"st_{proc.index}={st}"] + [_literal(_var(p, proc), v) for p, v in zip(proc.locals, values)])
            if text not in starts:
                starts.append(text)
        lines.append(f"   initial: {' ∨ '.join(f'({s})' if len(starts) > 1 else s for s in starts)}")
        lines.append("   begin")
        for cmd in proc.commands:
            lines.append(f"    [{cmd.action}] {_guard_text(proc, cmd)} → {_assign_text(proc, cmd)}")
        lines.append("   end")
    globals_start = []
    for state in program.initial:
        parts = [_literal(g, v) for g, v in zip(program.shared, state.shared)]
        parts += [f"{lock}={'⊥' if owner is None else owner}" for lock, owner in zip(program.locks, state.locks)]
        text = " ∧ ".join(parts)
        if text and text not in globals_start:
            globals_start.append(text)
    if globals_start:
        lines.append(f" initial: {' ∨ '.join(globals_start)}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def to_json(program: GuardedProgram) -> Dict[str, Any]:
    """JSON-ready form; :func:`from_json` inverts it."""
    return {
        "name": program.name,
        "shared": list(program.shared),
        "locks": list(program.locks),
        "processes": [
            {
                "index": p.index,
                "name": p.name,
                "locals": list(p.locals),
                "shared": list(p.shared),
                "locks": list(p.locks),
                "classes": list(p.classes),
                "commands": [
                    {
                        "action": c.action,
                        "source": c.source,
                        "target": c.target,
                        "guard": [[x, v] for x, v in c.guard],
                        "lock_tests": [[lock, t] for lock, t in c.lock_tests],
                        "writes": [[x, v] for x, v in c.writes],
                        "lock_writes": [[lock, w] for lock, w in c.lock_writes],
                    }
                    for c in p.commands
                ],
            }
            for p in program.processes
        ],
        "initial": [
            {
                "shared": list(s.shared),
                "locks": list(s.locks),
                "processes": [[st, list(values)] for st, values in s.processes],
            }
            for s in program.initial
        ],
    }


def from_json(data: Mapping[str, Any]) -> GuardedProgram:
    try:
        processes = []
        for p in data["processes"]:
            commands = tuple(
                Command(
                    process=p["index"],
                    action=c["action"],
                    source=c["source"],
                    target=c["target"],
                    guard=tuple((x, bool(v)) for x, v in c["guard"]),
                    lock_tests=tuple((lock, t) for lock, t in c["lock_tests"]),
                    writes=tuple((x, bool(v)) for x, v in c["writes"]),
                    lock_writes=tuple((lock, w) for lock, w in c["lock_writes"]),
                )
                for c in p["commands"]
            )
            processes.append(ProcessProgram(
                p["index"], p["name"], tuple(p["locals"]), tuple(p["shared"]), tuple(p["locks"]),
                tuple(p["classes"]), commands,
            ))
        initial = tuple(
            ProgramState(
                tuple(bool(v) for v in s["shared"]),
                tuple(s["locks"]),
                tuple((st, tuple(bool(v) for v in values)) for st, values in s["processes"]),
            )
            for s in data["initial"]
        )
        return GuardedProgram(data["name"], tuple(data["shared"]), tuple(data["locks"]), tuple(processes), initial)
    except (KeyError, TypeError, ValueError) as err:
        raise CodegenError(f"Malformed program JSON: {err}") from err
