"""
Bundled benchmark specifications for the Synthlock project.

Each generator returns the source of a spec file for a given number of
processes; ``write_benchmarks`` saves a suite under ``data/specs``.
"""

import os
from dataclasses import dataclass
from typing import List, Optional

from constants import SPECS_DIR


@dataclass(frozen=True)
class Benchmark:
    """
    Attributes:
        example: name used in result tables (``mut(2)``, ``r(1)w(2)``)
        file: file name under the specs directory
        source: spec source
        bound: state bound the benchmark is run with
    """

    example: str
    file: str
    source: str
    bound: int


MUTEX_TEMPLATE = """\
system mut{n}
bound 4
locks m

process P(i in 0..{last})
  locals ncs, cs
  action enterCS
    pre ncs(s) and av_m(s);
    post cs(s') and not ncs(s') and own_m(s');
  action enterNCS
    pre cs(s);
    post ncs(s') and not cs(s') and not own_m(s') and av_m(s');
  formula start: forall s . init(s) implies ncs(s) and not cs(s) and not own_m(s) and av_m(s);
  formula sections: forall s . ncs(s) iff not cs(s);
  formula critical: forall s . cs(s) iff own_m(s);
  formula progress: forall s . init(s) implies (exists t . reach(s, t) and cs(t));
end

property {prop};
"""

MUTEX_TRY_TEMPLATE = """\
system mutTry{n}
bound 6
locks m

process P(i in 0..{last})
  locals ncs, try, cs
  action enterTry
    pre ncs(s);
    post try(s') and not ncs(s') and not cs(s') and (own_m(s') iff own_m(s)) and (av_m(s') iff av_m(s));
  action getLock
    pre try(s) and av_m(s);
    post try(s') and not ncs(s') and not cs(s') and own_m(s');
  action enterCS
    pre try(s) and own_m(s);
    post cs(s') and not try(s') and not ncs(s') and own_m(s');
  action enterNCS
    pre cs(s);
    post ncs(s') and not cs(s') and not try(s') and not own_m(s') and av_m(s');
  formula start: forall s . init(s) implies ncs(s) and not own_m(s) and av_m(s);
  formula sections: forall s . (ncs(s) and not try(s) and not cs(s)) or (try(s) and not ncs(s) and not cs(s)) or (cs(s) and not ncs(s) and not try(s));
  formula critical: forall s . cs(s) implies own_m(s);
  formula progress: forall s . init(s) implies (exists t . reach(s, t) and cs(t));
end

property {prop};
"""

# Left fork of philosopher i is fork{i}, right fork is fork{i+1}.
PHIL_TEMPLATE = """\
system phil{n}
bound 14
locks {forks}

process Phil(i in 0..{last})
  locals thk, hgr, eat
  uses fork{{i}}, fork{{i+1}}
  action getHgr
    pre thk(s);
    post hgr(s') and not thk(s') and not eat(s')
      and (own_fork{{i}}(s') iff own_fork{{i}}(s)) and (av_fork{{i}}(s') iff av_fork{{i}}(s))
      and (own_fork{{i+1}}(s') iff own_fork{{i+1}}(s)) and (av_fork{{i+1}}(s') iff av_fork{{i+1}}(s));
  action getLeft
    pre hgr(s) and av_fork{{i}}(s);
    post hgr(s') and not thk(s') and not eat(s') and own_fork{{i}}(s')
      and (own_fork{{i+1}}(s') iff own_fork{{i+1}}(s)) and (av_fork{{i+1}}(s') iff av_fork{{i+1}}(s));
  action getRight
    pre hgr(s) and av_fork{{i+1}}(s);
    post hgr(s') and not thk(s') and not eat(s') and own_fork{{i+1}}(s')
      and (own_fork{{i}}(s') iff own_fork{{i}}(s)) and (av_fork{{i}}(s') iff av_fork{{i}}(s));
  action getEat
    pre hgr(s) and own_fork{{i}}(s) and own_fork{{i+1}}(s);
    post eat(s') and not hgr(s') and not thk(s') and own_fork{{i}}(s') and own_fork{{i+1}}(s');
  action getThk
    pre eat(s);
    post thk(s') and not eat(s') and not hgr(s')
      and not own_fork{{i}}(s') and av_fork{{i}}(s') and not own_fork{{i+1}}(s') and av_fork{{i+1}}(s');
  formula start: forall s . init(s) implies thk(s) and av_fork{{i}}(s) and av_fork{{i+1}}(s);
  formula phases: forall s . (thk(s) and not hgr(s) and not eat(s)) or (hgr(s) and not thk(s) and not eat(s)) or (eat(s) and not thk(s) and not hgr(s));
  formula thinking_hands_free: forall s . thk(s) implies not own_fork{{i}}(s) and not own_fork{{i+1}}(s);
  formula eats: forall s . init(s) implies (exists t . reach(s, t) and eat(t));
  formula left_grabbable: forall s . av_fork{{i}}(s) implies (exists t . ch_fork{{i}}(s, t) and not av_fork{{i}}(t));
  formula right_grabbable: forall s . av_fork{{i+1}}(s) implies (exists t . ch_fork{{i+1}}(s, t) and not av_fork{{i+1}}(t));
end

property {prop};
"""

RW_TEMPLATE = """\
system rw{n}_{m}
bound 6
locks db

process R(i in 0..{last_reader})
  locals idle, reading
  action startRead
    pre idle(s) and av_db(s);
    post reading(s') and not idle(s') and own_db(s');
  action stopRead
    pre reading(s);
    post idle(s') and not reading(s') and not own_db(s') and av_db(s');
  formula start: forall s . init(s) implies idle(s) and av_db(s);
  formula phases: forall s . idle(s) iff not reading(s);
  formula guarded: forall s . reading(s) iff own_db(s);
  formula reads: forall s . init(s) implies (exists t . reach(s, t) and reading(t));
end

process W(j in 0..{last_writer})
  locals idle, writing
  action startWrite
    pre idle(s) and av_db(s);
    post writing(s') and not idle(s') and own_db(s');
  action stopWrite
    pre writing(s);
    post idle(s') and not writing(s') and not own_db(s') and av_db(s');
  formula start: forall s . init(s) implies idle(s) and av_db(s);
  formula phases: forall s . idle(s) iff not writing(s);
  formula guarded: forall s . writing(s) iff own_db(s);
  formula writes: forall s . init(s) implies (exists t . reach(s, t) and writing(t));
end

property {prop};
"""


def _check_count(name: str, value: int, minimum: int = 1) -> None:
    if value < minimum:
        raise ValueError(f"{name} needs at least {minimum} processes, got {value}")


def _never_together(atoms: List[str]) -> str:
    return "!(" + " & ".join(atoms) + ")"


def _pairwise_exclusion(atom: str, indices: List[int]) -> List[str]:
    return [
        _never_together([f"{atom}@{a}", f"{atom}@{b}"])
        for pos, a in enumerate(indices)
        for b in indices[pos + 1:]
    ]


def mutex(n: int = 2) -> str:
    """Mutual exclusion over one lock; property: no two processes in the critical section."""
    _check_count("mutex", n, 2)
    prop = "G (" + " & ".join(_pairwise_exclusion("cs", list(range(n)))) + ")"
    return MUTEX_TEMPLATE.format(n=n, last=n - 1, prop=prop)


def mutex_try(n: int = 2) -> str:
    """Mutual exclusion with a separate waiting section and lock acquisition step."""
    _check_count("mutex_try", n, 2)
    prop = "G (" + " & ".join(_pairwise_exclusion("cs", list(range(n)))) + ")"
    return MUTEX_TRY_TEMPLATE.format(n=n, last=n - 1, prop=prop)


def phil(n: int = 3) -> str:
    """
    Dining philosophers with forks as locks.

    The property forbids the two circular waits: every philosopher holding
    its right fork, or every philosopher holding its left fork. Both
    conjuncts sit under G, so neither wait may occur at any reachable state.
    """
    _check_count("phil", n, 2)
    forks = ", ".join(f"fork{i}" for i in range(n))
    all_right = _never_together([f"own_fork{(i + 1) % n}@{i}" for i in range(n)])
    all_left = _never_together([f"own_fork{i}@{i}" for i in range(n)])
    prop = f"G ({all_right} & {all_left})"
    return PHIL_TEMPLATE.format(n=n, last=n - 1, forks=forks, prop=prop)


def rw(readers: int = 1, writers: int = 1) -> str:
    """
    Readers and writers over a database lock.

    Readers are processes 0..readers-1 and writers follow them.
    """
    _check_count("rw readers", readers)
    _check_count("rw writers", writers)
    writer_ids = list(range(readers, readers + writers))
    clauses = [
        _never_together([f"reading@{r}", f"writing@{w}"])
        for r in range(readers)
        for w in writer_ids
    ]
    clauses += _pairwise_exclusion("writing", writer_ids)
    prop = "G (" + " & ".join(clauses) + ")"
    return RW_TEMPLATE.format(
        n=readers, m=writers, last_reader=readers - 1, last_writer=writers - 1, prop=prop,
    )


def default_suite() -> List[Benchmark]:
    """mut(2..3), phil(2..3) and r(1)w(1..2)."""
    suite = [Benchmark(f"mut({n})", f"mutex{n}.dspec", mutex(n), 4) for n in (2, 3)]
    suite += [Benchmark(f"phil({n})", f"phil{n}.dspec", phil(n), 14) for n in (2, 3)]
    suite += [Benchmark(f"r(1)w({m})", f"rw1_{m}.dspec", rw(1, m), 6) for m in (1, 2)]
    return suite


def extra_suite() -> List[Benchmark]:
    """Benchmarks outside the default table, plus the short names used on the command line."""
    return [
        Benchmark("mutTry(2)", "mutex_try2.dspec", mutex_try(2), 6),
        Benchmark("mut(2)", "mutex.dspec", mutex(2), 4),
        Benchmark("phil(3)", "phil.dspec", phil(3), 14),
    ]


def write_benchmarks(output_dir: str = SPECS_DIR, suite: Optional[List[Benchmark]] = None) -> List[str]:
    """
    Write benchmark spec files.

    Args:
        output_dir: Directory where the spec files should be created
        suite: Benchmarks to write (default: the default and extra suites)

    Returns:
        Paths of the written files
    """
    os.makedirs(output_dir, exist_ok=True)
    if suite is None:
        suite = default_suite() + extra_suite()
    paths = []
    for bench in suite:
        path = os.path.join(output_dir, bench.file)
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(bench.source)
        paths.append(path)
    return paths
