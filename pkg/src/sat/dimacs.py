"""
DIMACS CNF reading and writing for the Synthlock project.

Used to hand a grounded problem to a third-party solver when a result
needs a second opinion.
"""

from typing import Iterable, List, TextIO, Tuple

from src.sat.solver import SatProblem


def write_dimacs(problem: SatProblem, handle: TextIO, comments: Iterable[str] = ()) -> None:
    """Write ``problem`` (blocking clauses included) in DIMACS CNF."""
    clauses = list(problem.all_clauses())
    for comment in comments:
        handle.write(f"c {comment}\n")
    if problem.projection:
        handle.write("c projection " + " ".join(str(v) for v in problem.projection) + "\n")
    handle.write(f"p cnf {problem.num_vars} {len(clauses)}\n")
    for clause in clauses:
        handle.write(" ".join(str(lit) for lit in clause) + " 0\n")


def read_dimacs(handle: TextIO) -> SatProblem:
    """
    Read a DIMACS CNF file.

    A ``c projection`` comment written by :func:`write_dimacs` restores the
    projection variables; otherwise every declared variable is projected.

    Raises:
        ValueError: on a missing or inconsistent header
    """
    num_vars = None
    declared = 0
    projection: Tuple[int, ...] = ()
    clauses: List[Tuple[int, ...]] = []
    current: List[int] = []
    for raw in handle:
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) > 1 and parts[1] == "projection":
                projection = tuple(int(v) for v in parts[2:])
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"Invalid DIMACS header: {line}")
            num_vars, declared = int(parts[2]), int(parts[3])
            continue
        if num_vars is None:
            raise ValueError("Clause before DIMACS header")
        for token in line.split():
            lit = int(token)
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            else:
                if abs(lit) > num_vars:
                    raise ValueError(f"Literal {lit} exceeds declared variable count {num_vars}")
                current.append(lit)
    if num_vars is None:
        raise ValueError("Missing DIMACS header")
    if current:
        clauses.append(tuple(current))
    if len(clauses) != declared:
        raise ValueError(f"Header declares {declared} clauses, found {len(clauses)}")
    return SatProblem(num_vars, tuple(clauses), projection or tuple(range(1, num_vars + 1)))
