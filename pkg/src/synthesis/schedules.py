"""
Batch schedules for the Synthlock project.

A schedule is the sequence of per-level instance bounds used by the batch
search, one bound per batch. ``nocex`` is a single unbounded batch that
ignores counterexamples.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

from constants import DEFAULT_SCHEDULE_LENGTH

SCHEDULE_NAMES = ("exp2", "exp4", "exp8", "lineal10", "nocex")


@dataclass(frozen=True)
class BatchSchedule:
    """
    Attributes:
        name: schedule name
        bounds: instance bound per batch; None is unbounded
        use_cex: refine with counterexamples between batches
    """

    name: str
    bounds: Tuple[Optional[int], ...]
    use_cex: bool = True

    def __post_init__(self):
        if not self.bounds:
            raise ValueError(f"Schedule {self.name} has no batches")
        for b in self.bounds:
            if b is not None and b <= 0:
                raise ValueError(f"Schedule {self.name} has non-positive bound {b}")

    def __len__(self) -> int:
        return len(self.bounds)


def make_schedule(name: str, length: int = DEFAULT_SCHEDULE_LENGTH) -> BatchSchedule:
    """
    Expand a named schedule, or a comma-separated list of bounds.

    Examples:
        exp2 -> 2, 4, 8, ...; exp4 -> 4, 16, 64, ...; lineal10 -> 10, 20, 30, ...
    """
    if length <= 0:
        raise ValueError(f"Schedule length must be positive, got {length}")
    if name == "nocex":
        return BatchSchedule(name, (None,), use_cex=False)
    if name in ("exp2", "exp4", "exp8"):
        base = int(name[3:])
        return BatchSchedule(name, tuple(base ** (t + 1) for t in range(length)))
    if name == "lineal10":
        return BatchSchedule(name, tuple(10 * (t + 1) for t in range(length)))
    try:
        bounds = tuple(int(part) for part in name.split(","))
    except ValueError:
        raise ValueError(f"Unknown schedule: {name}. Choose one of {', '.join(SCHEDULE_NAMES)}") from None
    return BatchSchedule(name, bounds)
