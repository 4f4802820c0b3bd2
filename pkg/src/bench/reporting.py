"""
Result tables for the Synthlock project.

One row per synthesis run, in the column order of the benchmark table.
Times are wall-clock seconds written with three decimals.
"""

import os
from dataclasses import asdict, dataclass
from typing import Iterable, List

import pandas as pd

RESULT_COLUMNS = [
    "example",
    "schedule",
    "scope",
    "l_time",
    "g_time",
    "iterations",
    "reachable_states",
    "total_states",
    "total_states_props",
    "result",
]

RESULT_CODES = ("F", "N", "U", "TO")


@dataclass(frozen=True)
class ResultRow:
    """
    One benchmark table row.

    Attributes:
        example: benchmark name (``mut(2)``)
        schedule: batch schedule name
        scope: states per process
        l_time: longest single instance find, seconds
        g_time: total search time, seconds
        iterations: model-check calls
        reachable_states: reachable product states of the solution
        total_states: product of the component state counts
        total_states_props: 2 to the number of product propositions
        result: F, N, U or TO
    """

    example: str
    schedule: str
    scope: int
    l_time: float
    g_time: float
    iterations: int
    reachable_states: int
    total_states: int
    total_states_props: int
    result: str

    def __post_init__(self):
        if self.result not in RESULT_CODES:
            raise ValueError(f"Unknown result code: {self.result}")


def results_frame(rows: Iterable[ResultRow]) -> pd.DataFrame:
    """Rows as a DataFrame sorted by (example, scope); empty input gives the bare columns."""
    records = [asdict(row) for row in rows]
    df = pd.DataFrame(records, columns=RESULT_COLUMNS)
    if df.empty:
        return df
    df = df.sort_values(["example", "scope"], kind="mergesort").reset_index(drop=True)
    df["l_time"] = df["l_time"].astype(float).round(3)
    df["g_time"] = df["g_time"].astype(float).round(3)
    return df


def write_results(rows: Iterable[ResultRow], path: str) -> pd.DataFrame:
    """Write a results CSV, replacing any existing file."""
    df = results_frame(rows)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    df.to_csv(path, index=False, float_format="%.3f", lineterminator="\n")
    return df


def append_result(row: ResultRow, path: str) -> pd.DataFrame:
    """
    Add a row to a results CSV, creating it when missing.

    The file stays sorted by (example, scope).
    """
    rows: List[ResultRow] = []
    if os.path.exists(path):
        rows = [ResultRow(**record) for record in read_results(path).to_dict("records")]
    rows.append(row)
    return write_results(rows, path)


def read_results(path: str) -> pd.DataFrame:
    """
    Read a results CSV.

    Raises:
        ValueError: when the file does not have the result columns
    """
    df = pd.read_csv(path, dtype={"example": str, "schedule": str, "result": str})
    missing = [c for c in RESULT_COLUMNS if c not in df.columns]
    if missing:
        raise ValueError(f"{path} is missing result columns {missing}")
    df = df[RESULT_COLUMNS]
    for column in ("scope", "iterations", "reachable_states", "total_states", "total_states_props"):
        df[column] = df[column].astype(int)
    return df
