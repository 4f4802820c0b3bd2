"""
Run artifact loading utilities for the Synthlock project.

This module provides functions for loading the artifacts written by a
synthesis run (process LTSs, program, run log, result summary) and the
benchmark results table, and for re-verifying a stored solution.
"""

import json
import logging
import os
from typing import Any, Dict, List, Optional

import pandas as pd

from constants import RESULTS_DIR, RUNS_DIR
from src.bench.dsl import parse_spec
from src.bench.reporting import RESULT_COLUMNS, read_results
from src.checking.checker import check
from src.checking.composition import compose
from src.codegen.programs import from_json
from src.lts.core import load_lts
from src.spec.model import satisfies

logger = logging.getLogger(__name__)

LOG_COLUMNS = ["iteration", "batch", "instances", "verdict", "lasso_length", "cex_count", "elapsed"]


def list_runs(root: Optional[str] = None) -> List[str]:
    """
    Run directories under ``root``, sorted by name.

    Raises:
        FileNotFoundError: when ``root`` does not exist
    """
    root = root or RUNS_DIR
    if not os.path.isdir(root):
        raise FileNotFoundError(f"Runs directory not found: {root}")
    return sorted(
        os.path.join(root, name)
        for name in os.listdir(root)
        if os.path.isfile(os.path.join(root, name, "result.json"))
    )


def load_run_log(path: str) -> pd.DataFrame:
    """Load a ``run.jsonl`` file; malformed lines are reported and skipped."""
    records = []
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as handle:
            for number, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    records.append(json.loads(line))
                except json.JSONDecodeError as err:
                    logger.warning("Skipping line %d of %s: %s", number, path, err)
    if not records:
        return pd.DataFrame(columns=LOG_COLUMNS)
    return pd.DataFrame(records)


def _read_json(path: str) -> Optional[Any]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError:
        return None
    except json.JSONDecodeError as err:
        logger.warning("Skipping malformed %s: %s", path, err)
        return None


def load_run(run_dir: str) -> Dict[str, Any]:
    """
    Load the artifacts of one run.

    Args:
        run_dir: directory written by :func:`src.bench.runner.run`

    Returns:
        A dict with ``result`` (result.json content), ``processes`` (LTS per
        process, empty unless found), ``program`` (GuardedProgram or None),
        ``program_text`` (the .gcl text or None) and ``log`` (DataFrame)

    Raises:
        FileNotFoundError: when ``run_dir`` has no result.json
    """
    result_path = os.path.join(run_dir, "result.json")
    if not os.path.isfile(result_path):
        raise FileNotFoundError(f"No result.json in {run_dir}")
    result = _read_json(result_path) or {}
    files = result.get("files", {})

    processes = []
    index = 0
    while os.path.exists(os.path.join(run_dir, f"process_{index}.lts.json")):
        processes.append(load_lts(os.path.join(run_dir, f"process_{index}.lts.json")))
        index += 1

    program = None
    if "program" in files:
        data = _read_json(os.path.join(run_dir, files["program"]))
        if data is not None:
            program = from_json(data)
    program_text = None
    if "gcl" in files and os.path.exists(os.path.join(run_dir, files["gcl"])):
        with open(os.path.join(run_dir, files["gcl"]), "r", encoding="utf-8") as handle:
            program_text = handle.read()

    return {
        "directory": run_dir,
        "result": result,
        "processes": processes,
        "program": program,
        "program_text": program_text,
        "log": load_run_log(os.path.join(run_dir, "run.jsonl")),
    }


def load_results(path: Optional[str] = None) -> pd.DataFrame:
    """
    Load a benchmark results CSV.

    Returns:
        The results, or an empty DataFrame with the result columns when
        the file is missing or malformed
    """
    path = path or os.path.join(RESULTS_DIR, "results.csv")
    if not os.path.exists(path):
        return pd.DataFrame(columns=RESULT_COLUMNS)
    try:
        return read_results(path)
    except (ValueError, pd.errors.ParserError) as err:
        logger.warning("Cannot read results %s: %s", path, err)
        return pd.DataFrame(columns=RESULT_COLUMNS)


def reverify_run(run_dir: str) -> bool:
    """
    Re-check a stored solution from disk.

    Every process LTS must satisfy its specification and the product must
    satisfy the property.

    Raises:
        FileNotFoundError: when the run has no stored spec or no solution
    """
    run = load_run(run_dir)
    spec_path = os.path.join(run_dir, "spec.dspec")
    if not os.path.exists(spec_path):
        raise FileNotFoundError(f"No spec.dspec in {run_dir}")
    spec = parse_spec(spec_path)
    processes = run["processes"]
    if len(processes) != len(spec.processes):
        raise FileNotFoundError(f"{run_dir} stores {len(processes)} of {len(spec.processes)} processes")
    for process, lts in zip(spec.processes, processes):
        if not satisfies(process, lts):
            logger.warning("%s no longer satisfies its specification", process.name)
            return False
    product = compose(processes, spec.system.vocabularies)
    return check(product, spec.system.prop).holds
