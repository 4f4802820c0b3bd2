#!/usr/bin/env python
"""
Debug environment for the Synthlock project.
"""

import importlib
import inspect
import os
import sys


def check_module(module_name):
    """Check if a module can be imported."""
    try:
        module = importlib.import_module(module_name)
        version = getattr(module, "__version__", None)
        suffix = f" ({version})" if version else ""
        print(f"✅ Successfully imported {module_name}{suffix}")
        return module
    except ImportError as e:
        print(f"❌ Failed to import {module_name}: {e}")
        return None


def check_data_dir(label, path, suffix=None, hint=None):
    """Report a data directory and how many artifacts it holds."""
    if not os.path.isdir(path):
        print(f"⚠️  {label} missing: {path}" + (f" ({hint})" if hint else ""))
        return
    entries = os.listdir(path)
    if suffix:
        entries = [e for e in entries if e.endswith(suffix)]
    print(f"✅ {label}: {path} ({len(entries)} entries)")


def main():
    """Main function to debug the environment."""
    print("\n=== SYNTHLOCK ENVIRONMENT DEBUGGER ===\n")

    print(f"Python version: {sys.version}")
    print(f"Current working directory: {os.getcwd()}")

    project_root = os.path.dirname(os.path.abspath(__file__))
    print(f"Project root: {project_root}")
    sys.path.append(project_root)

    print("\n=== CHECKING DATA ===\n")
    from constants import RESULTS_DIR, RUNS_DIR, SPECS_DIR

    check_data_dir("Spec files", SPECS_DIR, ".dspec", "run generate_samples.py")
    check_data_dir("Run directories", RUNS_DIR, hint="created by the first synth.py run")
    check_data_dir("Result tables", RESULTS_DIR, ".csv", "created by synth.py --suite")

    print("\n=== CHECKING DEPENDENCIES ===\n")
    for name in ("lark", "pandas", "numpy", "networkx", "plotly", "streamlit", "pytest"):
        check_module(name)

    print("\n=== CHECKING PROJECT MODULES ===\n")
    for name in (
        "src.lts.core",
        "src.logic.formulas",
        "src.logic.parser",
        "src.logic.grounding",
        "src.sat.solver",
        "src.sat.dimacs",
        "src.finder.model_finder",
        "src.spec.model",
        "src.checking.composition",
        "src.checking.ltl",
        "src.checking.buchi",
        "src.checking.checker",
        "src.synthesis.schedules",
        "src.synthesis.search",
        "src.codegen.programs",
        "src.bench.dsl",
        "src.bench.reporting",
        "src.bench.runner",
        "src.data.benchmarks",
        "src.data.loading",
        "src.visualization.lts_graph",
        "src.visualization.timeline",
    ):
        check_module(name)

    runner = check_module("src.bench.runner")
    if runner is not None:
        for func_name in ("run", "bench_all", "main"):
            func = getattr(runner, func_name, None)
            if func is None:
                print(f"❌ Function '{func_name}' not found in src.bench.runner")
            else:
                argspec = inspect.getfullargspec(func)
                print(f"✅ Function '{func_name}' exists with arguments: {argspec.args}")

    print("\nDebug complete!")


if __name__ == "__main__":
    main()
