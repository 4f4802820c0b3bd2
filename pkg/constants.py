"""
Global constants for the Synthlock project.
"""

import os

# Search configuration
DEFAULT_TIMEOUT = 1800  # seconds per synthesis run
DEFAULT_SCHEDULE = "exp2"  # Options: "exp2", "exp4", "exp8", "lineal10", "nocex"
DEFAULT_SCHEDULE_LENGTH = 8  # batches expanded from a named schedule
DEFAULT_SEED = 0

# Instance handling
DEDUP_INSTANCES = True  # skip instances isomorphic to one already yielded
REFINE_MID_BATCH = False  # apply new counterexamples before the batch ends
INITIAL_CANDIDATES = 16  # saturated instances per process tried for a composable initial tuple
DEBUG_VALIDATION = os.environ.get("SYNTH_DEBUG", "0") == "1"  # re-evaluate every instance against its spec

# Program simulation
SIMULATION_STATE_CAP = 200000

# Data locations
DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")
SPECS_DIR = os.path.join(DATA_DIR, "specs")
RUNS_DIR = os.environ.get("SYNTH_RUNS_DIR", os.path.join(DATA_DIR, "runs"))
RESULTS_DIR = os.path.join(DATA_DIR, "results")
