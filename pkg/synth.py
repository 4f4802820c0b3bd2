#!/usr/bin/env python
"""
Command-line entry point for the Synthlock project.

    python synth.py data/specs/mutex.dspec --bound 4 --batches exp2
    python synth.py --suite --batches exp2 --batches nocex --report data/results/results.csv
"""

import os
import sys

# Add the current directory to the path
sys.path.append(os.path.abspath(os.path.dirname(__file__)))

from src.bench.runner import main

if __name__ == "__main__":
    sys.exit(main())
