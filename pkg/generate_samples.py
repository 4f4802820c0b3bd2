#!/usr/bin/env python
"""
Generate the bundled benchmark specs for the Synthlock project.

This script writes the mutex, mutex-with-try, dining philosophers and
readers-writers spec files into the data/specs directory.
"""

import os
import sys

# Add the current directory to the path
sys.path.append(os.path.abspath(os.path.dirname(__file__)))

from constants import SPECS_DIR
from src.bench.dsl import parse_spec
from src.data.benchmarks import default_suite, extra_suite, write_benchmarks


def main():
    """Main function to generate the benchmark specs."""
    print("Generating benchmark specs for the Synthlock project...")
    print(f"Output directory: {SPECS_DIR}")

    suite = default_suite() + extra_suite()
    paths = write_benchmarks(SPECS_DIR, suite)

    print("\nSpec details:")
    for bench, path in zip(suite, paths):
        spec = parse_spec(path)
        print(f"- {os.path.basename(path)}: {bench.example}, {len(spec.processes)} processes, bound {bench.bound}")

    print(f"\nTotal specs generated: {len(paths)}")


if __name__ == "__main__":
    main()
