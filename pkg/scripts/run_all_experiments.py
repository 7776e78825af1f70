#!/usr/bin/env python3
"""Run every reference experiment and drop CSV + SVG artifacts into out/.

Usage: python scripts/run_all_experiments.py [OUTDIR]
"""

import sys
import time
from pathlib import Path

from krylov.experiments import ExperimentSpec, experiment_names, run_experiment


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out")
    for name in experiment_names():
        t0 = time.perf_counter()
        result = run_experiment(ExperimentSpec(name=name, output_dir=out), svg=True)
        elapsed = time.perf_counter() - t0
        last = result.trace.rows[-1]
        grade = result.trace.grade_reached
        print(f"{name:22s} {len(result.trace.rows):4d} iterations"
              f"{f' (breakdown at {grade})' if grade else '':22s}"
              f" residual {last.residual_norm:10.3e}"
              f" error {last.error_norm:10.3e}"
              f" |f^N| {last.solution_norm:8.5f}"
              f"  [{elapsed:5.1f}s]")
    print(f"artifacts in {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
