#!/usr/bin/env python3
"""Calibrate the chain and reproduce all four figure scenarios as CSVs.

Equivalent to:

    qfdc calibrate configs/default.json
    qfdc run fig4a configs/default.json
    qfdc run fig4b configs/default.json
    qfdc run fig5  configs/default.json
    qfdc run fig6  configs/default.json

plus the fig5 control run with the interferometer removed.
"""

import argparse
import sys
import time
from pathlib import Path

from qfdc.cli import main as qfdc_main

REPO_ROOT = Path(__file__).resolve().parents[1]
DEFAULT_CONFIG = REPO_ROOT / "configs" / "default.json"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=str(DEFAULT_CONFIG))
    parser.add_argument("--out-dir", default=None,
                        help="override the config's output directory")
    args = parser.parse_args()

    steps = [["calibrate", args.config]]
    if args.out_dir:
        steps[0] += ["--out", str(Path(args.out_dir) / "calibration.json")]
    for scenario in ("fig4a", "fig4b", "fig5", "fig6"):
        step = ["run", scenario, args.config]
        if args.out_dir:
            step += ["--out", str(Path(args.out_dir) / f"{scenario}.csv")]
        steps.append(step)
    control = ["run", "fig5", args.config, "--no-interferometer"]
    control += ["--out", str(Path(args.out_dir or "results") / "fig5_control.csv")]
    steps.append(control)

    for step in steps:
        t0 = time.time()
        code = qfdc_main(step)
        print(f"[{time.time() - t0:6.1f}s] qfdc {' '.join(step)} -> exit {code}")
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
