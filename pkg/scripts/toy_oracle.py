"""Run the toy optimizations and record best-L2 improvement thresholds.

The recorded threshold for each case is the measured ratio best_l2 / init_l2
plus a 5% relative allowance, rounded up to three decimals. Thresholds are
written once and then frozen; pass --write to (re)record them.
"""

import argparse
import json
import math
import time
from pathlib import Path

from ebeam_mdp.optimize import ilt_optimize, mdp_optimize
from ebeam_mdp.toys import TOY_NAMES, toy_case

DEFAULT_PATH = Path(__file__).resolve().parents[1] / "data" / "toys" / "thresholds.json"
ALLOWANCE = 1.05


def run_case(name: str, seed: int = 0):
    case = toy_case(name, seed)
    if case.mode == "mdp":
        _, trace = mdp_optimize(case.init, case.target, case.ebl, case.bounds, case.cfg)
    else:
        _, trace = ilt_optimize(case.init, case.target, case.ebl, case.ol, case.bounds, case.cfg)
    init_l2 = trace.reports[0].l2
    best_l2 = trace.reports[trace.best_epoch - 1].l2
    return init_l2, best_l2, trace


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--write", action="store_true", help="record thresholds to --path")
    ap.add_argument("--path", default=str(DEFAULT_PATH))
    args = ap.parse_args()
    record = {}
    for name in TOY_NAMES:
        t0 = time.perf_counter()
        init_l2, best_l2, trace = run_case(name)
        ratio = best_l2 / init_l2
        record[name] = {
            "init_l2": init_l2,
            "best_l2": best_l2,
            "best_epoch": trace.best_epoch,
            "measured_ratio": ratio,
            "max_ratio": math.ceil(ratio * ALLOWANCE * 1000) / 1000,
        }
        print(f"{name:10s} l2 {init_l2:9.3f} -> {best_l2:9.3f}  ratio {ratio:.4f}  "
              f"best epoch {trace.best_epoch}  ({time.perf_counter() - t0:.1f}s)")
    if args.write:
        Path(args.path).write_text(json.dumps(record, indent=2) + "\n")
        print(f"wrote {args.path}")


if __name__ == "__main__":
    main()
