"""Exact vs fast forward runtime sweep (single-threaded FFT)."""

import argparse

from ebeam_mdp.fast import benchmark_methods


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=512)
    ap.add_argument("--counts", default="1,10,50,100,500,1000")
    ap.add_argument("--trials", type=int, default=3)
    args = ap.parse_args()
    counts = [int(c) for c in args.counts.split(",")]
    print("n_shots,exact_ms,fast_ms")
    for row in benchmark_methods(counts, args.grid, args.trials):
        print(f"{row.n_shots},{row.exact_ms:.3f},{row.fast_ms:.3f}")


if __name__ == "__main__":
    main()
