"""Command-line interface.

Exit codes: 0 success, 2 parse error, 3 validation error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .exact import resist_develop
from .fast import benchmark_methods
from .formats import FormatError, read_raster, read_shots, write_csv, write_pfm, write_pgm, write_shots
from .fracture import FractureError, fracture
from .grad import project_params
from .losses import TRACE_HEADER
from .model import ShotSet, ValidationError
from .optimize import IltProblem, MdpProblem, NumericalError, ilt_optimize, make_forward, mdp_optimize

log = logging.getLogger("ebeam_mdp")

EXIT_PARSE, EXIT_VALIDATION, EXIT_NUMERICAL = 2, 3, 4
THREADS_ENV = "EBEAM_MDP_THREADS"
DEFAULT_BENCH_COUNTS = "1,10,50,100,500,1000"


def _resolve_threads(args, cfg: cfgmod.RunConfig) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise cfgmod.ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    if cfg.threads is not None:
        return cfg.threads
    return os.cpu_count() or 1


def _load_config(args) -> cfgmod.RunConfig:
    cfg = cfgmod.load(args.config)
    for assignment in args.set or []:
        cfg = cfgmod.apply_override(cfg, assignment)
    paths = cfg.paths
    for name in ("target", "shots", "out"):
        value = getattr(args, name, None)
        if value is not None:
            paths = replace(paths, **{name: value})
    cfg = replace(cfg, paths=paths)
    if getattr(args, "forward", None):
        cfg = replace(cfg, opt=replace(cfg.opt, forward=args.forward))
    return cfg.validate()


def _out_dir(cfg: cfgmod.RunConfig) -> Path:
    out = Path(cfg.paths.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require(value, what: str):
    if value is None:
        raise cfgmod.ConfigError(f"missing required input: {what}")
    return value


def _read_target(path: str) -> np.ndarray:
    target = read_raster(path)
    if target.shape[0] != target.shape[1]:
        raise ValidationError(f"target must be square, got {target.shape}")
    return (target >= 0.5).astype(np.float64)


def _write_field(out: Path, stem: str, field: np.ndarray) -> None:
    write_pfm(out / f"{stem}.pfm", field)
    write_pgm(out / f"{stem}.pgm", field)


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    workers = _resolve_threads(args, cfg)
    shots = read_shots(_require(cfg.paths.shots, "--shots"), cfg.grid)
    forward = make_forward(cfg.ebl, cfg.grid, cfg.opt, workers)
    energy = forward.energy(shots.as_array())
    out = _out_dir(cfg)
    _write_field(out, "energy", energy)
    _write_field(out, "resist", resist_develop(energy, cfg.ebl))
    log.info("simulated %d shots on a %d grid (%s path)", len(shots), cfg.grid, cfg.opt.forward)
    return 0


def _initial_shots(cfg: cfgmod.RunConfig, mask: np.ndarray) -> ShotSet:
    if cfg.paths.shots:
        return read_shots(cfg.paths.shots, mask.shape[0])
    return fracture(mask, cfg.bounds)


def _write_trace(out: Path, trace) -> None:
    write_csv(out / "trace.csv", TRACE_HEADER, trace.csv_rows())


def cmd_mdp(args) -> int:
    cfg = _load_config(args)
    workers = _resolve_threads(args, cfg)
    target = _read_target(_require(cfg.paths.target, "--target"))
    init = _initial_shots(cfg, target)
    opt = cfg.opt_config("mdp")
    best, trace = mdp_optimize(init, target, cfg.ebl, cfg.bounds, opt, workers=workers)
    out = _out_dir(cfg)
    write_shots(out / "shots.csv", best)
    _write_trace(out, trace)
    problem = MdpProblem.build(target, init.grid_size, cfg.ebl, opt, workers)
    before, _ = project_params(init.as_array(), cfg.bounds, init.grid_size)
    _write_field(out, "before_resist", problem.simulate(before))
    _write_field(out, "after_resist", problem.simulate(best.as_array()))
    log.info("mdp: best total %.6g at epoch %d (l2 %.6g -> %.6g)", trace.best_loss,
             trace.best_epoch, trace.reports[0].l2, trace.reports[trace.best_epoch - 1].l2)
    return 0


def cmd_ilt(args) -> int:
    cfg = _load_config(args)
    workers = _resolve_threads(args, cfg)
    wafer = _read_target(_require(cfg.paths.target, "--target"))
    factor = cfg.ol.reduction
    mask_target = np.kron(wafer, np.ones((factor, factor)))
    init = _initial_shots(cfg, mask_target)
    opt = cfg.opt_config("ilt")
    best, trace = ilt_optimize(init, wafer, cfg.ebl, cfg.ol, cfg.bounds, opt, workers=workers)
    out = _out_dir(cfg)
    write_shots(out / "shots.csv", best)
    _write_trace(out, trace)
    problem = IltProblem.build(wafer, init.grid_size, cfg.ebl, cfg.ol, opt, workers)
    before, _ = project_params(init.as_array(), cfg.bounds, init.grid_size)
    z_before, _ = problem.simulate(before)
    z_after, state = problem.simulate(best.as_array())
    _write_field(out, "before_resist", z_before)
    _write_field(out, "after_resist", z_after)
    for name, field in state.corners.as_dict().items():
        _write_field(out, f"print_{name}", field)
    _write_field(out, "descent_target", problem.descent_target)
    log.info("ilt: best total %.6g at epoch %d", trace.best_loss, trace.best_epoch)
    return 0


def cmd_bench(args) -> int:
    cfg = _load_config(args)
    try:
        counts = sorted(int(c) for c in args.counts.split(","))
    except ValueError:
        raise cfgmod.ConfigError(f"--counts must be comma-separated integers: {args.counts!r}")
    if not counts or counts[0] < 0:
        raise ValidationError("--counts must list nonnegative shot counts")
    log.info("benchmark threads: 1 (forced); grid %d; trials %d", cfg.grid, args.trials)
    rows = benchmark_methods(counts, cfg.grid, args.trials, cfg.ebl, cfg.opt.sigma_prime,
                             seed=cfg.opt.seed)
    table = [[str(r.n_shots), f"{r.exact_ms:.3f}", f"{r.fast_ms:.3f}"] for r in rows]
    header = ("n_shots", "exact_ms", "fast_ms")
    if cfg.paths.out:
        path = Path(cfg.paths.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        write_csv(path, header, table)
    else:
        sys.stdout.write(",".join(header) + "\n")
        sys.stdout.writelines(",".join(r) + "\n" for r in table)
    return 0


def cmd_fracture(args) -> int:
    cfg = _load_config(args)
    mask = _read_target(_require(cfg.paths.target, "--target"))
    shots = fracture(mask, cfg.bounds)
    out = Path(cfg.paths.out or "shots.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_shots(out, shots)
    log.info("fractured into %d shots", len(shots))
    return 0


def cmd_config_dump(args) -> int:
    cfg = _load_config(args)
    sys.stdout.write(cfgmod.dumps(cfg) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ebeam-mdp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key, e.g. ebl.sigma_f=2.5 (repeatable)")
    common.add_argument("--threads", type=int, help=f"FFT worker count (env {THREADS_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="energy and resist rasters")
    p.add_argument("--shots")
    p.add_argument("--out", help="output directory")
    p.add_argument("--forward", choices=("exact", "fast"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mdp", parents=[common], help="shot-level mask data preparation")
    p.add_argument("--target", help="mask-level target raster (.pfm or .pgm)")
    p.add_argument("--shots", help="initial shots (default: fracture the target)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--forward", choices=("exact", "fast"))
    p.set_defaults(func=cmd_mdp)

    p = sub.add_parser("ilt", parents=[common], help="MDP-based inverse lithography")
    p.add_argument("--target", help="wafer-level target raster (.pfm or .pgm)")
    p.add_argument("--shots", help="initial mask-level shots (default: fracture 4x target)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--forward", choices=("exact", "fast"))
    p.set_defaults(func=cmd_ilt)

    p = sub.add_parser("bench", parents=[common], help="exact vs fast runtime table")
    p.add_argument("--counts", default=DEFAULT_BENCH_COUNTS, help="comma-separated shot counts")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fracture", parents=[common], help="rectangle cover of a binary mask")
    p.add_argument("--target", help="mask raster (.pfm or .pgm)")
    p.add_argument("--out", help="shot CSV path (default: shots.csv)")
    p.set_defaults(func=cmd_fracture)

    p = sub.add_parser("config-dump", parents=[common], help="print the resolved configuration")
    p.set_defaults(func=cmd_config_dump)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (cfgmod.ConfigError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, FractureError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
