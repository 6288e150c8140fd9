"""Command line entry point: ``tofmpi {simulate,decompose,run,reproduce,histogram}``.

Exit codes: 0 success, 2 configuration error, 3 input data error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io
from .errors import ConfigError, InputDataError, TofError
from .model import MeasurementCube, ModulationPlan, load_scene
from .pipeline import (
    ReproductionConfig,
    RunConfig,
    decompose_measurements,
    phase_histogram,
    read_maps,
    reproduce_experiment,
    run_pipeline,
)
from .sensor import measure

EXIT_OK, EXIT_CONFIG, EXIT_INPUT = 0, 2, 3

log = logging.getLogger("tofmpi")


def _add_plan_args(p):
    p.add_argument("--f0-hz", type=float, default=0.7937e6, help="base modulation frequency (default 0.7937e6)")
    p.add_argument("--harmonics", type=int, default=77, help="number of harmonics N (default 77)")
    p.add_argument("--modulation-depth", type=float, default=1.0, help="s0 (default 1)")


def _add_solver_args(p):
    p.add_argument("--grid-size", type=int, default=4096, help="dictionary size L (default 4096)")
    p.add_argument("--k", type=int, default=3, help="maximum components per pixel (default 3)")
    p.add_argument("--epsilon", type=float, default=None,
                   help="residual stop tolerance (default sqrt(2N) * sigma_z)")
    p.add_argument("--min-amplitude", type=float, default=None,
                   help="drop components below this (default 5 sigma_z / sqrt(N))")
    p.add_argument("--no-refine", action="store_true", help="plain OMP without support refinement")
    p.add_argument("--sentinel", type=float, default=10.0, help="depth written to unused slots (default 10 m)")
    p.add_argument("--baseline-harmonic", type=int, default=3, help="harmonic for the baseline maps (default 3)")
    p.add_argument("--bins", type=int, default=64, help="phase histogram bins (default 64)")
    p.add_argument("--debug-trace", action="store_true", help="write per-pixel solver trace.csv")
    p.add_argument("--workers", type=int, default=1, help="worker processes for decomposition")
    p.add_argument("--no-figures", action="store_true", help="skip PNG figures")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tofmpi", description="Multipath separation for multi-frequency ToF.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="scene -> measurement cube")
    p.add_argument("--scene", type=Path, required=True)
    _add_plan_args(p)
    p.add_argument("--noise-sigma", type=float, default=0.0, help="bucket noise std")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="cube CSV path (sidecar written next to it)")

    p = sub.add_parser("decompose", help="measurement cube -> maps")
    p.add_argument("--cube", type=Path, required=True)
    p.add_argument("--noise-sigma", type=float, default=None,
                   help="bucket noise std used for default thresholds (default: from cube sidecar)")
    _add_solver_args(p)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("run", help="scene -> maps, end to end")
    p.add_argument("--scene", type=Path, required=True)
    _add_plan_args(p)
    _add_solver_args(p)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("reproduce", help="built-in three-layer experiment")
    _add_plan_args(p)
    _add_solver_args(p)
    p.add_argument("--width", type=int, default=16)
    p.add_argument("--height", type=int, default=12)
    p.add_argument("--full-size", action="store_true", help="160 x 120 instead of the width/height flags")
    p.add_argument("--middle-depth", type=float, default=4.2, help="middle layer depth in meters")
    noise = p.add_mutually_exclusive_group()
    noise.add_argument("--noise-sigma", type=float, default=0.0)
    noise.add_argument("--snr-db", type=float, default=None, help="set noise from SNR relative to mean |z|^2")
    p.add_argument("--no-snap", action="store_true", help="keep layer depths off the dictionary grid")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("histogram", help="maps directory -> phase histogram CSV")
    p.add_argument("--maps", type=Path, required=True)
    p.add_argument("--harmonic", type=int, default=None, help="default: the maps' baseline harmonic")
    p.add_argument("--bins", type=int, default=64)
    p.add_argument("--out", type=Path, required=True, help="CSV path")
    return ap


def _plan(args) -> ModulationPlan:
    return ModulationPlan(args.f0_hz, args.harmonics, args.modulation_depth)


def _run_config(args, plan, noise_sigma, seed=0, scene_path=None) -> RunConfig:
    return RunConfig(
        plan=plan, grid_size=args.grid_size, k=args.k, epsilon=args.epsilon,
        min_amplitude=args.min_amplitude, refine=not args.no_refine, noise_sigma=noise_sigma,
        rng_seed=seed, scene_path=scene_path, output_dir=args.out,
        undefined_depth_sentinel=args.sentinel, histogram_bins=args.bins,
        baseline_harmonic=args.baseline_harmonic, debug_trace=args.debug_trace,
        figures=not args.no_figures, workers=args.workers,
    )


def cmd_simulate(args) -> None:
    scene = load_scene(args.scene)
    cube = measure(scene, _plan(args), args.noise_sigma, args.seed)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    io.write_cube(cube, args.out)
    print(f"wrote {args.out} ({scene.width}x{scene.height}, N={cube.plan.harmonic_count})")


def cmd_decompose(args) -> None:
    cube = io.read_cube(args.cube)
    if args.noise_sigma is not None:
        cube = MeasurementCube(cube.values, cube.plan, args.noise_sigma)
    cfg = _run_config(args, cube.plan, cube.noise_sigma)
    res = decompose_measurements(cube, cfg)
    print(f"wrote maps to {args.out}; stop reasons {res.report['stop_reasons']}")


def cmd_run(args) -> None:
    cfg = _run_config(args, _plan(args), args.noise_sigma, args.seed, args.scene)
    res = run_pipeline(cfg)
    print(f"wrote maps to {args.out}; stop reasons {res.report['stop_reasons']}")


def cmd_reproduce(args) -> None:
    w, h = (160, 120) if args.full_size else (args.width, args.height)
    cfg = ReproductionConfig(
        width=w, height=h, middle_depth=args.middle_depth, harmonics=args.harmonics,
        base_frequency_hz=args.f0_hz, modulation_depth=args.modulation_depth,
        grid_size=args.grid_size, k=args.k, snr_db=args.snr_db, noise_sigma=args.noise_sigma,
        seed=args.seed, snap_to_grid=not args.no_snap, baseline_harmonic=args.baseline_harmonic,
        histogram_bins=args.bins, workers=args.workers, figures=not args.no_figures,
        debug_trace=args.debug_trace,
    )
    overrides = {"epsilon": args.epsilon, "min_amplitude": args.min_amplitude,
                 "refine": not args.no_refine, "undefined_depth_sentinel": args.sentinel}
    res = reproduce_experiment(args.out, cfg, **overrides)
    for comp in res.report["ground_truth"]["components"]:
        print(f"component {comp['component']}: matched {comp['matched']}, "
              f"max |depth error| {comp['max_abs_depth_error_cells']} cells")
    print(f"wrote {args.out}")


def cmd_histogram(args) -> None:
    maps = read_maps(args.maps)
    harmonic = maps.baseline_harmonic if args.harmonic is None else args.harmonic
    if harmonic < 1:
        raise ConfigError(f"harmonic must be >= 1, got {harmonic}")
    table = phase_histogram(maps, harmonic, args.bins)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    io.write_histogram_csv(args.out, table)
    print(f"wrote {args.out}")


COMMANDS = {
    "simulate": cmd_simulate,
    "decompose": cmd_decompose,
    "run": cmd_run,
    "reproduce": cmd_reproduce,
    "histogram": cmd_histogram,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputDataError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TofError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
