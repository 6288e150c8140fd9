"""End-to-end runs: scene -> measurement cube -> per-pixel decomposition ->
depth/amplitude maps, phase histograms and a JSON report.

Component slots are ranked by depth at every pixel, not by the order the
solver found them, so slot k holds the k-th nearest recovered surface.
Unused slots carry the sentinel depth and amplitude 0.
"""

from __future__ import annotations

import logging
import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import io
from .dictionary import Dictionary, build_dictionary, depth_to_nearest_grid_index, grid_index_to_depth
from .errors import ConfigError, InputDataError, PixelError, SceneValidationError
from .model import SPEED_OF_LIGHT, Layer, MeasurementCube, ModulationPlan, Scene, load_scene, save_scene, validate_scene
from .sensor import bucket_sigma_for_snr, complex_noise_std, measure, single_frequency_depth
from .solver import SolverConfig, omp_decompose, to_decomposition

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs apart from the scene itself.

    ``epsilon`` None means sqrt(2N) * sigma_z, the expected norm of pure
    measurement noise. ``min_amplitude`` None means 5 sigma_z / sqrt(N)
    (five times the per-component noise on a fitted coefficient), floored
    at 1e-9 so that round-off never shows up as a surface.
    """

    plan: ModulationPlan
    grid_size: int = 4096
    k: int = 3
    epsilon: float | None = None
    min_amplitude: float | None = None
    refine: bool = True
    noise_sigma: float = 0.0
    rng_seed: int = 0
    scene_path: Path | None = None
    output_dir: Path | None = None
    undefined_depth_sentinel: float = 10.0
    histogram_bins: int = 64
    baseline_harmonic: int = 3
    debug_trace: bool = False
    figures: bool = True
    workers: int = 1

    def __post_init__(self):
        if not self.noise_sigma >= 0:
            raise ConfigError(f"noise sigma must be >= 0, got {self.noise_sigma}")
        if not 0 <= self.undefined_depth_sentinel < self.plan.unambiguous_range:
            raise ConfigError(
                f"sentinel depth {self.undefined_depth_sentinel} m must lie in "
                f"[0, {self.plan.unambiguous_range:.3f}) m"
            )
        if self.histogram_bins < 2:
            raise ConfigError(f"histogram needs >= 2 bins, got {self.histogram_bins}")
        if not 1 <= self.baseline_harmonic <= self.plan.harmonic_count:
            raise ConfigError(
                f"baseline harmonic {self.baseline_harmonic} outside [1, {self.plan.harmonic_count}]"
            )
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @property
    def sigma_z(self) -> float:
        return complex_noise_std(self.noise_sigma, self.plan.modulation_depth)

    def solver_config(self, sigma_z: float | None = None) -> SolverConfig:
        sz = self.sigma_z if sigma_z is None else sigma_z
        n = self.plan.harmonic_count
        eps = math.sqrt(2 * n) * sz if self.epsilon is None else self.epsilon
        floor = max(5.0 * sz / math.sqrt(n), 1e-9) if self.min_amplitude is None else self.min_amplitude
        return SolverConfig(max_components=self.k, residual_tolerance=eps, min_amplitude=floor,
                            refine=self.refine)


@dataclass(frozen=True, eq=False)
class MapStack:
    depth: np.ndarray  # (K, h, w), sentinel where absent
    amplitude: np.ndarray  # (K, h, w), 0 where absent
    grid_index: np.ndarray  # (K, h, w), -1 where absent
    residual: np.ndarray  # (h, w)
    baseline_depth: np.ndarray  # (h, w), NaN where z == 0
    baseline_amplitude: np.ndarray
    baseline_harmonic: int
    base_frequency_hz: float
    sentinel: float
    phase_warning: np.ndarray | None = None
    stop_reason: np.ndarray | None = None

    @property
    def k(self) -> int:
        return self.depth.shape[0]

    @property
    def shape(self):
        return self.depth.shape[1:]

    @property
    def present(self) -> np.ndarray:
        return self.amplitude > 0


@dataclass
class PipelineResult:
    maps: MapStack
    report: dict
    cube: MeasurementCube
    scene: Scene | None = None
    dictionary: Dictionary | None = None
    solutions: list = field(default_factory=list, repr=False)


# --- decomposition ------------------------------------------------------------

def _decompose_rows(args):
    values, dictionary, config, y0 = args
    out = []
    for dy, row in enumerate(values):
        for x, z in enumerate(row):
            try:
                out.append(omp_decompose(z, dictionary, config))
            except InputDataError as exc:
                raise PixelError(x, y0 + dy, exc) from exc
    return out


def decompose_cube(cube: MeasurementCube, dictionary: Dictionary, config: SolverConfig, workers: int = 1):
    """Run the solver on every pixel; returns solutions in row-major order."""
    h, w, _ = cube.shape
    if workers <= 1 or h < 2:
        return _decompose_rows((cube.values, dictionary, config, 0))
    rows_per = max(1, math.ceil(h / (workers * 4)))
    tasks = [(cube.values[y:y + rows_per], dictionary, config, y) for y in range(0, h, rows_per)]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        chunks = list(ex.map(_decompose_rows, tasks))
    return [s for chunk in chunks for s in chunk]


def baseline_maps(cube: MeasurementCube, harmonic: int):
    """Single-frequency (multipath-corrupted) depth and amplitude at one harmonic."""
    n = cube.plan.harmonic_count
    if not 1 <= harmonic <= n:
        raise ConfigError(f"harmonic {harmonic} outside [1, {n}]")
    z = cube.values[:, :, harmonic - 1]
    return single_frequency_depth(z, cube.plan.angular_frequency(harmonic)), np.abs(z)


def assemble_maps(solutions, dictionary: Dictionary, cube: MeasurementCube, k: int, sentinel: float,
                  baseline_harmonic: int) -> MapStack:
    h, w, _ = cube.shape
    depth = np.full((k, h, w), float(sentinel))
    amp = np.zeros((k, h, w))
    idx = np.full((k, h, w), -1, dtype=int)
    residual = np.zeros((h, w))
    warn = np.zeros((h, w), dtype=bool)
    stop = np.empty((h, w), dtype=object)
    for p, sol in enumerate(solutions):
        y, x = divmod(p, w)
        dec = to_decomposition(sol, dictionary)
        for slot, comp in enumerate(dec.components[:k]):
            depth[slot, y, x] = comp.depth
            amp[slot, y, x] = comp.amplitude
            idx[slot, y, x] = comp.grid_index
        residual[y, x] = dec.residual_norm
        warn[y, x] = dec.phase_warning
        stop[y, x] = dec.stop_reason
    b_depth, b_amp = baseline_maps(cube, baseline_harmonic)
    return MapStack(depth, amp, idx, residual, b_depth, b_amp, baseline_harmonic,
                    cube.plan.base_frequency_hz, float(sentinel), warn, stop)


# --- histograms -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HistogramTable:
    edges: np.ndarray
    counts: dict  # series name -> counts per bin
    phases: dict  # series name -> raw phases (radians) that were binned
    harmonic: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def spread(self, name: str) -> float:
        p = self.phases[name]
        return float(np.std(p)) if len(p) else float("nan")


def depth_to_phase(depth, harmonic: int, base_frequency_hz: float):
    """Wrapped phase 2 d omega / c at ``harmonic * base_frequency_hz``."""
    omega = TWO_PI * base_frequency_hz * harmonic
    phase = np.mod(2.0 * np.asarray(depth, dtype=float) * omega / SPEED_OF_LIGHT, TWO_PI)
    return np.where(phase >= TWO_PI, 0.0, phase)


def phase_histogram(maps, harmonic: int, bins: int = 64, base_frequency_hz: float | None = None) -> HistogramTable:
    """Histogram of per-pixel phases over [0, 2pi).

    ``maps`` is a MapStack (series: baseline, component_1..K; absent slots
    excluded) or a bare 2-D depth array (series: depth; NaN excluded).
    """
    if bins < 2:
        raise ConfigError(f"histogram needs >= 2 bins, got {bins}")
    edges = np.linspace(0.0, TWO_PI, bins + 1)
    series = {}
    if isinstance(maps, MapStack):
        f0 = maps.base_frequency_hz if base_frequency_hz is None else base_frequency_hz
        b = maps.baseline_depth[np.isfinite(maps.baseline_depth) & (maps.baseline_amplitude > 0)]
        series["baseline"] = b
        for s in range(maps.k):
            series[f"component_{s + 1}"] = maps.depth[s][maps.amplitude[s] > 0]
    else:
        if base_frequency_hz is None:
            raise ConfigError("base_frequency_hz is required for a bare depth map")
        f0 = base_frequency_hz
        d = np.asarray(maps, dtype=float)
        series["depth"] = d[np.isfinite(d)]
    counts, phases = {}, {}
    for name, d in series.items():
        ph = depth_to_phase(d, harmonic, f0).ravel()
        phases[name] = ph
        counts[name] = np.histogram(ph, bins=edges)[0]
    return HistogramTable(edges, counts, phases, harmonic)


def phase_cluster_stats(maps: MapStack, scene: Scene, harmonic: int) -> list[dict]:
    """Group each component's phases by the true layer they land nearest to.

    Returns one record per (component slot, true layer) with count, mean and
    std of the recovered phase and the true phase of that layer.
    """
    true_d = scene.depths()
    true_a = scene.amplitudes()
    records = {}
    for s in range(maps.k):
        for y, x in zip(*np.nonzero(maps.amplitude[s] > 0)):
            present = np.flatnonzero(true_a[:, y, x] > 0)
            if present.size == 0:
                continue
            d = maps.depth[s, y, x]
            j = int(present[np.argmin(np.abs(true_d[present, y, x] - d))])
            records.setdefault((s, j), []).append((d, true_d[j, y, x]))
    out = []
    for (s, j), pairs in sorted(records.items()):
        d, t = np.array(pairs).T
        ph = depth_to_phase(d, harmonic, maps.base_frequency_hz)
        out.append({
            "component": s + 1,
            "layer": j,
            "count": int(len(d)),
            "phase_mean": float(np.mean(ph)),
            "phase_std": float(np.std(ph)),
            "true_phase_mean": float(np.mean(depth_to_phase(t, harmonic, maps.base_frequency_hz))),
        })
    return out


# --- ground truth comparison --------------------------------------------------

def compare_to_scene(maps: MapStack, scene: Scene, dictionary: Dictionary) -> dict:
    """Rank-wise comparison of recovered depths against the scene's present layers."""
    true_d = scene.depths()
    true_a = scene.amplitudes()
    h, w = maps.shape
    out = []
    for s in range(maps.k):
        errs, missing, spurious = [], 0, 0
        for y in range(h):
            for x in range(w):
                present = np.flatnonzero(true_a[:, y, x] > 0)
                has_truth = s < present.size
                has_rec = maps.amplitude[s, y, x] > 0
                if has_truth and has_rec:
                    errs.append(abs(maps.depth[s, y, x] - true_d[present[s], y, x]))
                elif has_truth:
                    missing += 1
                elif has_rec:
                    spurious += 1
        errs = np.array(errs)
        out.append({
            "component": s + 1,
            "matched": int(errs.size),
            "missing": missing,
            "spurious": spurious,
            "max_abs_depth_error_m": float(errs.max()) if errs.size else None,
            "max_abs_depth_error_cells": float(errs.max() / dictionary.grid_step) if errs.size else None,
            "mean_abs_depth_error_m": float(errs.mean()) if errs.size else None,
        })
    return {"grid_step_m": dictionary.grid_step, "components": out}


# --- report -----------------------------------------------------------------

def _stats(a):
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return {"count": 0, "mean": None, "std": None, "min": None, "max": None}
    return {"count": int(a.size), "mean": float(a.mean()), "std": float(a.std()),
            "min": float(a.min()), "max": float(a.max())}


def build_report(maps: MapStack, config: RunConfig, solver_cfg: SolverConfig, dictionary: Dictionary,
                 cube: MeasurementCube, scene: Scene | None = None) -> dict:
    flags = []
    if not np.any(cube.values):
        flags.append("no signal")
    if maps.phase_warning is not None and maps.phase_warning.any():
        flags.append("phase warning")
    comps = []
    for s in range(maps.k):
        present = maps.amplitude[s] > 0
        comps.append({
            "component": s + 1,
            "depth": _stats(maps.depth[s][present]),
            "amplitude": _stats(maps.amplitude[s][present]),
        })
    hist = phase_histogram(maps, maps.baseline_harmonic, config.histogram_bins)
    report = {
        "scene": {"width": int(cube.shape[1]), "height": int(cube.shape[0])},
        "plan": cube.plan.to_dict(),
        "grid_size": dictionary.grid_size,
        "grid_step_m": dictionary.grid_step,
        "unambiguous_range_m": dictionary.unambiguous_range,
        "solver": asdict(solver_cfg),
        "noise_sigma": cube.noise_sigma,
        "sigma_z": complex_noise_std(cube.noise_sigma, cube.plan.modulation_depth),
        "rng_seed": config.rng_seed,
        "sentinel_depth_m": maps.sentinel,
        "flags": flags,
        "components": comps,
        "residual": _stats(maps.residual),
        "stop_reasons": dict(sorted(Counter(maps.stop_reason.ravel().tolist()).items()))
        if maps.stop_reason is not None else {},
        "baseline": {
            "harmonic": maps.baseline_harmonic,
            "depth": _stats(maps.baseline_depth[np.isfinite(maps.baseline_depth)]),
        },
        "phase_spread": {name: hist.spread(name) for name in hist.counts},
    }
    if scene is not None:
        report["ground_truth"] = compare_to_scene(maps, scene, dictionary)
        report["phase_clusters"] = phase_cluster_stats(maps, scene, maps.baseline_harmonic)
    return report


# --- output -----------------------------------------------------------------

def write_maps(maps: MapStack, out_dir, unambiguous_range: float, grid_size: int) -> dict:
    """Write map CSVs, 16-bit PGM previews and the ``maps.json`` sidecar."""
    out = Path(out_dir)
    files = {}
    sentinel_depth = lambda d: np.where(np.isfinite(d), d, maps.sentinel)  # noqa: E731
    layers = [("baseline_depth", sentinel_depth(maps.baseline_depth), unambiguous_range),
              ("baseline_amplitude", maps.baseline_amplitude, None)]
    for s in range(maps.k):
        layers.append((f"depth_{s + 1}", maps.depth[s], unambiguous_range))
        layers.append((f"amplitude_{s + 1}", maps.amplitude[s], None))
    layers.append(("residual", maps.residual, None))
    amp_scale = float(max(maps.amplitude.max(initial=0.0), maps.baseline_amplitude.max(initial=0.0), 1e-12))
    for name, arr, scale in layers:
        io.write_matrix_csv(out / f"{name}.csv", arr)
        full = scale if scale is not None else (amp_scale if "amplitude" in name else
                                                float(max(arr.max(initial=0.0), 1e-12)))
        io.write_pgm16(out / f"{name}.pgm", arr, full)
        files[name] = {"csv": f"{name}.csv", "pgm": f"{name}.pgm", "pgm_full_scale": full}
    meta = {
        "components": maps.k,
        "height": int(maps.shape[0]),
        "width": int(maps.shape[1]),
        "base_frequency_hz": maps.base_frequency_hz,
        "baseline_harmonic": maps.baseline_harmonic,
        "sentinel_depth_m": maps.sentinel,
        "unambiguous_range_m": unambiguous_range,
        "grid_size": int(grid_size),
        "pgm_scaling": "pixel = round(clip(value / pgm_full_scale, 0, 1) * 65535)",
        "files": files,
    }
    io.write_json(out / "maps.json", meta)
    return meta


def read_maps(map_dir) -> MapStack:
    d = Path(map_dir)
    meta = io.read_json(d / "maps.json")
    try:
        k = int(meta["components"])
        depth = np.stack([io.read_matrix_csv(d / f"depth_{s + 1}.csv") for s in range(k)])
        amp = np.stack([io.read_matrix_csv(d / f"amplitude_{s + 1}.csv") for s in range(k)])
        b_amp = io.read_matrix_csv(d / "baseline_amplitude.csv")
        b_depth = io.read_matrix_csv(d / "baseline_depth.csv")
        b_depth = np.where(b_amp > 0, b_depth, np.nan)
        residual = io.read_matrix_csv(d / "residual.csv")
        step = float(meta["unambiguous_range_m"]) / int(meta["grid_size"])
        idx = np.where(amp > 0, np.rint(depth / step).astype(int), -1)
        return MapStack(depth, amp, idx, residual, b_depth, b_amp,
                        int(meta["baseline_harmonic"]), float(meta["base_frequency_hz"]),
                        float(meta["sentinel_depth_m"]))
    except (KeyError, ValueError) as exc:
        raise InputDataError(f"map directory {d} is incomplete: {exc}") from exc


def _ensure_dir(path) -> Path:
    p = Path(path)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {p}: {exc}") from exc
    if not os.access(p, os.W_OK):
        raise ConfigError(f"output directory {p} is not writable")
    return p


def write_outputs(result: PipelineResult, config: RunConfig, out_dir) -> None:
    out = _ensure_dir(out_dir)
    maps = result.maps
    write_maps(maps, out, result.cube.plan.unambiguous_range, config.grid_size)
    hist = phase_histogram(maps, maps.baseline_harmonic, config.histogram_bins)
    io.write_histogram_csv(out / "histogram.csv", hist)
    io.write_json(out / "report.json", result.report)
    if config.debug_trace and result.solutions:
        w = maps.shape[1]
        rows = ((p % w, p // w, step) for p, sol in enumerate(result.solutions) for step in sol.trace)
        io.write_trace_csv(out / "trace.csv", rows)
    if config.figures:
        from .plotting import plot_histogram, plot_maps

        fig_dir = out / "figures"
        fig_dir.mkdir(exist_ok=True)
        plot_maps(maps, fig_dir / "maps.png")
        plot_histogram(hist, fig_dir / "histogram.png")


# --- runs -------------------------------------------------------------------

def decompose_measurements(cube: MeasurementCube, config: RunConfig, scene: Scene | None = None) -> PipelineResult:
    plan = cube.plan
    dictionary = build_dictionary(plan.harmonic_count, config.grid_size, plan.base_frequency_hz)
    solver_cfg = config.solver_config(complex_noise_std(cube.noise_sigma, plan.modulation_depth))
    log.info("decomposing %dx%d pixels, N=%d, L=%d, K=%d", cube.shape[1], cube.shape[0],
             plan.harmonic_count, config.grid_size, config.k)
    solutions = decompose_cube(cube, dictionary, solver_cfg, config.workers)
    maps = assemble_maps(solutions, dictionary, cube, config.k, config.undefined_depth_sentinel,
                         config.baseline_harmonic)
    report = build_report(maps, config, solver_cfg, dictionary, cube, scene)
    result = PipelineResult(maps, report, cube, scene, dictionary, solutions)
    if config.output_dir is not None:
        write_outputs(result, config, config.output_dir)
    return result


def run_pipeline(config: RunConfig, scene: Scene | None = None) -> PipelineResult:
    """Simulate the multi-frequency cube for a scene and decompose every pixel."""
    if scene is None:
        if config.scene_path is None:
            raise ConfigError("no scene given")
        scene = load_scene(config.scene_path)
    report = validate_scene(scene)
    if report:
        raise SceneValidationError(report)
    if config.output_dir is not None:
        _ensure_dir(config.output_dir)
    cube = measure(scene, config.plan, config.noise_sigma, config.rng_seed)
    return decompose_measurements(cube, config, scene)


# --- reproduction of the three-layer experiment ---------------------------------

_GLYPHS = {
    "M": ["X...X", "XX.XX", "X.X.X", "X...X", "X...X"],
    "I": ["XXX", ".X.", ".X.", ".X.", "XXX"],
    "T": ["XXXXX", "..X..", "..X..", "..X..", "..X.."],
}


def text_mask(text: str, height: int, width: int) -> np.ndarray:
    """Boolean mask of ``text`` drawn in a 5-row block font on a 16x12 canvas,
    resampled (nearest neighbour) to ``height`` x ``width``."""
    glyphs = [np.array([[c == "X" for c in row] for row in _GLYPHS[ch]]) for ch in text]
    gap = np.zeros((5, 1), dtype=bool)
    parts = []
    for i, g in enumerate(glyphs):
        if i:
            parts.append(gap)
        parts.append(g)
    block = np.concatenate(parts, axis=1)
    base_h, base_w = 12, 16
    canvas = np.zeros((base_h, base_w), dtype=bool)
    bh, bw = block.shape
    if bw > base_w:
        raise ConfigError(f"text {text!r} too wide for the canvas")
    y0, x0 = (base_h - bh) // 2, (base_w - bw) // 2
    canvas[y0:y0 + bh, x0:x0 + bw] = block
    ys = (np.arange(height) * base_h) // height
    xs = (np.arange(width) * base_w) // width
    return canvas[np.ix_(ys, xs)]


@dataclass(frozen=True)
class ReproductionConfig:
    """Synthetic analogue of the three-layer transparency scene.

    The middle-layer depth is a free choice (default 4.2 m). With
    ``snap_to_grid`` every depth is moved to its nearest dictionary grid
    depth so a noiseless run can be checked against exact ground truth.
    """

    width: int = 16
    height: int = 12
    near_depth: float = 0.3
    middle_depth: float = 4.2
    wall_depth: float = 8.1
    near_amplitude: float = 0.5
    middle_amplitude: float = 0.3
    wall_amplitude: float = 0.25
    text_amplitude: float = 0.08
    middle_transmission: float = 0.6
    text: str = "MIT"
    harmonics: int = 77
    base_frequency_hz: float = 0.7937e6
    modulation_depth: float = 1.0
    grid_size: int = 4096
    k: int = 3
    snr_db: float | None = None
    noise_sigma: float = 0.0
    seed: int = 0
    snap_to_grid: bool = True
    baseline_harmonic: int = 3
    histogram_bins: int = 64
    workers: int = 1
    figures: bool = True
    debug_trace: bool = False

    @property
    def plan(self) -> ModulationPlan:
        return ModulationPlan(self.base_frequency_hz, self.harmonics, self.modulation_depth)


def build_reproduction_scene(cfg: ReproductionConfig = ReproductionConfig()) -> Scene:
    h, w = cfg.height, cfg.width
    depths = [cfg.near_depth, cfg.middle_depth, cfg.wall_depth]
    if cfg.snap_to_grid:
        d = build_dictionary(cfg.harmonics, cfg.grid_size, cfg.base_frequency_hz)
        depths = [grid_index_to_depth(depth_to_nearest_grid_index(x, d), d) for x in depths]
    near, middle, wall = depths
    left = np.zeros((h, w), dtype=bool)
    left[:, : w // 2] = True
    albedo = np.where(text_mask(cfg.text, h, w), cfg.text_amplitude, cfg.wall_amplitude)
    wall_amp = np.where(left, albedo * cfg.middle_transmission, albedo)
    layers = (
        Layer.constant(near, cfg.near_amplitude, h, w),
        Layer(np.full((h, w), middle), np.where(left, cfg.middle_amplitude, 0.0)),
        Layer(np.full((h, w), wall), wall_amp),
    )
    return Scene(layers, w, h)


def reproduce_experiment(output_dir=None, cfg: ReproductionConfig = ReproductionConfig(),
                               **run_overrides) -> PipelineResult:
    """Simulate and decompose the three-layer scene (left half: three
    surfaces, right half: two), writing maps, histograms and a summary.

    ``run_overrides`` are passed through to RunConfig (e.g. ``epsilon``).
    """
    scene = build_reproduction_scene(cfg)
    plan = cfg.plan
    sigma = cfg.noise_sigma
    if cfg.snr_db is not None:
        clean = measure(scene, plan)
        sigma = bucket_sigma_for_snr(float(np.mean(np.abs(clean.values) ** 2)), cfg.snr_db,
                                     plan.modulation_depth)
    run_cfg = RunConfig(plan=plan, grid_size=cfg.grid_size, k=cfg.k, noise_sigma=sigma,
                        rng_seed=cfg.seed, output_dir=None, histogram_bins=cfg.histogram_bins,
                        baseline_harmonic=cfg.baseline_harmonic, workers=cfg.workers,
                        figures=cfg.figures, debug_trace=cfg.debug_trace, **run_overrides)
    result = run_pipeline(run_cfg, scene)
    result.report["reproduction"] = {
        "layer_depths_m": [float(layer.depth_map.flat[0]) for layer in scene.layers],
        "configured_middle_depth_m": cfg.middle_depth,
        "snr_db": cfg.snr_db,
    }
    if output_dir is not None:
        run_cfg = replace(run_cfg, output_dir=Path(output_dir))
        write_outputs(result, run_cfg, output_dir)
        save_scene(scene, Path(output_dir) / "scene.json")
    return result
