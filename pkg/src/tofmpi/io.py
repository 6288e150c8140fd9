"""File formats: cube CSV + JSON sidecar, map CSVs, 16-bit PGM previews,
histogram and solver-trace CSVs.

CSV floats are written with ``repr`` so they round-trip exactly and two runs
with the same inputs produce identical bytes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import InputDataError
from .model import MeasurementCube, ModulationPlan

CUBE_HEADER = ["pixel_x", "pixel_y", "harmonic", "re", "im"]


def _fmt(x: float) -> str:
    return repr(float(x))


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_suffix(".json")


def write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputDataError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputDataError(f"{path} is not valid JSON: {exc}") from exc


# --- cube -------------------------------------------------------------------

def write_cube(cube: MeasurementCube, path) -> None:
    h, w, n = cube.shape
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(CUBE_HEADER)
        for y in range(h):
            for x in range(w):
                for k in range(n):
                    v = cube.values[y, x, k]
                    out.writerow([x, y, k + 1, _fmt(v.real), _fmt(v.imag)])
    write_json(sidecar_path(path), {
        "width": w,
        "height": h,
        "plan": cube.plan.to_dict(),
        "noise_sigma": cube.noise_sigma,
    })


def read_cube(path) -> MeasurementCube:
    meta = read_json(sidecar_path(path))
    try:
        plan = ModulationPlan.from_dict(meta["plan"])
        w, h = int(meta["width"]), int(meta["height"])
        sigma = float(meta.get("noise_sigma", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputDataError(f"cube sidecar {sidecar_path(path)} is malformed: {exc}") from exc
    values = np.full((h, w, plan.harmonic_count), np.nan, dtype=complex)
    try:
        with open(path, newline="") as fh:
            rows = csv.reader(fh)
            header = next(rows)
            if [c.strip() for c in header] != CUBE_HEADER:
                raise InputDataError(f"cube header {header} != {CUBE_HEADER}")
            for row in rows:
                if not row:
                    continue
                x, y, n = int(row[0]), int(row[1]), int(row[2])
                values[y, x, n - 1] = complex(float(row[3]), float(row[4]))
    except OSError as exc:
        raise InputDataError(f"cannot read cube {path}: {exc}") from exc
    except (ValueError, IndexError) as exc:
        raise InputDataError(f"malformed cube row in {path}: {exc}") from exc
    if np.isnan(values).any():
        raise InputDataError(f"cube {path} is missing entries for some (pixel, harmonic)")
    return MeasurementCube(values, plan, sigma)


# --- maps -------------------------------------------------------------------

def write_matrix_csv(path, arr) -> None:
    arr = np.asarray(arr, dtype=float)
    with open(path, "w", newline="") as fh:
        for row in arr:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    try:
        rows = [line.strip() for line in Path(path).read_text().splitlines() if line.strip()]
        return np.array([[float(v) for v in r.split(",")] for r in rows])
    except OSError as exc:
        raise InputDataError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise InputDataError(f"malformed matrix CSV {path}: {exc}") from exc


def write_pgm16(path, arr, full_scale: float) -> None:
    """Binary 16-bit PGM; pixel = round(clip(value / full_scale, 0, 1) * 65535)."""
    a = np.nan_to_num(np.asarray(arr, dtype=float), nan=0.0)
    q = np.round(np.clip(a / full_scale, 0.0, 1.0) * 65535).astype(">u2")
    h, w = q.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(q.tobytes())


def read_pgm16(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise InputDataError(f"{path} is not a binary PGM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 65535:
        raise InputDataError(f"{path}: expected 16-bit PGM, maxval {maxval}")
    return np.frombuffer(parts[4][: 2 * w * h], dtype=">u2").reshape(h, w)


# --- tables -----------------------------------------------------------------

def write_histogram_csv(path, table) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["series", "bin_center", "count"])
        for name, counts in table.counts.items():
            for c, n in zip(table.centers, counts):
                out.writerow([name, _fmt(c), int(n)])


def write_trace_csv(path, rows) -> None:
    """rows: iterable of (x, y, TraceStep)."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["pixel_x", "pixel_y", "iteration", "action", "index", "replaced", "residual_norm"])
        for x, y, step in rows:
            out.writerow([x, y, step.iteration, step.action, step.index,
                          " ".join(str(i) for i in step.replaced), _fmt(step.residual_norm)])
