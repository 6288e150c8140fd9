"""Domain types shared by the simulator, dictionary, solver and pipeline.

Units: depths in meters, frequencies in hertz, amplitudes dimensionless.
Phases and delays are always derived from depths, never stored.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, InputDataError

SPEED_OF_LIGHT = 299_792_458.0  # m/s


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Layer:
    """One reflecting surface: per-pixel depth and amplitude grids.

    An amplitude of 0 marks the layer as absent at that pixel; the depth
    stored there is ignored.
    """

    depth_map: np.ndarray
    amplitude_map: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "depth_map", _frozen(self.depth_map))
        object.__setattr__(self, "amplitude_map", _frozen(self.amplitude_map))

    @classmethod
    def constant(cls, depth: float, amplitude: float, height: int, width: int) -> "Layer":
        return cls(np.full((height, width), float(depth)), np.full((height, width), float(amplitude)))

    @property
    def shape(self):
        return self.depth_map.shape

    def __eq__(self, other):
        if not isinstance(other, Layer):
            return NotImplemented
        return np.array_equal(self.depth_map, other.depth_map) and np.array_equal(
            self.amplitude_map, other.amplitude_map
        )

    __hash__ = None


@dataclass(frozen=True)
class Scene:
    """Stack of layers, index 0 nearest to the camera."""

    layers: tuple[Layer, ...]
    width: int
    height: int

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def shape(self):
        return (self.height, self.width)

    def _stack(self, attr: str) -> np.ndarray:
        # layers are immutable, so the stacked view is computed once
        cache = self.__dict__.setdefault("_stacks", {})
        if attr not in cache:
            if self.layers:
                arr = np.stack([getattr(layer, attr) for layer in self.layers])
            else:
                arr = np.zeros((0, self.height, self.width))
            arr.setflags(write=False)
            cache[attr] = arr
        return cache[attr]

    def depths(self) -> np.ndarray:
        """(layers, height, width) depth stack, read-only."""
        return self._stack("depth_map")

    def amplitudes(self) -> np.ndarray:
        return self._stack("amplitude_map")


@dataclass(frozen=True)
class ModulationPlan:
    """Equi-spaced harmonic modulation plan; harmonic n runs at n * base_frequency_hz.

    ``dc_offset`` None means C0 equals the sum of the component amplitudes at
    each pixel; a number forces that constant everywhere.
    """

    base_frequency_hz: float
    harmonic_count: int
    modulation_depth: float = 1.0
    bucket_count: int = 4
    dc_offset: float | None = None

    def __post_init__(self):
        if not (self.base_frequency_hz > 0 and math.isfinite(self.base_frequency_hz)):
            raise ConfigError(f"base frequency must be positive, got {self.base_frequency_hz}")
        if int(self.harmonic_count) != self.harmonic_count or self.harmonic_count < 1:
            raise ConfigError(f"harmonic count must be a positive integer, got {self.harmonic_count}")
        if not 0 < self.modulation_depth <= 1:
            raise ConfigError(f"modulation depth must lie in (0, 1], got {self.modulation_depth}")
        if self.bucket_count != 4:
            raise ConfigError(f"only 4-bucket sampling is supported, got {self.bucket_count}")
        if self.dc_offset is not None and not self.dc_offset >= 0:
            raise ConfigError(f"dc offset must be >= 0, got {self.dc_offset}")

    @cached_property
    def harmonics(self) -> np.ndarray:
        h = np.arange(1, self.harmonic_count + 1)
        h.setflags(write=False)
        return h

    def angular_frequency(self, n: int = 1) -> float:
        return 2.0 * math.pi * self.base_frequency_hz * n

    @cached_property
    def bucket_offsets(self) -> np.ndarray:
        """omega * tau_q for q = 0..3, i.e. tau_q = pi q / (2 omega)."""
        off = np.pi * np.arange(self.bucket_count) / 2.0
        off.setflags(write=False)
        return off

    @property
    def unambiguous_range(self) -> float:
        return SPEED_OF_LIGHT / (2.0 * self.base_frequency_hz)

    def to_dict(self) -> dict:
        return {
            "base_frequency_hz": self.base_frequency_hz,
            "harmonic_count": self.harmonic_count,
            "modulation_depth": self.modulation_depth,
            "bucket_count": self.bucket_count,
            "dc_offset": self.dc_offset,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModulationPlan":
        return cls(
            base_frequency_hz=float(d["base_frequency_hz"]),
            harmonic_count=int(d["harmonic_count"]),
            modulation_depth=float(d.get("modulation_depth", 1.0)),
            bucket_count=int(d.get("bucket_count", 4)),
            dc_offset=None if d.get("dc_offset") is None else float(d["dc_offset"]),
        )


@dataclass(frozen=True, eq=False)
class MeasurementCube:
    """Complex pixel values z with shape (height, width, harmonic_count)."""

    values: np.ndarray
    plan: ModulationPlan
    noise_sigma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, complex))
        if self.values.ndim != 3 or self.values.shape[2] != self.plan.harmonic_count:
            raise InputDataError(
                f"cube shape {self.values.shape} does not match (h, w, {self.plan.harmonic_count})"
            )

    @property
    def shape(self):
        return self.values.shape

    @property
    def complex_noise_std(self) -> float:
        """Std of the noise on Re(z) (equally Im(z)) implied by the bucket-level sigma."""
        return math.sqrt(2.0) * self.noise_sigma / self.plan.modulation_depth**2

    def __eq__(self, other):
        if not isinstance(other, MeasurementCube):
            return NotImplemented
        return (
            self.plan == other.plan
            and self.noise_sigma == other.noise_sigma
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


@dataclass(frozen=True)
class Component:
    depth: float
    amplitude: float
    grid_index: int


@dataclass(frozen=True)
class Decomposition:
    """Per-pixel result: components sorted by ascending depth."""

    components: tuple[Component, ...]
    residual_norm: float
    stop_reason: str = ""
    phase_warning: bool = False

    def __post_init__(self):
        comps = tuple(sorted(self.components, key=lambda c: (c.depth, c.grid_index)))
        object.__setattr__(self, "components", comps)


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    layer: int | None = None
    pixel: tuple[int, int] | None = field(default=None)

    def __str__(self):
        return f"{self.kind}: {self.message}"


def validate_scene(scene: Scene) -> list[Violation]:
    """Return every invariant the scene breaks; an empty list means valid."""
    out: list[Violation] = []
    shape = (scene.height, scene.width)
    if scene.width < 1 or scene.height < 1:
        out.append(Violation("shape mismatch", f"scene size {scene.width}x{scene.height} is empty"))
        return out
    for i, layer in enumerate(scene.layers):
        if layer.depth_map.shape != shape or layer.amplitude_map.shape != shape:
            out.append(
                Violation(
                    "shape mismatch",
                    f"layer {i} has depth {layer.depth_map.shape} / amplitude "
                    f"{layer.amplitude_map.shape}, scene is {shape}",
                    layer=i,
                )
            )
    if out:
        return out

    for i, layer in enumerate(scene.layers):
        a, d = layer.amplitude_map, layer.depth_map
        bad = ~((a >= 0) & (a <= 1))
        if bad.any():
            y, x = np.argwhere(bad)[0]
            out.append(
                Violation(
                    "amplitude out of range",
                    f"layer {i} amplitude {a[y, x]!r} at (x={x}, y={y}) not in [0, 1] "
                    f"({int(bad.sum())} pixels)",
                    layer=i,
                    pixel=(int(x), int(y)),
                )
            )
        present = a > 0
        badd = present & ~(np.isfinite(d) & (d >= 0))
        if badd.any():
            y, x = np.argwhere(badd)[0]
            out.append(
                Violation(
                    "depth invalid",
                    f"layer {i} depth {d[y, x]!r} at (x={x}, y={y}) must be finite and >= 0",
                    layer=i,
                    pixel=(int(x), int(y)),
                )
            )

    if len(scene.layers) > 1:
        amps = scene.amplitudes()
        deps = scene.depths()
        last = np.full(shape, -np.inf)
        for i in range(len(scene.layers)):
            present = amps[i] > 0
            with np.errstate(invalid="ignore"):
                bad = present & ~(deps[i] > last)
            if bad.any():
                y, x = np.argwhere(bad)[0]
                out.append(
                    Violation(
                        "depths not increasing",
                        f"layer {i} depth {deps[i][y, x]!r} at (x={x}, y={y}) is not beyond "
                        f"the nearer layer's {last[y, x]!r}",
                        layer=i,
                        pixel=(int(x), int(y)),
                    )
                )
            last = np.where(present, deps[i], last)
    return out


# ---------------------------------------------------------------------------
# scene file (JSON)


def _grid_from_json(value, height, width, what):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return np.full((height, width), float(value))
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 1 and arr.size == height * width:
        return arr.reshape(height, width)
    if arr.shape == (height, width):
        return arr
    raise InputDataError(f"{what}: expected a scalar, {height}x{width} rows, or {height * width} values")


def _grid_to_json(arr: np.ndarray):
    if arr.size and np.all(arr == arr.flat[0]):
        return float(arr.flat[0])
    return arr.tolist()


def scene_to_dict(scene: Scene) -> dict:
    return {
        "width": scene.width,
        "height": scene.height,
        "layers": [
            {"depth": _grid_to_json(layer.depth_map), "amplitude": _grid_to_json(layer.amplitude_map)}
            for layer in scene.layers
        ],
    }


def scene_from_dict(d: dict) -> Scene:
    try:
        width, height = int(d["width"]), int(d["height"])
        raw_layers = d["layers"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputDataError(f"scene needs integer width, height and a layers list ({exc})") from exc
    layers = []
    for i, entry in enumerate(raw_layers):
        try:
            depth, amp = entry["depth"], entry["amplitude"]
        except (KeyError, TypeError) as exc:
            raise InputDataError(f"layer {i} needs 'depth' and 'amplitude'") from exc
        layers.append(
            Layer(
                _grid_from_json(depth, height, width, f"layer {i} depth"),
                _grid_from_json(amp, height, width, f"layer {i} amplitude"),
            )
        )
    return Scene(tuple(layers), width, height)


def save_scene(scene: Scene, path) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=1) + "\n")


def load_scene(path) -> Scene:
    try:
        d = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputDataError(f"cannot read scene {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputDataError(f"scene {path} is not valid JSON: {exc}") from exc
    return scene_from_dict(d)


def single_pixel_scene(depths: Sequence[float], amplitudes: Sequence[float]) -> Scene:
    """1x1 scene, handy for tests and examples."""
    return Scene(tuple(Layer.constant(d, a, 1, 1) for d, a in zip(depths, amplitudes)), 1, 1)
