"""Homodyne AMCW sensor model: correlation buckets, 4-bucket demodulation,
complex pixel values and the single-frequency depth baseline.

Noise is added to the bucket samples, not to z. Pixel noise streams are
seeded independently with ``np.random.default_rng([seed, y * width + x])`` so
results do not depend on the order pixels are processed in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DomainError, SceneValidationError
from .model import SPEED_OF_LIGHT, MeasurementCube, ModulationPlan, Scene, validate_scene

TWO_PI = 2.0 * math.pi


def phase_of_depth(d, omega):
    """Round-trip phase delay 2*d*omega/c in radians (not wrapped)."""
    d_arr = np.asarray(d, dtype=float)
    if np.any(~(d_arr >= 0)):
        raise DomainError(f"depth must be >= 0, got {d}")
    if not omega > 0:
        raise DomainError(f"angular frequency must be positive, got {omega}")
    out = 2.0 * d_arr * omega / SPEED_OF_LIGHT
    return float(out) if out.ndim == 0 else out


def pixel_rng(seed: int, pixel_index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(pixel_index)])


@dataclass(frozen=True, eq=False)
class BucketSamples:
    """Correlation samples m[q], shape (height, width, harmonic_count, 4)."""

    values: np.ndarray
    plan: ModulationPlan
    noise_sigma: float = 0.0


def _component_phases(scene: Scene, plan: ModulationPlan) -> np.ndarray:
    # (layers, h, w, N); absent layers may carry junk depths, zeroed here
    deps = np.where(scene.amplitudes() > 0, scene.depths(), 0.0)
    base = deps * (2.0 * plan.angular_frequency(1) / SPEED_OF_LIGHT)
    return np.mod(base[..., None] * plan.harmonics, TWO_PI)


def simulate_buckets(scene: Scene, plan: ModulationPlan, noise_sigma: float = 0.0, rng_seed: int = 0) -> BucketSamples:
    """Sample the cross-correlation at the four quarter-period offsets.

    m[q] = C0 + (s0^2 / 2) * sum_k G_k cos(q pi/2 + phi_k(n w0)), plus
    i.i.d. Gaussian noise of std ``noise_sigma`` on every sample.
    """
    report = validate_scene(scene)
    if report:
        raise SceneValidationError(report)
    if not noise_sigma >= 0:
        raise ConfigError(f"noise sigma must be >= 0, got {noise_sigma}")

    h, w, n_harm = scene.height, scene.width, plan.harmonic_count
    amps = scene.amplitudes()  # (layers, h, w)
    offsets = plan.bucket_offsets  # (4,)
    half_s0sq = 0.5 * plan.modulation_depth**2

    if len(scene.layers):
        phases = _component_phases(scene, plan)  # (layers, h, w, N)
        arg = offsets[None, None, None, None, :] + phases[..., None]
        ac = np.sum(amps[..., None, None] * np.cos(arg), axis=0)  # (h, w, N, 4)
        c0 = amps.sum(axis=0)
    else:
        ac = np.zeros((h, w, n_harm, 4))
        c0 = np.zeros((h, w))
    if plan.dc_offset is not None:
        c0 = np.full((h, w), plan.dc_offset)
    samples = c0[:, :, None, None] + half_s0sq * ac

    if noise_sigma > 0:
        noise = np.empty_like(samples)
        for y in range(h):
            for x in range(w):
                noise[y, x] = pixel_rng(rng_seed, y * w + x).normal(0.0, noise_sigma, size=(n_harm, 4))
        samples = samples + noise
    return BucketSamples(samples, plan, float(noise_sigma))


class BucketEstimate(NamedTuple):
    amplitude: np.ndarray | float
    phase: np.ndarray | float
    degenerate: np.ndarray | bool


def four_bucket_estimate(samples, s0: float) -> BucketEstimate:
    """Closed-form amplitude/phase from four quarter-period samples.

    Works on a trailing axis of length 4. Phase comes from the two-argument
    arctangent, wrapped into [0, 2pi). When both differences vanish the
    estimate is flagged degenerate with amplitude 0 and phase 0.
    """
    m = np.asarray(samples, dtype=float)
    if m.shape[-1] != 4:
        raise ConfigError(f"expected 4 bucket samples, got trailing size {m.shape[-1]}")
    if not s0 > 0:
        raise ConfigError(f"modulation depth must be positive, got {s0}")
    quad = m[..., 3] - m[..., 1]
    inphase = m[..., 0] - m[..., 2]
    degenerate = (quad == 0) & (inphase == 0)
    amp = np.hypot(quad, inphase) / s0**2
    phase = np.mod(np.arctan2(quad, inphase), TWO_PI)
    # mod can return 2pi for tiny negative inputs
    phase = np.where(phase >= TWO_PI, 0.0, phase)
    phase = np.where(degenerate, 0.0, phase)
    if m.ndim == 1:
        return BucketEstimate(float(amp), float(phase), bool(degenerate))
    return BucketEstimate(amp, phase, degenerate)


def measure(scene: Scene, plan: ModulationPlan, noise_sigma: float = 0.0, rng_seed: int = 0) -> MeasurementCube:
    buckets = simulate_buckets(scene, plan, noise_sigma, rng_seed)
    est = four_bucket_estimate(buckets.values, plan.modulation_depth)
    z = np.where(est.degenerate, 0.0, est.amplitude * np.exp(1j * est.phase))
    return MeasurementCube(z, plan, float(noise_sigma))


def single_frequency_depth(z, omega):
    """Depth c*arg(z)/(2*omega) with arg wrapped to [0, 2pi).

    This is the multipath-corrupted single-frequency reading. ``z == 0``
    yields NaN ("no signal").
    """
    if not omega > 0:
        raise DomainError(f"angular frequency must be positive, got {omega}")
    z_arr = np.asarray(z, dtype=complex)
    phase = np.mod(np.angle(z_arr), TWO_PI)
    phase = np.where(phase >= TWO_PI, 0.0, phase)
    d = np.where(z_arr == 0, np.nan, SPEED_OF_LIGHT * phase / (2.0 * omega))
    return float(d) if d.ndim == 0 else d


def complex_noise_std(noise_sigma: float, s0: float) -> float:
    """Per-component (real or imaginary) std of z noise for bucket-level sigma.

    Re(z) = (m[0] - m[2]) / s0^2 exactly, so the std is sqrt(2) sigma / s0^2.
    """
    return math.sqrt(2.0) * noise_sigma / s0**2


def bucket_sigma_for_snr(mean_power: float, snr_db: float, s0: float) -> float:
    """Bucket-level sigma giving 10 log10(mean|z|^2 / E|n_z|^2) = snr_db."""
    if not mean_power >= 0:
        raise ConfigError("mean power must be >= 0")
    noise_power = mean_power * 10.0 ** (-snr_db / 10.0)  # E|n_z|^2 = 2 sigma_z^2
    sigma_z = math.sqrt(noise_power / 2.0)
    return sigma_z * s0**2 / math.sqrt(2.0)
