import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import C, bucket_samples, phasor_sum
from tofmpi.errors import ConfigError, DomainError, SceneValidationError
from tofmpi.model import Layer, ModulationPlan, Scene, single_pixel_scene
from tofmpi.sensor import (
    bucket_sigma_for_snr,
    complex_noise_std,
    four_bucket_estimate,
    measure,
    phase_of_depth,
    simulate_buckets,
    single_frequency_depth,
)

F0 = 0.7937e6
W0 = 2 * math.pi * F0


def test_phase_of_depth_examples():
    assert phase_of_depth(0.0, 1e7) == 0.0
    assert phase_of_depth(math.pi * C / (2 * 1e7), 1e7) == pytest.approx(math.pi, abs=1e-15)
    # 4 pi f d / c evaluated directly
    assert phase_of_depth(8.1, W0) == pytest.approx(4 * math.pi * F0 * 8.1 / C, rel=1e-15)
    assert phase_of_depth(8.1, W0) == pytest.approx(0.2695, abs=5e-5)


def test_phase_of_depth_domain():
    with pytest.raises(DomainError):
        phase_of_depth(-0.1, 1e7)
    with pytest.raises(DomainError):
        phase_of_depth(1.0, 0.0)


def test_buckets_single_layer_zero_phase():
    plan = ModulationPlan(1e6, 1, 1.0, dc_offset=1.0)
    m = simulate_buckets(single_pixel_scene([0.0], [1.0]), plan).values[0, 0, 0]
    assert np.allclose(m, [1.5, 1.0, 0.5, 1.0], atol=1e-15)


def test_buckets_default_dc_is_amplitude_sum():
    plan = ModulationPlan(1e6, 1)
    m = simulate_buckets(single_pixel_scene([0.0], [1.0]), plan).values[0, 0, 0]
    assert np.allclose(m, [1.5, 1.0, 0.5, 1.0], atol=1e-15)


def test_buckets_zero_amplitude_scene_is_flat():
    plan = ModulationPlan(1e6, 3, dc_offset=0.4)
    m = simulate_buckets(single_pixel_scene([1.0, 2.0], [0.0, 0.0]), plan).values
    assert np.all(m == 0.4)


def test_buckets_match_direct_summation():
    plan = ModulationPlan(10e6, 1)
    m = simulate_buckets(single_pixel_scene([1.0, 3.0], [0.6, 0.3]), plan).values[0, 0, 0]
    assert np.allclose(m, bucket_samples([1.0, 3.0], [0.6, 0.3], 10e6, 1), atol=1e-12)


def test_buckets_reject_invalid_scene():
    with pytest.raises(SceneValidationError) as info:
        simulate_buckets(single_pixel_scene([1.0], [1.5]), ModulationPlan(1e6, 1))
    assert info.value.violations[0].kind == "amplitude out of range"


def test_four_bucket_examples():
    amp, ph, deg = four_bucket_estimate([1.5, 1.0, 0.5, 1.0], 1.0)
    assert (amp, ph, deg) == (1.0, 0.0, False)
    amp, ph, deg = four_bucket_estimate([0.7] * 4, 1.0)
    assert (amp, ph, deg) == (0.0, 0.0, True)


def test_four_bucket_rejects_bad_input():
    with pytest.raises(ConfigError):
        four_bucket_estimate([1.0, 2.0, 3.0], 1.0)
    with pytest.raises(ConfigError):
        four_bucket_estimate([1.0, 2.0, 3.0, 4.0], 0.0)


@given(st.floats(1e-3, 1.0), st.floats(0, 2 * math.pi, exclude_max=True), st.floats(0.05, 1.0))
def test_bucket_round_trip(gamma, phi, s0):
    m = [gamma + 0.5 * s0**2 * gamma * math.cos(q * math.pi / 2 + phi) for q in range(4)]
    amp, ph, _ = four_bucket_estimate(m, s0)
    assert abs(amp - gamma) <= 1e-9
    dphi = (ph - phi + math.pi) % (2 * math.pi) - math.pi
    assert abs(dphi) <= 1e-9


def test_measure_zero_phase_layer():
    cube = measure(single_pixel_scene([0.0], [0.7]), ModulationPlan(F0, 5))
    assert np.allclose(cube.values, 0.7, atol=1e-15)


def test_measure_phasor_cancellation():
    # phases differ by pi at harmonic 1
    d = C / (4 * 1e6)
    cube = measure(single_pixel_scene([1.0, 1.0 + d], [0.5, 0.5]), ModulationPlan(1e6, 2))
    assert abs(cube.values[0, 0, 0]) <= 1e-12


def test_measure_three_layers_matches_phasor_sum():
    depths, amps = [0.3, 4.2, 8.1], [0.5, 0.3, 0.15]
    cube = measure(single_pixel_scene(depths, amps), ModulationPlan(F0, 77))
    ref = np.array([phasor_sum(depths, amps, F0, n) for n in range(1, 78)])
    assert np.max(np.abs(cube.values[0, 0] - ref)) <= 1e-9


def test_single_layer_unit_modulus():
    cube = measure(single_pixel_scene([12.3], [0.42]), ModulationPlan(F0, 77, 0.6))
    assert np.allclose(np.abs(cube.values), 0.42, atol=1e-12)


def test_single_frequency_depth_examples():
    assert single_frequency_depth(np.exp(1j * 0.2695), W0) == pytest.approx(8.1, abs=1e-3)
    assert single_frequency_depth(2.5 + 0j, W0) == 0.0
    assert math.isnan(single_frequency_depth(0j, W0))
    with pytest.raises(DomainError):
        single_frequency_depth(1.0, -1.0)


def test_mixed_pixel_depth_is_not_either_layer():
    z = phasor_sum([0.3, 8.1], [0.5, 0.5], F0, 1)
    d = single_frequency_depth(z, W0)
    assert abs(d - 0.3) > 0.1 and abs(d - 8.1) > 0.1


depth_lists = st.lists(st.floats(0, 150), min_size=1, max_size=3, unique=True).map(sorted)


@given(depth_lists, st.data())
def test_linearity_in_components(depths, data):
    amps = data.draw(st.lists(st.floats(0.01, 1), min_size=len(depths), max_size=len(depths)))
    plan = ModulationPlan(F0, 9)
    whole = measure(single_pixel_scene(depths, amps), plan).values
    parts = sum(measure(single_pixel_scene([d], [a]), plan).values for d, a in zip(depths, amps))
    assert np.max(np.abs(whole - parts)) <= 1e-9


@given(st.floats(0, 180), st.floats(0.05, 1))
def test_harmonic_phase_structure(d, a):
    z = measure(single_pixel_scene([d], [a]), ModulationPlan(F0, 12)).values[0, 0]
    n = np.arange(1, 13)
    diff = np.angle(z * np.exp(-1j * n * np.angle(z[0])))
    assert np.max(np.abs(diff)) <= 1e-8


def test_noise_std_scales_linearly():
    trials = 10_000
    scene = Scene((Layer.constant(2.0, 0.5, 100, 100),), 100, 100)
    plan = ModulationPlan(F0, 1, 0.8)
    clean = measure(scene, plan).values
    stds = []
    for sigma in (0.01, 0.04):
        z = measure(scene, plan, sigma, rng_seed=5).values
        stds.append(np.std((z - clean).real))
        assert z.size == trials
        assert stds[-1] == pytest.approx(complex_noise_std(sigma, 0.8), rel=0.1)
    assert stds[1] / stds[0] == pytest.approx(4.0, rel=0.1)


def test_noise_is_deterministic_and_order_free():
    scene = Scene((Layer.constant(2.0, 0.5, 3, 4),), 4, 3)
    plan = ModulationPlan(F0, 4)
    a = simulate_buckets(scene, plan, 0.1, rng_seed=9).values
    b = simulate_buckets(scene, plan, 0.1, rng_seed=9).values
    c = simulate_buckets(scene, plan, 0.1, rng_seed=10).values
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    # pixel (x=2, y=1) draws from sub-seed [seed, y*width + x]
    ref = np.random.default_rng([9, 1 * 4 + 2]).normal(0.0, 0.1, size=(4, 4))
    clean = simulate_buckets(scene, plan).values
    assert np.allclose(a[1, 2] - clean[1, 2], ref, atol=1e-15)


def test_snr_helper_inverts():
    s0 = 0.7
    sigma = bucket_sigma_for_snr(0.25, 40.0, s0)
    sz = complex_noise_std(sigma, s0)
    assert 10 * math.log10(0.25 / (2 * sz**2)) == pytest.approx(40.0, abs=1e-12)
