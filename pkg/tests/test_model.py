import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tofmpi.errors import ConfigError, InputDataError
from tofmpi.model import (
    Decomposition,
    Component,
    Layer,
    MeasurementCube,
    ModulationPlan,
    Scene,
    load_scene,
    save_scene,
    scene_from_dict,
    scene_to_dict,
    single_pixel_scene,
    validate_scene,
)


def kinds(scene):
    return [v.kind for v in validate_scene(scene)]


def test_minimal_scene_is_valid():
    assert validate_scene(single_pixel_scene([1.0], [0.5])) == []


def test_amplitude_out_of_range():
    assert kinds(single_pixel_scene([1.0], [1.5])) == ["amplitude out of range"]


def test_depths_not_increasing():
    assert kinds(single_pixel_scene([2.0, 1.0], [0.5, 0.5])) == ["depths not increasing"]


def test_absent_layer_depth_is_ignored():
    # a zero-amplitude layer may carry any depth, even one out of order
    assert validate_scene(single_pixel_scene([2.0, 1.0, 3.0], [0.5, 0.0, 0.2])) == []


def test_negative_depth_reported():
    assert kinds(single_pixel_scene([-1.0], [0.5])) == ["depth invalid"]


def test_shape_mismatch():
    s = Scene((Layer(np.zeros((2, 3)), np.zeros((2, 3))),), width=2, height=2)
    assert kinds(s) == ["shape mismatch"]


def test_violation_carries_pixel():
    d = np.array([[1.0, 1.0], [1.0, 1.0]])
    a = np.array([[0.5, 0.5], [0.5, 2.0]])
    (v,) = validate_scene(Scene((Layer(d, a),), 2, 2))
    assert v.pixel == (1, 1) and v.layer == 0


def test_layer_is_read_only_and_value_equal():
    a = Layer.constant(1.0, 0.5, 2, 2)
    b = Layer(np.ones((2, 2)), np.full((2, 2), 0.5))
    assert a == b
    with pytest.raises(ValueError):
        a.depth_map[0, 0] = 3.0


@pytest.mark.parametrize("kwargs", [
    dict(base_frequency_hz=0.0, harmonic_count=3),
    dict(base_frequency_hz=1e6, harmonic_count=0),
    dict(base_frequency_hz=1e6, harmonic_count=3, modulation_depth=1.5),
    dict(base_frequency_hz=1e6, harmonic_count=3, bucket_count=8),
    dict(base_frequency_hz=1e6, harmonic_count=3, dc_offset=-1.0),
])
def test_plan_rejects_bad_values(kwargs):
    with pytest.raises(ConfigError):
        ModulationPlan(**kwargs)


def test_plan_bucket_offsets_and_round_trip():
    p = ModulationPlan(1e6, 5, 0.8, dc_offset=0.3)
    assert np.allclose(p.bucket_offsets, [0, np.pi / 2, np.pi, 3 * np.pi / 2])
    assert list(p.harmonics) == [1, 2, 3, 4, 5]
    assert ModulationPlan.from_dict(json.loads(json.dumps(p.to_dict()))) == p


def test_cube_shape_checked():
    with pytest.raises(InputDataError):
        MeasurementCube(np.zeros((2, 2, 4), complex), ModulationPlan(1e6, 5))


def test_decomposition_sorted_by_depth():
    d = Decomposition((Component(5.0, 0.1, 9), Component(1.0, 0.4, 2)), 0.0)
    assert [c.depth for c in d.components] == [1.0, 5.0]


grids = st.integers(1, 4).flatmap(lambda h: st.integers(1, 4).flatmap(lambda w: st.tuples(
    st.just(h), st.just(w),
    st.lists(st.tuples(
        st.lists(st.floats(0, 200, allow_nan=False), min_size=h * w, max_size=h * w),
        st.lists(st.floats(0, 1, allow_nan=False), min_size=h * w, max_size=h * w),
    ), min_size=0, max_size=3),
)))


@given(grids)
def test_scene_round_trip_exact(data):
    h, w, raw = data
    layers = tuple(Layer(np.reshape(d, (h, w)), np.reshape(a, (h, w))) for d, a in raw)
    s = Scene(layers, w, h)
    back = scene_from_dict(json.loads(json.dumps(scene_to_dict(s))))
    assert back == s


def test_scene_file_round_trip(tmp_path):
    s = Scene((Layer.constant(0.3, 0.5, 2, 3), Layer(np.arange(6.0).reshape(2, 3) + 1, np.full((2, 3), 0.25))), 3, 2)
    save_scene(s, tmp_path / "s.json")
    assert load_scene(tmp_path / "s.json") == s


def test_scene_flat_arrays_accepted():
    s = scene_from_dict({"width": 2, "height": 1, "layers": [{"depth": [1.0, 2.0], "amplitude": 0.5}]})
    assert s.layers[0].depth_map.tolist() == [[1.0, 2.0]]


@pytest.mark.parametrize("payload", [
    {"width": 2},
    {"width": 2, "height": 1, "layers": [{"depth": [1.0, 2.0, 3.0], "amplitude": 0.5}]},
    {"width": 2, "height": 1, "layers": [{"depth": 1.0}]},
])
def test_scene_malformed(payload):
    with pytest.raises(InputDataError):
        scene_from_dict(payload)


def test_load_scene_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(InputDataError):
        load_scene(p)
