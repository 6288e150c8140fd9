import json

import numpy as np
import pytest

from tofmpi import io
from tofmpi.errors import InputDataError
from tofmpi.model import MeasurementCube, ModulationPlan


def make_cube():
    rng = np.random.default_rng(0)
    v = rng.normal(size=(2, 3, 4)) + 1j * rng.normal(size=(2, 3, 4))
    return MeasurementCube(v, ModulationPlan(1e6, 4, 0.9), 0.02)


def test_cube_round_trip(tmp_path):
    cube = make_cube()
    io.write_cube(cube, tmp_path / "c.csv")
    assert io.read_cube(tmp_path / "c.csv") == cube
    head = (tmp_path / "c.csv").read_text().splitlines()[:2]
    assert head[0] == "pixel_x,pixel_y,harmonic,re,im"
    assert head[1].startswith("0,0,1,")
    meta = json.loads((tmp_path / "c.json").read_text())
    assert meta["plan"]["harmonic_count"] == 4 and meta["noise_sigma"] == 0.02


def test_cube_missing_entries(tmp_path):
    io.write_cube(make_cube(), tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    (tmp_path / "c.csv").write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(InputDataError, match="missing"):
        io.read_cube(tmp_path / "c.csv")


def test_cube_bad_header(tmp_path):
    io.write_cube(make_cube(), tmp_path / "c.csv")
    text = (tmp_path / "c.csv").read_text().replace("pixel_x", "px", 1)
    (tmp_path / "c.csv").write_text(text)
    with pytest.raises(InputDataError):
        io.read_cube(tmp_path / "c.csv")


def test_cube_missing_sidecar(tmp_path):
    io.write_cube(make_cube(), tmp_path / "c.csv")
    (tmp_path / "c.json").unlink()
    with pytest.raises(InputDataError):
        io.read_cube(tmp_path / "c.csv")


def test_matrix_csv_exact(tmp_path):
    a = np.array([[0.1, 1 / 3], [np.pi, 1e-300]])
    io.write_matrix_csv(tmp_path / "m.csv", a)
    assert np.array_equal(io.read_matrix_csv(tmp_path / "m.csv"), a)


def test_pgm_scaling(tmp_path):
    a = np.array([[0.0, 0.5, 1.0], [2.0, -1.0, np.nan]])
    io.write_pgm16(tmp_path / "m.pgm", a, 1.0)
    q = io.read_pgm16(tmp_path / "m.pgm")
    assert q.tolist() == [[0, 32768, 65535], [65535, 0, 0]]
