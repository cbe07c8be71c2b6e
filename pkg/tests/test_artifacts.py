"""
Tests for CSV, JSON-lines and SVG artifact writers
"""
import io
import json

import numpy as np
import pytest

from src.core.config import FlowConfig
from src.reeb_engine import flow, soliton_ode
from src.storage import artifacts
from src.storage.artifacts import ArtifactWriter

pytestmark = pytest.mark.unit


@pytest.fixture(scope="module")
def trajectory():
    from src.reeb_engine.quadrature import WeightedSphereLink
    return flow.run_flow(WeightedSphereLink.build(1), (0.5, 1.5), FlowConfig(t_max=0.2))


def test_csv_is_byte_identical(tmp_path, trajectory):
    first = artifacts.write_csv(artifacts.trajectory_frame(trajectory), tmp_path / "a.csv")
    second = artifacts.write_csv(artifacts.trajectory_frame(trajectory), tmp_path / "b.csv")
    assert first.read_bytes() == second.read_bytes()
    assert b"\r\n" not in first.read_bytes()


def test_csv_round_trips_floats(tmp_path, trajectory):
    path = artifacts.write_csv(artifacts.trajectory_frame(trajectory), tmp_path / "t.csv")
    frame = artifacts.read_csv(path)
    np.testing.assert_array_equal(frame["volume"].to_numpy(), trajectory.volumes())


def test_svg_is_byte_identical(tmp_path, trajectory):
    first = artifacts.plot_trajectory(trajectory, tmp_path / "a.svg")
    second = artifacts.plot_trajectory(trajectory, tmp_path / "b.svg")
    assert first.read_bytes() == second.read_bytes()


def test_json_lines_convert_numpy():
    stream = io.StringIO()
    artifacts.write_json_lines([{"x": np.float64(1.5), "v": np.arange(2), "ok": np.bool_(True)}], stream)
    assert json.loads(stream.getvalue()) == {"x": 1.5, "v": [0, 1], "ok": True}


def test_writer_tracks_files_and_skips_svg(tmp_path):
    profile = soliton_ode.solve_soliton(1.0, 2.0)
    curvature = soliton_ode.transverse_curvature(profile)
    writer = ArtifactWriter(tmp_path / "out", svg=False)
    writer.csv(artifacts.profile_frame(profile, curvature, np.zeros_like(curvature)), "profile.csv")
    assert writer.figure(artifacts.plot_profile, profile, curvature, name="profile.svg") is None
    writer.text("done\n", "summary.txt")
    assert [p.name for p in writer.written] == ["profile.csv", "summary.txt"]
