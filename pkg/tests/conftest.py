"""
Shared fixtures: one quadrature link per dimension and an isolated run config
"""
import sys
from pathlib import Path

import pytest

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.core.config import RunConfig, SolitonConfig  # noqa: E402
from src.reeb_engine.quadrature import WeightedSphereLink  # noqa: E402


@pytest.fixture(scope="session")
def link1():
    return WeightedSphereLink.build(1)


@pytest.fixture(scope="session")
def link2():
    return WeightedSphereLink.build(2)


@pytest.fixture(scope="session")
def link3():
    return WeightedSphereLink.build(3, points=12)


@pytest.fixture(scope="session")
def links(link1, link2, link3):
    return {1: link1, 2: link2, 3: link3}


@pytest.fixture
def soliton_config():
    return SolitonConfig()


@pytest.fixture
def run_config(tmp_path, monkeypatch):
    """Defaults with output under tmp_path and no environment overrides"""
    for name in ("REEBFLOW_SEED", "REEBFLOW_OUTPUT_DIR", "REEBFLOW_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    config = RunConfig()
    config.output.dir = str(tmp_path / "results")
    config.quad.mc_samples = 200_000
    return config
