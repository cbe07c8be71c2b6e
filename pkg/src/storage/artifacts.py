"""
Artifact Writers for reebflow
CSV tables (pandas), JSON-lines records and static SVG figures (matplotlib).
All writers are deterministic: identical inputs give byte-identical files.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO, Tuple

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import seaborn as sns  # noqa: E402

from .models import FlowTrajectory, MomentumProfile, SweepPoint  # noqa: E402

logger = logging.getLogger(__name__)

sns.set_style("whitegrid")
plt.rcParams['svg.hashsalt'] = 'reebflow'

FLOAT_FORMAT = '%.17g'
SVG_METADATA = {'Date': None, 'Creator': None}


# ============================================
# TABLES
# ============================================

def trajectory_frame(trajectory: FlowTrajectory) -> pd.DataFrame:
    """Columns t, a0..an, volume, grad_norm, mu"""
    rows = []
    for state in trajectory.states:
        row: Dict[str, Any] = {'t': state.t}
        row.update({f'a{i}': a for i, a in enumerate(state.reeb.coeffs)})
        row.update(volume=state.volume, grad_norm=state.grad_norm, mu=state.mu)
        rows.append(row)
    return pd.DataFrame(rows)


def profile_frame(profile: MomentumProfile, curvature: np.ndarray, potential: np.ndarray) -> pd.DataFrame:
    """Columns x, phi, K_T, f"""
    return pd.DataFrame({
        'x': profile.grid_array,
        'phi': profile.phi_array,
        'K_T': np.asarray(curvature),
        'f': np.asarray(potential),
    })


def sweep_frame(points: Sequence[SweepPoint]) -> pd.DataFrame:
    return pd.DataFrame([p.model_dump() for p in points])


def properness_frame(rows: Iterable[Tuple[float, float, float]]) -> pd.DataFrame:
    """Columns eps, volume, relative_volume"""
    return pd.DataFrame(list(rows), columns=['eps', 'volume', 'relative_volume'])


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    """Write a table with round-trip float precision and '\\n' line endings"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    logger.debug(f"Wrote {len(frame)} rows to {path}")
    return path


def read_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path)


# ============================================
# JSON-LINES
# ============================================

def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value


def to_json_line(record: Dict[str, Any]) -> str:
    return json.dumps(_plain(record), sort_keys=False, ensure_ascii=False)


def write_json_lines(records: Iterable[Dict[str, Any]], stream: TextIO):
    for record in records:
        stream.write(to_json_line(record) + "\n")


# ============================================
# FIGURES
# ============================================

def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format='svg', metadata=SVG_METADATA, bbox_inches='tight')
    plt.close(fig)
    logger.debug(f"Wrote figure {path}")
    return path


def plot_trajectory(trajectory: FlowTrajectory, path: Path) -> Path:
    """Volume and μ (where attached) against flow time"""
    frame = trajectory_frame(trajectory)
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(frame['t'], frame['volume'], 'o-', color='blue', markersize=3, label='volume')
    ax.set_xlabel('t')
    ax.set_ylabel('volume')
    mus = frame.dropna(subset=['mu'])
    if not mus.empty:
        twin = ax.twinx()
        twin.plot(mus['t'], mus['mu'], 's--', color='red', markersize=4, label='μ')
        twin.set_ylabel('μ')
        twin.grid(False)
    ax.set_title(f'Reeb flow ({trajectory.terminated_by.value})')
    return _save(fig, path)


def plot_profile(profile: MomentumProfile, curvature: np.ndarray, path: Path) -> Path:
    """φ and K^T on the momentum interval"""
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(profile.grid_array, profile.phi_array, 'o-', color='blue', markersize=3, label='φ')
    ax.plot(profile.grid_array, curvature, '-', color='red', label='K^T')
    ax.set_xlabel('x')
    ax.set_title(f'Soliton profile, weights {profile.weights[0]:g},{profile.weights[1]:g}, b = {profile.b:.6g}')
    ax.legend(loc='best')
    return _save(fig, path)


def plot_sweep(points: Sequence[SweepPoint], path: Path) -> Path:
    """b and min K^T across weight ratios"""
    frame = sweep_frame(points)
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(frame['ratio'], frame['b'], 'o-', color='blue', label='b')
    ax.plot(frame['ratio'], frame['min_curvature'], 's-', color='red', label='min K^T')
    ax.set_xlabel('a1/a0')
    ax.set_title('Soliton sweep')
    ax.legend(loc='best')
    return _save(fig, path)


def plot_properness(frame: pd.DataFrame, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(frame['eps'], frame['relative_volume'], 'o-', color='blue')
    ax.set_xscale('log')
    ax.set_yscale('log')
    ax.set_xlabel('ε')
    ax.set_ylabel('relative volume')
    ax.set_title('Volume toward the cone boundary')
    return _save(fig, path)


class ArtifactWriter:
    """Writes a run's artifacts under one output directory"""

    def __init__(self, output_dir: Path, svg: bool = True):
        """
        Initialize writer

        Args:
            output_dir: Target directory (created on first write)
            svg: Emit SVG figures
        """
        self.output_dir = Path(output_dir)
        self.svg = svg
        self.written: List[Path] = []

    def path(self, name: str) -> Path:
        return self.output_dir / name

    def csv(self, frame: pd.DataFrame, name: str) -> Path:
        out = write_csv(frame, self.path(name))
        self.written.append(out)
        return out

    def figure(self, plot, *args, name: str) -> Optional[Path]:
        if not self.svg:
            return None
        out = plot(*args, self.path(name))
        self.written.append(out)
        return out

    def text(self, content: str, name: str) -> Path:
        out = self.path(name)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(content, encoding='utf-8')
        self.written.append(out)
        return out
