"""
Data Models for reebflow
Pydantic schemas for Reeb vectors, volume reports, flow trajectories,
momentum profiles and entropy data
"""
import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..core.errors import format_coeffs


def _finite_tuple(v, name: str, min_length: int = 1) -> Tuple[float, ...]:
    values = tuple(float(x) for x in v)
    if len(values) < min_length:
        raise ValueError(f"{name} needs at least {min_length} entries, got {len(values)}")
    if not all(math.isfinite(x) for x in values):
        raise ValueError(f"{name} entries must be finite, got {values}")
    return values


class ReebVector(BaseModel):
    """Coefficients of ξ = Σ a_i ξ_i in the standard torus basis"""
    model_config = ConfigDict(frozen=True)

    coeffs: Tuple[float, ...] = Field(..., description="Coefficients a_0..a_n")

    @field_validator('coeffs', mode='before')
    @classmethod
    def validate_coeffs(cls, v):
        return _finite_tuple(v, "coeffs", min_length=2)

    @property
    def n(self) -> int:
        """Complex transverse dimension"""
        return len(self.coeffs) - 1

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    @classmethod
    def of(cls, values) -> "ReebVector":
        return cls(coeffs=tuple(float(x) for x in values))

    def __str__(self) -> str:
        return format_coeffs(self.coeffs)


class TangentVector(BaseModel):
    """Coefficients b_i of a torus element Y"""
    model_config = ConfigDict(frozen=True)

    coeffs: Tuple[float, ...] = Field(..., description="Coefficients b_0..b_n")

    @field_validator('coeffs', mode='before')
    @classmethod
    def validate_coeffs(cls, v):
        return _finite_tuple(v, "coeffs", min_length=2)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    def is_tangent(self, tol: float = 1e-12) -> bool:
        """Tangent to the normalized slice iff the coefficients sum to zero"""
        return abs(math.fsum(self.coeffs)) <= tol

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.array))


class HyperplaneSlice(BaseModel):
    """Normalized slice {c(ξ) = level}"""
    model_config = ConfigDict(frozen=True)

    level: float = Field(..., description="(n+1)·l with l = 1")
    charge_functional: Tuple[float, ...] = Field(..., description="c as a covector")

    @field_validator('level')
    @classmethod
    def validate_level(cls, v):
        if not v > 0:
            raise ValueError(f"level must be > 0, got {v}")
        return v

    @classmethod
    def for_dimension(cls, n: int) -> "HyperplaneSlice":
        """Slice for ℂ^{n+1} with the standard holomorphic volume form"""
        return cls(level=float(n + 1), charge_functional=(1.0,) * (n + 1))

    def charge(self, reeb: ReebVector) -> float:
        return math.fsum(c * a for c, a in zip(self.charge_functional, reeb.coeffs))

    def contains(self, reeb: ReebVector, tol: float = 1e-12) -> bool:
        return abs(self.charge(reeb) - self.level) <= tol


class VolumeReport(BaseModel):
    """Volume, relative volume and slice gradient at one Reeb vector"""
    reeb: ReebVector
    volume: float = Field(..., gt=0.0)
    relative_volume: float = Field(..., gt=0.0)
    grad: TangentVector
    min_pairing: float = Field(..., description="min_i a_i (boundary proximity)")

    @field_validator('grad')
    @classmethod
    def validate_grad(cls, v):
        if not v.is_tangent(1e-10):
            raise ValueError("gradient must be slice-tangent")
        return v

    def to_record(self) -> Dict[str, Any]:
        return {
            "reeb": list(self.reeb.coeffs),
            "volume": self.volume,
            "relative_volume": self.relative_volume,
            "grad": list(self.grad.coeffs),
            "min_pairing": self.min_pairing,
        }


class TerminationReason(str, Enum):
    """Why a trajectory stopped"""
    GRADIENT_TOLERANCE = "gradient_tolerance"
    MAX_TIME = "max_time"
    BOUNDARY_GUARD = "boundary_guard"
    STEP_FAILURE = "step_failure"
    STRAIGHT_LINE = "straight_line"


class FlowState(BaseModel):
    """One recorded point of the flow"""
    t: float
    reeb: ReebVector
    volume: float
    grad_norm: float
    mu: Optional[float] = None
    dt: Optional[float] = Field(None, description="Step size that produced this state")


class FlowTrajectory(BaseModel):
    """Time-stamped sequence of Reeb vectors"""
    states: List[FlowState] = Field(default_factory=list)
    terminated_by: TerminationReason

    @property
    def final(self) -> FlowState:
        return self.states[-1]

    @property
    def n(self) -> int:
        return self.states[0].reeb.n

    def volumes(self) -> np.ndarray:
        return np.array([s.volume for s in self.states])

    def mus(self) -> List[Optional[float]]:
        return [s.mu for s in self.states]


class MomentumProfile(BaseModel):
    """n=1 transverse metric φ(x)^{-1}dx² + φ(x)dθ² with soliton slope b"""
    model_config = ConfigDict(frozen=True)

    weights: Tuple[float, float] = Field(..., description="Weights as given (a0, a1)")
    normalized_weights: Tuple[float, float] = Field(..., description="Weights scaled to a0 + a1 = 2")
    slopes: Tuple[float, float] = Field(..., description="(s0, s1): φ'(0) = s0, φ'(x_max) = -s1")
    x_max: float = Field(..., gt=0.0)
    grid: Tuple[float, ...]
    phi: Tuple[float, ...]
    b: float
    lam: float = Field(8.0, description="Einstein normalization constant")
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @field_validator('grid', 'phi', mode='before')
    @classmethod
    def validate_samples(cls, v):
        return _finite_tuple(v, "samples", min_length=3)

    @property
    def grid_array(self) -> np.ndarray:
        return np.asarray(self.grid)

    @property
    def phi_array(self) -> np.ndarray:
        return np.asarray(self.phi)

    @property
    def is_einstein(self) -> bool:
        return self.b == 0.0


class LinkMetric(BaseModel):
    """
    Basic-integration data on the link

    Integrals of a basic function F over M are Σ weights·F(nodes). For the
    round sphere there is a single node carrying the whole volume.
    """
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1)
    source: str = Field(..., description="'round' or 'soliton'")
    nodes: Tuple[float, ...]
    weights: Tuple[float, ...]
    phi: Tuple[float, ...]
    dphi: Tuple[float, ...]
    scalar_link: Tuple[float, ...] = Field(..., description="R = R^T - 2n")
    scalar_transverse: Tuple[float, ...] = Field(..., description="R^T")
    x_max: Optional[float] = None
    fiber_length: float = 2 * math.pi
    b: Optional[float] = None

    def arrays(self) -> Dict[str, np.ndarray]:
        return {name: np.asarray(getattr(self, name)) for name in
                ('nodes', 'weights', 'phi', 'dphi', 'scalar_link', 'scalar_transverse')}

    @property
    def volume(self) -> float:
        return math.fsum(self.weights)

    @property
    def transverse_area(self) -> float:
        return self.volume / self.fiber_length


class EntropyDatum(BaseModel):
    """Basic function f on the metric's integration nodes, with f' and f''"""
    model_config = ConfigDict(frozen=True)

    metric: LinkMetric
    f: Tuple[float, ...]
    df: Tuple[float, ...]
    ddf: Tuple[float, ...]
    label: str = ""

    @property
    def n(self) -> int:
        return self.metric.n


class SweepPoint(BaseModel):
    """One row of the soliton sweep"""
    ratio: float
    a0: float
    a1: float
    b: float
    x_max: float
    residual: float
    min_curvature: float
    futaki: float
    sign_agrees: bool
    mu: float
    volume: float
    bound_ok: bool


class CriterionResult(BaseModel):
    """Outcome of one report criterion"""
    name: str
    passed: bool
    detail: str


class ReportSummary(BaseModel):
    """Outcome of a full report run"""
    n: int
    criteria: List[CriterionResult] = Field(default_factory=list)
    files: List[str] = Field(default_factory=list)
    minimizer: Optional[ReebVector] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    @property
    def failures(self) -> List[CriterionResult]:
        return [c for c in self.criteria if not c.passed]

    def to_text(self) -> str:
        lines = [f"reebflow report (n = {self.n})", ""]
        if self.minimizer is not None:
            lines.append(f"minimizer: {self.minimizer}")
        for c in self.criteria:
            lines.append(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
        lines.append("")
        lines.append("result: " + ("all criteria passed" if self.passed else
                                   "failed: " + ", ".join(c.name for c in self.failures)))
        return "\n".join(lines) + "\n"
