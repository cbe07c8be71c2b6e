"""
Reeb Cone on the Weighted Sasaki Sphere

Torus Lie algebra coordinates, the Reeb cone ℝ₊^{n+1}, the normalized slice
Σ a_i = n+1 and the type-I / homothetic deformations acting on Reeb vectors.

For the weighted sphere, η₀(ξ) at a point z of S^{2n+1} is Σ a_i |z_i|², a
linear function of the squared moduli u_i = |z_i|² which range over the
standard simplex. Everything below is stated in those terms.
"""
import logging
import math
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np
from scipy.linalg import null_space

from ..core.errors import InvalidInputError, NotInReebConeError
from ..storage.models import HyperplaneSlice, ReebVector, TangentVector

logger = logging.getLogger(__name__)

UNIT_TOL = 1e-12

VectorLike = Union[ReebVector, TangentVector, Sequence[float], np.ndarray]


def as_reeb(xi: VectorLike) -> ReebVector:
    """Coerce a sequence into a ReebVector"""
    if isinstance(xi, ReebVector):
        return xi
    if isinstance(xi, TangentVector):
        return ReebVector(coeffs=xi.coeffs)
    return ReebVector.of(xi)


def contact_pairing(xi: VectorLike, z: Sequence[complex]) -> float:
    """
    Evaluate η₀(ξ) at a point of the link

    Args:
        xi: Reeb vector (a_0..a_n)
        z: Point of S^{2n+1} ⊂ ℂ^{n+1}

    Returns:
        Σ a_i |z_i|²
    """
    xi = as_reeb(xi)
    z = np.asarray(z, dtype=complex)
    if z.shape != (xi.n + 1,):
        raise InvalidInputError(f"point has {z.size} coordinates, expected {xi.n + 1}")
    moduli = np.abs(z) ** 2
    norm_sq = math.fsum(moduli)
    if abs(norm_sq - 1.0) > UNIT_TOL:
        raise InvalidInputError(f"point is not on the unit sphere (|z|² = {norm_sq!r})")
    return math.fsum(a * u for a, u in zip(xi.coeffs, moduli))


def pairing_on_simplex(xi: VectorLike, u: np.ndarray) -> np.ndarray:
    """η₀(ξ) at points given by their squared moduli, shape (N, n+1)"""
    return np.asarray(u, dtype=float) @ as_reeb(xi).array


def min_link_pairing(xi: VectorLike) -> float:
    """
    Minimum of η₀(ξ) over the link

    η₀(ξ) is linear in the squared moduli, so the minimum over the simplex
    is attained at one of its vertices (the coordinate circles).
    """
    xi = as_reeb(xi)
    vertices = np.eye(xi.n + 1)
    return float(np.min(pairing_on_simplex(xi, vertices)))


def reeb_membership(xi: VectorLike) -> bool:
    """True iff η₀(ξ) > 0 everywhere on the link (the cone is open)"""
    return min_link_pairing(xi) > 0.0


def require_membership(xi: VectorLike) -> ReebVector:
    """Return the ReebVector or raise NotInReebConeError"""
    xi = as_reeb(xi)
    if not reeb_membership(xi):
        raise NotInReebConeError(xi.coeffs)
    return xi


def normalization_charge(xi: VectorLike) -> float:
    """c(ξ) = Σ a_i, the charge against dz⁰∧…∧dzⁿ"""
    return math.fsum(as_reeb(xi).coeffs)


def default_slice(n: int) -> HyperplaneSlice:
    return HyperplaneSlice.for_dimension(n)


def normalize_to_slice(xi: VectorLike, hyperplane: Optional[HyperplaneSlice] = None) -> ReebVector:
    """
    Rescale ξ along its ray onto the normalized slice

    Args:
        xi: Reeb vector in the cone
        hyperplane: Target slice (default: level n+1, all-ones charge)

    Returns:
        (level / c(ξ))·ξ
    """
    xi = require_membership(xi)
    hyperplane = hyperplane or default_slice(xi.n)
    charge = hyperplane.charge(xi)
    if not charge > 0:
        raise InvalidInputError(f"charge {charge!r} <= 0: the ray through {xi} misses the slice")
    scale = hyperplane.level / charge
    if scale == 1.0:
        return xi
    return ReebVector.of(scale * xi.array)


def project_tangent(y: VectorLike) -> TangentVector:
    """Orthogonal projection onto {Σ b_i = 0}"""
    b = np.asarray(y.coeffs if hasattr(y, 'coeffs') else y, dtype=float)
    return TangentVector(coeffs=tuple(b - b.mean()))


def homothetic(xi: VectorLike, lam: float) -> ReebVector:
    """
    Homothetic transformation ξ ↦ λ^{-1}ξ (η ↦ λη, g_λ = λ²η⊗η + λg^T)

    Args:
        xi: Reeb vector
        lam: Scale λ > 0
    """
    if not lam > 0:
        raise InvalidInputError(f"homothetic scale must be > 0, got {lam!r}")
    return ReebVector.of(as_reeb(xi).array / lam)


@lru_cache(maxsize=8)
def _tangent_basis(n: int) -> np.ndarray:
    basis = null_space(np.ones((1, n + 1)))
    basis.setflags(write=False)
    return basis


def tangent_basis(n: int) -> np.ndarray:
    """Orthonormal basis of the slice tangent space, shape (n+1, n)"""
    return _tangent_basis(n)
