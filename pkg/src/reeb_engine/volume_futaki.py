"""
Volume Functional and Futaki Invariant

Under a type-I deformation η = η₀/η₀(ξ) the link volume is the basic integral
of η₀(ξ)^{-(n+1)} against the round volume element, so volume, its first
variation (−2 × Futaki) and its Hessian are all simplex integrals of powers
of the linear form a·u. Derivatives are taken under the integral sign;
finite differences live in the test suite only.
"""
import logging
import math
from typing import Optional

import numpy as np

from .quadrature import WeightedSphereLink
from .reeb_cone import VectorLike, as_reeb, min_link_pairing, require_membership, tangent_basis
from ..core.errors import BoundaryProximityError, InvalidInputError
from ..storage.models import ReebVector, TangentVector, VolumeReport

logger = logging.getLogger(__name__)

# Optimizer-facing calls reject Reeb vectors this close to the boundary
BOUNDARY_GUARD = 1e-8
TANGENT_TOL = 1e-10


def _checked(xi: VectorLike, link: Optional[WeightedSphereLink] = None,
             guard: float = BOUNDARY_GUARD) -> ReebVector:
    xi = require_membership(xi)
    if link is not None and xi.n != link.n:
        raise InvalidInputError(f"Reeb vector has {xi.n + 1} entries, link needs {link.n + 1}")
    pairing = min_link_pairing(xi)
    if pairing < guard:
        raise BoundaryProximityError(
            f"Reeb vector {xi} is within {guard:g} of the cone boundary (min a_i = {pairing:.3g})",
            min_pairing=pairing,
        )
    return xi


def volume(link: WeightedSphereLink, xi: VectorLike) -> float:
    """
    Vol(ξ) = ∫_M η₀(ξ)^{-(n+1)} dv_{g₀}

    Args:
        link: Weighted-sphere link with its quadrature rule
        xi: Reeb vector in the cone

    Returns:
        Volume (round sphere gives 2π^{n+1}/n!)
    """
    xi = _checked(xi, link)
    a = xi.array
    power = link.n + 1
    return link.integrate(lambda u: (u @ a) ** (-power))


def relative_volume(link: WeightedSphereLink, xi: VectorLike) -> float:
    """Volume divided by the round-sphere volume"""
    return volume(link, xi) / link.total_mass


def closed_form_relative_volume(xi: VectorLike) -> float:
    """
    1/∏ a_i

    Conjectured closed form for the weighted sphere. It is only trusted as
    a cross-check against volume(), which the test suite performs.
    """
    xi = as_reeb(xi)
    if min(xi.coeffs) <= 0:
        raise InvalidInputError(f"closed form needs positive entries, got {xi}")
    return 1.0 / math.prod(xi.coeffs)


def _require_tangent(y: VectorLike, n: int) -> np.ndarray:
    b = np.asarray(y.coeffs if hasattr(y, 'coeffs') else y, dtype=float)
    if b.shape != (n + 1,):
        raise InvalidInputError(f"direction has {b.size} entries, expected {n + 1}")
    if abs(math.fsum(b)) > TANGENT_TOL:
        raise InvalidInputError(
            f"direction {','.join(repr(float(x)) for x in b)} is not tangent to the slice "
            f"(sum = {math.fsum(b):.3g})"
        )
    return b


def futaki(link: WeightedSphereLink, xi: VectorLike, y: VectorLike) -> float:
    """
    Futaki invariant Fut(JY) at ξ

    Pinned so that δ_Y Vol = −2·Fut holds exactly against volume():
    Fut = ((n+1)/2) ∫_M η₀(Y) η₀(ξ)^{-(n+2)} dv_{g₀}

    Args:
        link: Link
        xi: Reeb vector
        y: Slice-tangent direction (Σ b_i = 0)

    Returns:
        Fut(JY)
    """
    xi = _checked(xi, link)
    b = _require_tangent(y, link.n)
    a = xi.array
    n = link.n
    integral = link.integrate(lambda u: (u @ b) * (u @ a) ** (-(n + 2)))
    return 0.5 * (n + 1) * integral


def _full_gradient(link: WeightedSphereLink, a: np.ndarray) -> np.ndarray:
    n = link.n
    return -(n + 1) * link.integrate(lambda u: u * ((u @ a) ** (-(n + 2)))[:, None])


def grad_volume(link: WeightedSphereLink, xi: VectorLike) -> TangentVector:
    """
    Slice-tangent gradient of the volume

    Returns:
        g with g·Y = δ_Y Vol for every tangent Y
    """
    xi = _checked(xi, link)
    g = _full_gradient(link, xi.array)
    return TangentVector(coeffs=tuple(g - g.mean()))


def hessian_volume(link: WeightedSphereLink, xi: VectorLike) -> np.ndarray:
    """
    Hessian of the volume restricted to the slice tangent space

    Returns:
        n×n symmetric matrix in the orthonormal basis of tangent_basis(n)
    """
    xi = _checked(xi, link)
    a = xi.array
    n = link.n

    def integrand(u: np.ndarray) -> np.ndarray:
        weight = (u @ a) ** (-(n + 3))
        return u[:, :, None] * u[:, None, :] * weight[:, None, None]

    full = (n + 1) * (n + 2) * link.integrate(integrand)
    basis = tangent_basis(n)
    hessian = basis.T @ full @ basis
    return 0.5 * (hessian + hessian.T)


def volume_report(link: WeightedSphereLink, xi: VectorLike) -> VolumeReport:
    """Volume, relative volume, slice gradient and boundary proximity at ξ"""
    xi = _checked(xi, link)
    vol = volume(link, xi)
    report = VolumeReport(
        reeb=xi,
        volume=vol,
        relative_volume=vol / link.total_mass,
        grad=grad_volume(link, xi),
        min_pairing=min_link_pairing(xi),
    )
    logger.debug(f"Volume at {xi}: {vol:.12g} (relative {report.relative_volume:.12g})")
    return report
