"""
Quadrature for Basic Integrands on the Weighted Sphere

A torus-invariant integrand on S^{2n+1} depends only on the squared moduli
u_i = |z_i|², and for a uniform point on the sphere (u_0..u_n) is uniform on
the standard n-simplex. Link integrals therefore reduce to simplex averages
times Vol(S^{2n+1}) = 2π^{n+1}/n!.

Rules:
- n = 1: Gauss–Legendre on [0, 1] (default 128 points)
- n >= 2: Stroud conical product (collapsed Gauss–Jacobi, default 20 points
  per direction, exact to degree 39)
- Monte Carlo over uniform points of S^{2n+1} as an independent oracle
"""
import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from ..core.errors import BoundaryProximityError, IntegrationError, InvalidInputError

logger = logging.getLogger(__name__)

# Integrand magnitude treated as a boundary singularity
SINGULAR_CUTOFF = 1e12
DEFAULT_GL_POINTS = 128
DEFAULT_STROUD_POINTS = 20
MC_CHUNK = 1 << 16

BasicIntegrand = Callable[[np.ndarray], np.ndarray]


def sphere_volume(n: int) -> float:
    """Vol(S^{2n+1}) = 2π^{n+1}/n!"""
    return 2.0 * math.pi ** (n + 1) / math.factorial(n)


def gauss_legendre_rule(points: int) -> Tuple[np.ndarray, np.ndarray]:
    """1-simplex rule: nodes (t, 1-t), weights summing to 1"""
    x, w = roots_legendre(points)
    t = (x + 1.0) / 2.0
    nodes = np.column_stack([t, 1.0 - t])
    return nodes, w / w.sum()


def stroud_rule(dim: int, points: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Conical-product rule on the standard dim-simplex

    The collapsed map u_1 = t_1, u_k = t_k Π_{j<k}(1 - t_j) has Jacobian
    Π (1 - t_i)^{dim-i}, so direction i uses Gauss–Jacobi with α = dim - i.

    Args:
        dim: Simplex dimension
        points: Points per direction

    Returns:
        (nodes in barycentric coordinates, shape (points**dim, dim+1), weights summing to 1)
    """
    axes, axis_weights = [], []
    for i in range(1, dim + 1):
        x, w, total = roots_jacobi(points, dim - i, 0, mu=True)
        axes.append((x + 1.0) / 2.0)
        axis_weights.append(w / total)
    grids = np.meshgrid(*axes, indexing='ij')
    wgrids = np.meshgrid(*axis_weights, indexing='ij')
    t = np.column_stack([g.ravel() for g in grids])
    weights = np.prod(np.column_stack([g.ravel() for g in wgrids]), axis=1)

    bary = np.zeros((t.shape[0], dim + 1))
    remaining = np.ones(t.shape[0])
    for i in range(dim):
        bary[:, i] = t[:, i] * remaining
        remaining = remaining - bary[:, i]
    bary[:, dim] = remaining
    return bary, weights / weights.sum()


class WeightedSphereLink:
    """
    S^{2n+1} with a simplex rule for basic integrands

    Usage:
        link = WeightedSphereLink.build(n=1)
        vol = link.integrate(lambda u: np.ones(len(u)))
    """

    def __init__(
        self,
        n: int,
        nodes: np.ndarray,
        weights: np.ndarray,
        rule: str,
        mc_seed: int = 20240917,
        mc_samples: int = 1_000_000,
    ):
        """
        Initialize link.

        Args:
            n: Complex transverse dimension (link dimension 2n+1)
            nodes: Barycentric nodes, shape (N, n+1)
            weights: Positive weights summing to 1
            rule: Rule name, for reporting
            mc_seed: Monte Carlo seed
            mc_samples: Default Monte Carlo sample count
        """
        if n < 1:
            raise InvalidInputError(f"n must be >= 1, got {n}")
        self.n = n
        self.nodes = np.asarray(nodes, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.rule = rule
        self.mc_seed = int(mc_seed)
        self.mc_samples = int(mc_samples)
        self.total_mass = sphere_volume(n)
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @classmethod
    def build(
        cls,
        n: int,
        rule: str = "auto",
        points: Optional[int] = None,
        mc_seed: int = 20240917,
        mc_samples: int = 1_000_000,
    ) -> "WeightedSphereLink":
        """Construct the default (or requested) rule for dimension n"""
        if rule == "auto":
            rule = "gauss_legendre" if n == 1 else "stroud"
        if rule == "gauss_legendre":
            if n != 1:
                raise InvalidInputError(f"gauss_legendre rule needs n = 1, got n = {n}")
            nodes, weights = gauss_legendre_rule(points or DEFAULT_GL_POINTS)
        elif rule == "stroud":
            nodes, weights = stroud_rule(n, points or DEFAULT_STROUD_POINTS)
        else:
            raise InvalidInputError(f"unknown quadrature rule '{rule}'")
        logger.debug(f"Built {rule} rule for n={n} with {len(weights)} nodes")
        return cls(n, nodes, weights, rule, mc_seed=mc_seed, mc_samples=mc_samples)

    @classmethod
    def from_config(cls, config, n: Optional[int] = None) -> "WeightedSphereLink":
        """Build from a RunConfig (n defaults to config.n)"""
        return cls.build(
            n if n is not None else config.n,
            rule=config.quad.rule,
            points=config.quad.points,
            mc_seed=config.quad.mc_seed,
            mc_samples=config.quad.mc_samples,
        )

    @property
    def size(self) -> int:
        return len(self.weights)

    def integrate(self, integrand: BasicIntegrand) -> np.ndarray:
        return integrate_basic(self, integrand)

    def rule_defects(self) -> dict:
        """Deviation of the rule from its structural invariants"""
        return {
            "weight_sum": abs(math.fsum(self.weights) - 1.0),
            "min_weight": float(self.weights.min()),
            "min_coordinate": float(self.nodes.min()),
            "coordinate_sum": float(np.abs(self.nodes.sum(axis=1) - 1.0).max()),
            "first_moment": float(np.abs(self.weights @ self.nodes - 1.0 / (self.n + 1)).max()),
        }

    def __repr__(self) -> str:
        return f"WeightedSphereLink(n={self.n}, rule={self.rule}, nodes={self.size})"


def integrate_basic(link: WeightedSphereLink, integrand: BasicIntegrand):
    """
    Integrate a basic function over the link

    Args:
        link: Link with its simplex rule
        integrand: Vectorized F(u) for u of shape (N, n+1); may return shape
            (N,) or (N, ...) for vector-valued integrands

    Returns:
        Vol(S^{2n+1}) × simplex average of F (float or array)
    """
    values = np.asarray(integrand(link.nodes), dtype=float)
    if values.shape[0] != link.size:
        raise IntegrationError(f"integrand returned {values.shape[0]} values for {link.size} nodes")

    flat = values.reshape(link.size, -1)
    bad = ~np.isfinite(flat).all(axis=1)
    if bad.any():
        k = int(np.argmax(bad))
        raise IntegrationError(f"non-finite integrand at node u={link.nodes[k].tolist()}", link.nodes[k])
    big = (np.abs(flat) > SINGULAR_CUTOFF).any(axis=1)
    if big.any():
        k = int(np.argmax(big))
        raise BoundaryProximityError(
            f"integrand exceeds {SINGULAR_CUTOFF:g} at node u={link.nodes[k].tolist()}: "
            "evaluation point too close to the cone boundary"
        )

    result = link.total_mass * np.tensordot(link.weights, values, axes=1)
    return float(result) if np.ndim(result) == 0 else result


def sample_link(n: int, samples: int, seed: int) -> np.ndarray:
    """Squared moduli of uniform points on S^{2n+1}, shape (samples, n+1)"""
    rng = np.random.default_rng(seed)
    chunks = []
    remaining = samples
    while remaining > 0:
        size = min(MC_CHUNK, remaining)
        z = rng.standard_normal((size, 2 * (n + 1)))
        moduli = z[:, : n + 1] ** 2 + z[:, n + 1:] ** 2
        chunks.append(moduli / moduli.sum(axis=1, keepdims=True))
        remaining -= size
    return np.concatenate(chunks)


def mc_integrate(
    link: WeightedSphereLink,
    integrand: BasicIntegrand,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> Tuple[float, float]:
    """
    Monte Carlo estimate of a basic integral

    Args:
        link: Link (supplies n and the default seed / sample count)
        integrand: Scalar vectorized F(u)
        samples: Sample count (>= 1000)
        seed: Seed; same seed gives bit-identical results

    Returns:
        (estimate, standard error)
    """
    samples = link.mc_samples if samples is None else int(samples)
    seed = link.mc_seed if seed is None else int(seed)
    if samples < 1000:
        raise InvalidInputError(f"Monte Carlo needs at least 1000 samples, got {samples}")

    u = sample_link(link.n, samples, seed)
    values = np.asarray(integrand(u), dtype=float)
    if not np.isfinite(values).all():
        k = int(np.argmax(~np.isfinite(values)))
        raise IntegrationError(f"non-finite integrand at sample u={u[k].tolist()}", u[k])

    mean = values.mean()
    stderr = values.std(ddof=1) / math.sqrt(samples)
    return float(link.total_mass * mean), float(link.total_mass * stderr)
