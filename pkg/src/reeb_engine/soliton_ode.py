"""
Transverse Kähler–Ricci Soliton on the Weighted S³

In the toric momentum ansatz g^T = φ(x)^{-1}dx² + φ(x)dθ² on [0, x_max], a
soliton whose field is generated by the torus has f' ≡ const, and the
soliton equation becomes the linear ODE

    −φ'' = λ + b·φ',   φ(0) = φ(x_max) = 0,   φ'(0) = s₀,   φ'(x_max) = −s₁

with λ = 8 (round S³ has K^T = 4). Its solution is closed form,

    φ(x) = s₀·x·E(bx) − λ·x²·E₂(bx),
    E(z) = (1 − e^{-z})/z,   E₂(z) = (z − 1 + e^{-z})/z²,

so the only unknown is b, fixed by φ(x_max) = 0. Near z = 0 both kernels
are evaluated from their Taylor series.

Weight calibration: weights are rescaled to a₀ + a₁ = 2 and the boundary
slopes are s_i = 2/a_i. Unit weights then give the round profile, the
metric volume 4π²·x_max equals the weighted-sphere volume, and sign(b)
agrees with the Futaki invariant along (1, −1).
"""
import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Chebyshev
from numpy.polynomial import polynomial as P
from scipy.special import roots_legendre

from ..core.config import SolitonConfig
from ..core.errors import ConvergenceError, InvalidInputError, RootBracketError
from ..storage.models import LinkMetric, MomentumProfile, ReebVector, SweepPoint

logger = logging.getLogger(__name__)

LAMBDA = 8.0
WEIGHT_SUM = 2.0
SLOPE_SCALE = 2.0
FIBER_LENGTH = 2 * math.pi
ANGLE_PERIOD = 2 * math.pi

SERIES_RADIUS = 0.5
SERIES_TERMS = 26
ROOT_MAX_ITER = 200
ENDPOINT_TOL = 1e-10
WEIGHT_MATCH_TOL = 1e-10

# Taylor coefficients in z of E and E₂
_E_SERIES = np.array([(-1) ** k / math.factorial(k + 1) for k in range(SERIES_TERMS)])
_E2_SERIES = np.array([(-1) ** k / math.factorial(k + 2) for k in range(SERIES_TERMS)])
_DE_SERIES = P.polyder(_E_SERIES)
_DE2_SERIES = P.polyder(_E2_SERIES)


# ============================================
# KERNELS
# ============================================

def _kernel(z, series: np.ndarray, closed: Callable[[np.ndarray], np.ndarray]):
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < SERIES_RADIUS
    safe = np.where(small, 1.0, z)
    out = np.where(small, P.polyval(z, series), closed(safe))
    return float(out) if out.ndim == 0 else out


def kernel_e(z):
    """E(z) = (1 − e^{-z})/z"""
    return _kernel(z, _E_SERIES, lambda s: -np.expm1(-s) / s)


def kernel_e2(z):
    """E₂(z) = (z − 1 + e^{-z})/z²"""
    return _kernel(z, _E2_SERIES, lambda s: (s + np.expm1(-s)) / s ** 2)


def kernel_e_prime(z):
    return _kernel(z, _DE_SERIES, lambda s: (np.exp(-s) * (s + 1.0) - 1.0) / s ** 2)


def kernel_e2_prime(z):
    return _kernel(z, _DE2_SERIES, lambda s: (2.0 - s - (s + 2.0) * np.exp(-s)) / s ** 3)


# ============================================
# CLOSED-FORM PROFILE
# ============================================

def profile_phi(x, s0: float, b: float, lam: float = LAMBDA):
    """φ(x) for slope s₀ at x = 0 and potential slope b"""
    x = np.asarray(x, dtype=float)
    return s0 * x * kernel_e(b * x) - lam * x ** 2 * kernel_e2(b * x)


def profile_dphi(x, s0: float, b: float, lam: float = LAMBDA):
    """φ'(x) = s₀e^{-bx} − λ·x·E(bx)"""
    x = np.asarray(x, dtype=float)
    return s0 * np.exp(-b * x) - lam * x * kernel_e(b * x)


def profile_ddphi(x, s0: float, b: float, lam: float = LAMBDA):
    """φ''(x) = −(λ + b·s₀)e^{-bx}"""
    x = np.asarray(x, dtype=float)
    return -(lam + b * s0) * np.exp(-b * x)


def evaluate_profile(x, slopes: Tuple[float, float], x_max: float, b: float,
                     lam: float = LAMBDA) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    (φ, φ', φ'') of the closed form, expanded from the end where e^{-bx} decays

    For b < 0 the profile is read as its mirror x ↦ x_max − x, which has
    slopes (s₁, s₀) and potential slope −b. That keeps every exponential
    below one, so strongly unequal weights do not cancel catastrophically.
    """
    x = np.asarray(x, dtype=float)
    if b >= 0:
        s0 = slopes[0]
        return profile_phi(x, s0, b, lam), profile_dphi(x, s0, b, lam), profile_ddphi(x, s0, b, lam)
    y = x_max - x
    s1 = slopes[1]
    return profile_phi(y, s1, -b, lam), -profile_dphi(y, s1, -b, lam), profile_ddphi(y, s1, -b, lam)


def calibrate_weights(a0: float, a1: float) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """
    Map weights to (normalized weights, boundary slopes)

    Returns:
        ((â₀, â₁) with â₀ + â₁ = 2, (s₀, s₁) = (2/â₀, 2/â₁))
    """
    if not (a0 > 0 and a1 > 0 and math.isfinite(a0) and math.isfinite(a1)):
        raise InvalidInputError(f"weights must be positive and finite, got {a0!r},{a1!r}")
    scale = WEIGHT_SUM / (a0 + a1)
    w0, w1 = a0 * scale, a1 * scale
    return (w0, w1), (SLOPE_SCALE / w0, SLOPE_SCALE / w1)


def lobatto_grid(x_max: float, points: int) -> np.ndarray:
    """Chebyshev–Lobatto points on [0, x_max], endpoints included and exact"""
    k = np.arange(points)
    grid = x_max * (1.0 - np.cos(np.pi * k / (points - 1))) / 2.0
    grid[0], grid[-1] = 0.0, x_max
    return grid


# ============================================
# SHOOTING FOR b
# ============================================

def _endpoint_equation(s0: float, s1: float):
    total = s0 + s1

    def func(z: float) -> Tuple[float, float]:
        value = s0 * kernel_e(z) - total * kernel_e2(z)
        slope = s0 * kernel_e_prime(z) - total * kernel_e2_prime(z)
        return value, slope
    return func


def _bracket(func, s0: float, s1: float, x_max: float) -> Tuple[float, float]:
    """
    Scan z = 1, 2, 4, ... for a sign change of func, for s₀ > s₁

    For z ≥ 2(s₀+s₁)/s₁ the endpoint condition is strictly negative, so the
    scan stops there at the latest.
    """
    limit = max(1.0, 2.0 * (s0 + s1) / s1)
    f0, _ = func(0.0)
    scanned = [0.0]
    lo, step = 0.0, 1.0
    while True:
        z = min(step, limit)
        scanned.append(z)
        f, _ = func(z)
        if not math.isfinite(f):
            break
        if f == 0.0 or (f > 0) != (f0 > 0):
            return lo, z
        if z >= limit:
            break
        lo, step = z, step * 2.0
    raise RootBracketError("no sign change of the endpoint condition", [z / x_max for z in scanned])


def _newton_bisection(func, x1: float, x2: float, tol: float = 1e-15) -> Tuple[float, int]:
    """
    Safeguarded Newton on a bracket [x1, x2]

    Falls back to bisection whenever the Newton step leaves the bracket or
    does not halve the residual fast enough.

    Returns:
        (root, iterations)
    """
    fl, _ = func(x1)
    fh, _ = func(x2)
    if fl == 0.0:
        return x1, 0
    if fh == 0.0:
        return x2, 0
    if (fl > 0) == (fh > 0):
        raise RootBracketError("endpoints do not bracket a root", [x1, x2])
    xl, xh = (x1, x2) if fl < 0 else (x2, x1)

    x = 0.5 * (x1 + x2)
    dxold = abs(x2 - x1)
    dx = dxold
    f, df = func(x)
    for iteration in range(1, ROOT_MAX_ITER + 1):
        if ((x - xh) * df - f) * ((x - xl) * df - f) > 0.0 or abs(2.0 * f) > abs(dxold * df):
            dxold, dx = dx, 0.5 * (xh - xl)
            x = xl + dx
            if xl == x:
                return x, iteration
        else:
            dxold, dx = dx, f / df
            previous = x
            x -= dx
            if previous == x:
                return x, iteration
        if abs(dx) < tol * max(1.0, abs(x)):
            return x, iteration
        f, df = func(x)
        if f == 0.0:
            return x, iteration
        if f < 0:
            xl = x
        else:
            xh = x
    raise ConvergenceError(f"Newton-bisection did not converge in {ROOT_MAX_ITER} iterations (z={x!r})")


def solve_soliton(a0: float, a1: float, config: Optional[SolitonConfig] = None) -> MomentumProfile:
    """
    Solve the n=1 soliton ODE for weights (a₀, a₁)

    Args:
        a0: First weight (> 0)
        a1: Second weight (> 0)
        config: grid_points for the sampled profile

    Returns:
        MomentumProfile on a Chebyshev–Lobatto grid

    Raises:
        RootBracketError: b could not be bracketed
        ConvergenceError: the returned profile misses φ(x_max) = 0 or is not positive inside
    """
    config = config or SolitonConfig()
    (w0, w1), (s0, s1) = calibrate_weights(float(a0), float(a1))
    x_max = (s0 + s1) / LAMBDA

    if s0 == s1:
        b, bracket, iterations = 0.0, (0.0, 0.0), 0
    else:
        # the mirrored profile x ↦ x_max − x swaps the slopes and flips z
        flip = -1.0 if s0 < s1 else 1.0
        hi, lo = max(s0, s1), min(s0, s1)
        func = _endpoint_equation(hi, lo)
        bracket = _bracket(func, hi, lo, x_max)
        z, iterations = _newton_bisection(func, *bracket)
        b = flip * z / x_max
        bracket = tuple(sorted(flip * end for end in bracket))

    grid = lobatto_grid(x_max, config.grid_points)
    phi, _, _ = evaluate_profile(grid, (s0, s1), x_max, b)

    # the expansion end is exactly zero, the far end carries the root error
    far = -1 if b >= 0 else 0
    if abs(phi[far]) > ENDPOINT_TOL:
        raise ConvergenceError(f"φ({grid[far]:.6g}) = {phi[far]:.3e} for weights {a0},{a1} (b = {b!r})")
    if np.any(phi[1:-1] <= 0):
        k = int(np.argmax(phi[1:-1] <= 0)) + 1
        raise ConvergenceError(f"profile is not positive inside: φ({grid[k]:.6g}) = {phi[k]:.3e}")

    logger.debug(f"Soliton for weights ({a0}, {a1}): b = {b:.15g} after {iterations} iterations")
    return MomentumProfile(
        weights=(float(a0), float(a1)),
        normalized_weights=(w0, w1),
        slopes=(s0, s1),
        x_max=x_max,
        grid=tuple(grid),
        phi=tuple(phi),
        b=b,
        lam=LAMBDA,
        metadata={
            "weight_normalization": f"a0 + a1 = {WEIGHT_SUM:g}",
            "slope_rule": f"s_i = {SLOPE_SCALE:g} / a_i",
            "lambda": LAMBDA,
            "bracket_z": list(bracket),
            "iterations": iterations,
        },
    )


# ============================================
# CURVATURE AND RESIDUAL
# ============================================

def transverse_curvature(profile: MomentumProfile) -> np.ndarray:
    """K^T = (λ + b·φ')/2 on the profile grid, using the ODE for φ''"""
    _, dphi, _ = evaluate_profile(profile.grid_array, profile.slopes, profile.x_max, profile.b, profile.lam)
    return 0.5 * (profile.lam + profile.b * dphi)


def soliton_residual(profile: MomentumProfile) -> float:
    """
    sup over the grid of |−φ'' − λ − b·φ'|

    The operator is affine in φ, so it is split into the closed-form
    solution for the profile's own slopes and b, differentiated analytically, and
    the deviation of the stored samples from it, differentiated through a
    Chebyshev interpolant on the Lobatto grid.
    """
    x = profile.grid_array
    b, lam = profile.b, profile.lam
    phi, dphi, ddphi = evaluate_profile(x, profile.slopes, profile.x_max, b, lam)

    reference = -ddphi - lam - b * dphi

    deviation = profile.phi_array - phi
    if np.any(deviation != 0.0):
        fit = Chebyshev.fit(x, deviation, deg=len(x) - 1, domain=[0.0, profile.x_max])
        linear = -fit.deriv(2)(x) - b * fit.deriv(1)(x)
    else:
        linear = np.zeros_like(x)
    return float(np.max(np.abs(reference + linear)))


def reversed_profile(profile: MomentumProfile) -> MomentumProfile:
    """The same metric read with x ↦ x_max − x (weights swapped, b ↦ −b)"""
    grid = profile.x_max - profile.grid_array[::-1]
    grid[0] = 0.0
    return profile.model_copy(update={
        "weights": profile.weights[::-1],
        "normalized_weights": profile.normalized_weights[::-1],
        "slopes": profile.slopes[::-1],
        "grid": tuple(grid),
        "phi": tuple(profile.phi_array[::-1]),
        "b": -profile.b,
    })


# ============================================
# METRIC PACKAGING
# ============================================

def attach_metric(profile: MomentumProfile, xi, quad_points: int = 64) -> LinkMetric:
    """
    Package the soliton as integration data on the link

    Basic integrals over M reduce to ∫₀^{x_max} F(x) dx times the fiber length
    and the θ period. Scalar curvatures: R^T = λ + b·φ', R = R^T − 2.

    Args:
        profile: Solved profile
        xi: Reeb vector whose weights the profile must match (up to scale)
        quad_points: Gauss–Legendre points on [0, x_max]
    """
    coeffs = xi.coeffs if isinstance(xi, ReebVector) else tuple(float(a) for a in xi)
    if len(coeffs) != 2:
        raise InvalidInputError(f"soliton metric needs a 2-component Reeb vector, got {len(coeffs)}")
    expected, _ = calibrate_weights(*coeffs)
    if any(abs(e - w) > WEIGHT_MATCH_TOL * max(1.0, abs(w))
           for e, w in zip(expected, profile.normalized_weights)):
        raise InvalidInputError(
            f"weight mismatch: profile solved for {profile.weights[0]},{profile.weights[1]} "
            f"but Reeb vector is {coeffs[0]},{coeffs[1]}"
        )

    t, w = roots_legendre(quad_points)
    half = profile.x_max / 2.0
    nodes = half * (t + 1.0)
    weights = w * half * FIBER_LENGTH * ANGLE_PERIOD

    b, lam = profile.b, profile.lam
    phi, dphi, _ = evaluate_profile(nodes, profile.slopes, profile.x_max, b, lam)
    scalar_t = lam + b * dphi
    return LinkMetric(
        n=1,
        source="soliton",
        nodes=tuple(nodes),
        weights=tuple(weights),
        phi=tuple(phi),
        dphi=tuple(dphi),
        scalar_link=tuple(scalar_t - 2.0),
        scalar_transverse=tuple(scalar_t),
        x_max=profile.x_max,
        fiber_length=FIBER_LENGTH,
        b=b,
    )


def round_metric(n: int) -> LinkMetric:
    """Round S^{2n+1}: one node carrying the whole volume, R^T = 4n(n+1), R = 2n(2n+1)"""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    scalar_t = 4.0 * n * (n + 1)
    return LinkMetric(
        n=n,
        source="round",
        nodes=(0.0,),
        weights=(2.0 * math.pi ** (n + 1) / math.factorial(n),),
        phi=(0.0,),
        dphi=(0.0,),
        scalar_link=(scalar_t - 2.0 * n,),
        scalar_transverse=(scalar_t,),
        fiber_length=FIBER_LENGTH,
        b=0.0,
    )


def soliton_potential_sign(profile: MomentumProfile, quad_points: int = 64, tol: float = 1e-6) -> List[int]:
    """
    Signs σ for which f = σ·b·x is a W-minimizer

    Evaluates the minimizer equation under both conventions and returns the
    passing signs; both pass only in the Einstein case.
    """
    from .entropy import minimizer_spread, normalize, soliton_datum

    passing = []
    for sign in (-1, 1):
        datum = normalize(soliton_datum(profile, sign=sign, quad_points=quad_points))
        if minimizer_spread(datum) < tol:
            passing.append(sign)
    if len(passing) == 2 and not profile.is_einstein:
        logger.warning(f"⚠️ Both potential signs pass for b = {profile.b!r}")
    return passing


# ============================================
# SWEEP
# ============================================

def sweep(ratios: Sequence[float], config=None) -> List[SweepPoint]:
    """
    Solve and certify the soliton for weights (1, r) over the given ratios

    Args:
        ratios: Values of a₁/a₀
        config: RunConfig (soliton and quadrature settings)

    Returns:
        One SweepPoint per ratio
    """
    from .entropy import entropy_volume_bound, mu_of_soliton
    from .quadrature import WeightedSphereLink
    from .reeb_cone import normalize_to_slice
    from .volume_futaki import futaki
    from ..core.config import RunConfig

    config = config or RunConfig()
    link = WeightedSphereLink.from_config(config, n=1)
    points = []
    for ratio in ratios:
        profile = solve_soliton(1.0, float(ratio), config.soliton)
        xi = normalize_to_slice((1.0, float(ratio)))
        fut = futaki(link, xi, (1.0, -1.0))
        if profile.is_einstein:
            agrees = abs(fut) < 1e-10
        else:
            agrees = np.sign(profile.b) == np.sign(fut)
        mu = mu_of_soliton(profile, config.soliton)
        vol = attach_metric(profile, xi, config.soliton.quad_points).volume
        points.append(SweepPoint(
            ratio=float(ratio),
            a0=1.0,
            a1=float(ratio),
            b=profile.b,
            x_max=profile.x_max,
            residual=soliton_residual(profile),
            min_curvature=float(transverse_curvature(profile).min()),
            futaki=fut,
            sign_agrees=bool(agrees),
            mu=mu,
            volume=vol,
            bound_ok=entropy_volume_bound(vol, mu, 1),
        ))
        logger.debug(f"Sweep ratio {ratio:.4g}: b = {profile.b:.6g}, min K^T = {points[-1].min_curvature:.4g}")
    logger.info(f"✅ Soliton sweep over {len(points)} weight ratios")
    return points
