"""
W and μ Entropy for Basic Data

W(g, f) = ∫_M e^{-f}(R + |∇f|² + 4(n+1)f) dv_g over normalized basic f
(∫_M e^{-f} dv_g = 1), its cone counterpart with the Gaussian weight
e^{-r²/2}, the minimizer equation 2Δf − |∇f|² + R + 4(n+1)f = A and the
volume bound V ≥ exp(μ/(4(n+1)) − 2n). On the cone the minimizer equation
reads Q(f) = 0 with every term carrying a factor r^{-2}.

μ is only evaluated where the minimizer is known: constant f on the round
sphere and the soliton potential at n = 1.
"""
import logging
import math
from typing import Any, Dict, Optional

import numpy as np
from scipy.special import roots_genlaguerre

from .soliton_ode import attach_metric, round_metric, soliton_potential_sign
from ..core.config import SolitonConfig
from ..core.errors import InvalidInputError
from ..storage.models import EntropyDatum, LinkMetric, MomentumProfile

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-10
RADIAL_POINTS = 8
CURVATURES = ("link", "transverse")


# ============================================
# DATA
# ============================================

def constant_datum(metric: LinkMetric, value: Optional[float] = None, label: str = "constant") -> EntropyDatum:
    """Constant f; the default value is the normalized one, log Vol"""
    value = math.log(metric.volume) if value is None else float(value)
    size = len(metric.nodes)
    return EntropyDatum(metric=metric, f=(value,) * size, df=(0.0,) * size, ddf=(0.0,) * size, label=label)


def round_datum(n: int) -> EntropyDatum:
    """Round S^{2n+1} with the normalized constant f = log Vol(S^{2n+1})"""
    return constant_datum(round_metric(n), label="round")


def soliton_datum(profile: MomentumProfile, sign: int = -1, quad_points: int = 64) -> EntropyDatum:
    """
    f = σ·b·x on the soliton metric (not yet normalized)

    σ = −1 is the convention under which f solves the minimizer equation.
    """
    if sign not in (-1, 1):
        raise InvalidInputError(f"sign must be -1 or 1, got {sign}")
    metric = attach_metric(profile, profile.weights, quad_points)
    x = np.asarray(metric.nodes)
    slope = sign * profile.b
    return EntropyDatum(
        metric=metric,
        f=tuple(slope * x),
        df=(slope,) * len(x),
        ddf=(0.0,) * len(x),
        label=f"soliton(sign={sign:+d})",
    )


def _arrays(datum: EntropyDatum) -> Dict[str, np.ndarray]:
    data = datum.metric.arrays()
    data.update(f=np.asarray(datum.f), df=np.asarray(datum.df), ddf=np.asarray(datum.ddf))
    return data


def mass(datum: EntropyDatum) -> float:
    """∫_M e^{-f} dv_g"""
    d = _arrays(datum)
    return float(d['weights'] @ np.exp(-d['f']))


def normalize(datum: EntropyDatum) -> EntropyDatum:
    """Shift f by a constant so that ∫_M e^{-f} dv_g = 1"""
    shift = math.log(mass(datum))
    return datum.model_copy(update={"f": tuple(np.asarray(datum.f) + shift)})


def is_normalized(datum: EntropyDatum, tol: float = NORMALIZATION_TOL) -> bool:
    return abs(mass(datum) - 1.0) <= tol


def _require_normalized(datum: EntropyDatum):
    m = mass(datum)
    if abs(m - 1.0) > NORMALIZATION_TOL:
        raise InvalidInputError(f"datum '{datum.label}' is not normalized: ∫e^(-f) = {m!r}")


def _gradient_sq(d: Dict[str, np.ndarray]) -> np.ndarray:
    """|∇f|² = φ·f'² for basic f in momentum coordinates"""
    return d['phi'] * d['df'] ** 2


def _laplacian(d: Dict[str, np.ndarray]) -> np.ndarray:
    """Δf = (φf')' = φ'f' + φf''"""
    return d['dphi'] * d['df'] + d['phi'] * d['ddf']


def _scalar(d: Dict[str, np.ndarray], curvature: str) -> np.ndarray:
    if curvature not in CURVATURES:
        raise InvalidInputError(f"curvature must be one of {', '.join(CURVATURES)}, got '{curvature}'")
    return d['scalar_link'] if curvature == "link" else d['scalar_transverse']


# ============================================
# FUNCTIONALS
# ============================================

def w_link(datum: EntropyDatum) -> float:
    """
    W(g, f) on the link

    Args:
        datum: Normalized basic datum

    Returns:
        ∫_M e^{-f}(R + |∇f|² + 4(n+1)f) dv_g
    """
    _require_normalized(datum)
    d = _arrays(datum)
    n = datum.n
    integrand = np.exp(-d['f']) * (d['scalar_link'] + _gradient_sq(d) + 4 * (n + 1) * d['f'])
    return float(d['weights'] @ integrand)


def gaussian_moment(k: int) -> float:
    """∫₀^∞ e^{-r²/2} r^{2k+1} dr = 2^k·k!"""
    if k < 0:
        raise InvalidInputError(f"moment order must be >= 0, got {k}")
    return float(2 ** k * math.factorial(k))


def cone_ratio(n: int) -> float:
    """(2n+2)·2^{n-1}·(n−1)!"""
    return (2 * n + 2) * 2.0 ** (n - 1) * math.factorial(n - 1)


def _radial_rule():
    """Gauss–Laguerre nodes in s = r²/2, returned as (r², weights)"""
    s, ws = roots_genlaguerre(RADIAL_POINTS, 0.0)
    return 2.0 * s, ws


def w_cone(datum: EntropyDatum) -> float:
    """
    W on the cone X = M × ℝ₊ by explicit radial quadrature

    Uses dV_X = 2(n+1)r^{2n+1}dr∧dv_g, R_X = r^{-2}R and |∇_X f|² = r^{-2}|∇f|².
    The radial variable is s = r²/2 on a Gauss–Laguerre rule, and the
    cone integrand is summed over the (radial × link) product grid.
    """
    _require_normalized(datum)
    d = _arrays(datum)
    n = datum.n

    r2, ws = _radial_rule()
    # e^{-r²/2} r^{2n+1} dr = e^{-s} r^{2n} ds
    radial_weight = ws * r2 ** n

    link_curv = np.exp(-d['f']) * (d['scalar_link'] + _gradient_sq(d))
    link_pot = np.exp(-d['f']) * (2.0 + 2.0 / n) * d['f']
    integrand = link_curv[None, :] / r2[:, None] + link_pot[None, :]
    total = radial_weight @ integrand @ d['weights']
    return float(2 * (n + 1) * total)


def cone_mass(datum: EntropyDatum) -> float:
    """∫_X e^{-r²/2-f} dV_X, which is 2^{n+1}(n+1)! for normalized f"""
    n = datum.n
    return 2 * (n + 1) * gaussian_moment(n) * mass(datum)


def minimizer_expression(datum: EntropyDatum, curvature: str = "link") -> np.ndarray:
    """2Δf − |∇f|² + R + 4(n+1)f at the integration nodes"""
    d = _arrays(datum)
    n = datum.n
    return 2 * _laplacian(d) - _gradient_sq(d) + _scalar(d, curvature) + 4 * (n + 1) * d['f']


def minimizer_residual(datum: EntropyDatum, A: float, curvature: str = "link") -> float:
    """sup |2Δf − |∇f|² + R + 4(n+1)f − A|"""
    _require_normalized(datum)
    return float(np.max(np.abs(minimizer_expression(datum, curvature) - A)))


def best_fit_A(datum: EntropyDatum, curvature: str = "link") -> float:
    """Least-squares constant for the minimizer equation"""
    return float(np.mean(minimizer_expression(datum, curvature)))


def minimizer_spread(datum: EntropyDatum, curvature: str = "link") -> float:
    """Grid standard deviation of the minimizer expression relative to its mean magnitude"""
    values = minimizer_expression(datum, curvature)
    scale = abs(float(np.mean(values)))
    return float(np.std(values)) / scale if scale > 0 else float(np.std(values))


def cone_minimizer_expression(datum: EntropyDatum, A: float, curvature: str = "link") -> np.ndarray:
    """
    Q(f) = 2Δ_X f − |∇_X f|² + R_X + 4(n+1)f/r² − A/r² on the (radial × link) grid

    For basic f the radial derivatives vanish, so Δ_X f = r^{-2}Δf and the
    other cone quantities scale the same way.

    Returns:
        Array of shape (radial points, link nodes)
    """
    d = _arrays(datum)
    n = datum.n
    r2, _ = _radial_rule()
    inv = 1.0 / r2[:, None]
    laplacian_x = inv * _laplacian(d)[None, :]
    gradient_x = inv * _gradient_sq(d)[None, :]
    scalar_x = inv * _scalar(d, curvature)[None, :]
    return 2 * laplacian_x - gradient_x + scalar_x + inv * (4 * (n + 1) * d['f'][None, :] - A)


def cone_minimizer_residual(datum: EntropyDatum, A: float, curvature: str = "link") -> float:
    """sup of |Q(f)| over the cone grid"""
    _require_normalized(datum)
    return float(np.max(np.abs(cone_minimizer_expression(datum, A, curvature))))


def entropy_volume_bound(V: float, mu: float, n: int) -> bool:
    """V ≥ exp(μ/(4(n+1)) − 2n)"""
    if not V > 0:
        raise InvalidInputError(f"volume must be > 0, got {V!r}")
    return V >= math.exp(mu / (4 * (n + 1)) - 2 * n)


def soliton_identity_residual(datum: EntropyDatum, mu: float, curvature: str = "transverse") -> float:
    """sup |f − ((μ + |∇f|² + R•)/(4(n+1)) − 2n)| with R• the link or transverse scalar curvature"""
    d = _arrays(datum)
    n = datum.n
    rhs = (mu + _gradient_sq(d) + _scalar(d, curvature)) / (4 * (n + 1)) - 2 * n
    return float(np.max(np.abs(d['f'] - rhs)))


# ============================================
# SOLITON ENTROPY
# ============================================

def mu_of_soliton(profile: MomentumProfile, config: Optional[SolitonConfig] = None) -> float:
    """μ = W(g, f) at the normalized soliton potential"""
    config = config or SolitonConfig()
    datum = normalize(soliton_datum(profile, quad_points=config.quad_points))
    return w_link(datum)


def entropy_report(profile: MomentumProfile, config: Optional[SolitonConfig] = None) -> Dict[str, Any]:
    """
    Entropy summary for one soliton

    Returns:
        {V, W, mu, A, A_transverse, bound_ok, bound_transverse_ok, cone_ratio,
         spread, cone_residual, identity_residual, potential_sign}
    """
    config = config or SolitonConfig()
    datum = normalize(soliton_datum(profile, quad_points=config.quad_points))
    n = datum.n
    volume = datum.metric.volume
    w = w_link(datum)
    a_link = best_fit_A(datum, "link")
    a_transverse = best_fit_A(datum, "transverse")
    report = {
        "weights": list(profile.weights),
        "b": profile.b,
        "V": volume,
        "W": w,
        "mu": w,
        "A": a_link,
        "A_transverse": a_transverse,
        "bound_ok": entropy_volume_bound(volume, w, n),
        "bound_transverse_ok": entropy_volume_bound(volume, a_transverse, n),
        "cone_ratio": w_cone(datum) / w if w != 0 else float('nan'),
        "spread": minimizer_spread(datum, "link"),
        "cone_residual": cone_minimizer_residual(datum, a_link, "link"),
        "identity_residual": soliton_identity_residual(datum, a_transverse, "transverse"),
        "potential_sign": soliton_potential_sign(profile, config.quad_points),
    }
    logger.debug(f"Entropy for weights {profile.weights}: mu = {w:.12g}, A = {a_link:.12g}")
    return report


def soliton_potential(profile: MomentumProfile, x, config: Optional[SolitonConfig] = None) -> np.ndarray:
    """Normalized soliton potential f(x) = −b·x + c at arbitrary momentum points"""
    config = config or SolitonConfig()
    shift = math.log(mass(soliton_datum(profile, quad_points=config.quad_points)))
    return -profile.b * np.asarray(x, dtype=float) + shift
