"""
Volume-Decreasing Reeb Flow

Finite-dimensional realization of the Reeb-field deformation: negative
gradient flow of the volume on the normalized slice, a damped Newton
minimizer, the straight-line deformation and the properness probe.
The torus of the weighted sphere is already maximal, so a trajectory is a
single smooth segment.
"""
import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .quadrature import WeightedSphereLink
from .reeb_cone import VectorLike, normalize_to_slice, tangent_basis
from .volume_futaki import _full_gradient, hessian_volume, volume
from ..core.config import FlowConfig, MinimizeConfig
from ..core.errors import BoundaryProximityError, ConvergenceError, InvalidInputError, StepFailureError
from ..storage.models import FlowState, FlowTrajectory, ReebVector, TerminationReason

logger = logging.getLogger(__name__)

# Relative slack for "volume did not increase" (quadrature round-off)
VOLUME_SLACK = 1e-13
ARMIJO = 1e-4
FRACTION_TO_BOUNDARY = 0.99
MAX_BACKTRACKS = 60

IterateCallback = Callable[[int, ReebVector, float, float], None]


# ============================================
# FLOW
# ============================================

def _descent_field(link: WeightedSphereLink, a: np.ndarray) -> np.ndarray:
    g = _full_gradient(link, a)
    return -(g - g.mean())


def _state(link: WeightedSphereLink, t: float, xi: ReebVector, dt: Optional[float] = None) -> FlowState:
    field = _descent_field(link, xi.array)
    return FlowState(
        t=t,
        reeb=xi,
        volume=volume(link, xi),
        grad_norm=float(np.linalg.norm(field)),
        dt=dt,
    )


def _rk4(link: WeightedSphereLink, a: np.ndarray, dt: float, guard: float) -> Optional[np.ndarray]:
    """One RK4 step, or None if a stage leaves the guarded interior"""
    stages = []
    point = a
    for weight in (0.5, 0.5, 1.0, None):
        if point.min() < guard:
            return None
        k = _descent_field(link, point)
        stages.append(k)
        if weight is not None:
            point = a + weight * dt * k
    k1, k2, k3, k4 = stages
    out = a + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return out if out.min() >= guard else None


def flow_step(
    link: WeightedSphereLink,
    state: FlowState,
    dt: float,
    boundary_guard: float = 1e-6,
    max_halvings: int = 20,
) -> FlowState:
    """
    Advance one RK4 step of dξ/dt = −grad Vol(ξ)

    The step is re-projected to the slice. A step that raises the volume or
    leaves the guarded interior is retried at half the step size. Accepted
    steps satisfy Vol(new) ≤ Vol(old)·(1 + VOLUME_SLACK): near the minimizer
    the true decrease falls below round-off, so a relative rise of at most
    1e-13 is accepted there and strict decrease holds only above that level.

    Args:
        link: Link
        state: Current state
        dt: Proposed step size (> 0)
        boundary_guard: Smallest admissible coefficient
        max_halvings: Retries before giving up

    Returns:
        New state; its ``dt`` is the step actually taken

    Raises:
        BoundaryProximityError: every retry left the guarded interior
        StepFailureError: every retry increased the volume
    """
    if not dt > 0:
        raise InvalidInputError(f"dt must be > 0, got {dt!r}")
    a = state.reeb.array
    tried = dt
    last_failure = "volume"
    for _ in range(max_halvings + 1):
        proposal = _rk4(link, a, tried, boundary_guard)
        if proposal is None:
            last_failure = "guard"
        else:
            xi = normalize_to_slice(proposal)
            candidate = _state(link, state.t + tried, xi, dt=tried)
            if candidate.volume <= state.volume * (1.0 + VOLUME_SLACK):
                return candidate
            last_failure = "volume"
        tried /= 2.0

    if last_failure == "guard":
        raise BoundaryProximityError(
            f"flow step from {state.reeb} leaves the region min a_i >= {boundary_guard:g} "
            f"after {max_halvings} halvings",
            min_pairing=float(a.min()),
        )
    raise StepFailureError(
        f"flow step from {state.reeb} increased the volume after {max_halvings} halvings (dt={tried * 2:.3g})"
    )


def run_flow(
    link: WeightedSphereLink,
    xi0: VectorLike,
    opts: Optional[FlowConfig] = None,
    on_state: Optional[Callable[[FlowState], None]] = None,
) -> FlowTrajectory:
    """
    Integrate the volume-decreasing flow from ξ₀

    Args:
        link: Link
        xi0: Interior starting Reeb vector (rescaled onto the slice)
        opts: dt0, grad_tol, t_max, boundary_guard, max_halvings
        on_state: Optional hook called with every accepted state

    Returns:
        FlowTrajectory ending at grad_norm < grad_tol or t = t_max
    """
    opts = opts or FlowConfig()
    xi = normalize_to_slice(xi0)
    if xi.array.min() < opts.boundary_guard:
        raise BoundaryProximityError(
            f"flow start {xi} is within {opts.boundary_guard:g} of the cone boundary",
            min_pairing=float(xi.array.min()),
        )

    state = _state(link, 0.0, xi)
    states = [state]
    if on_state:
        on_state(state)
    logger.info(f"🚀 Flow from {xi} (volume {state.volume:.10g}, |grad| {state.grad_norm:.3g})")

    dt = opts.dt0
    reason = TerminationReason.GRADIENT_TOLERANCE
    while state.grad_norm >= opts.grad_tol:
        remaining = opts.t_max - state.t
        if remaining <= 0:
            reason = TerminationReason.MAX_TIME
            break
        try:
            state = flow_step(link, state, min(dt, remaining), opts.boundary_guard, opts.max_halvings)
        except BoundaryProximityError as e:
            logger.warning(f"⚠️ Flow stopped at the boundary guard: {e}")
            reason = TerminationReason.BOUNDARY_GUARD
            break
        except StepFailureError as e:
            logger.warning(f"⚠️ Flow stopped: {e}")
            reason = TerminationReason.STEP_FAILURE
            break
        states.append(state)
        if on_state:
            on_state(state)
        dt = min(opts.dt0, 2.0 * state.dt)

    final = states[-1]
    logger.info(
        f"✅ Flow finished ({reason.value}) after {len(states) - 1} steps at t={final.t:.4g}: "
        f"{final.reeb}, volume {final.volume:.10g}"
    )
    return FlowTrajectory(states=states, terminated_by=reason)


# ============================================
# DIRECT MINIMIZATION
# ============================================

def _max_feasible_step(a: np.ndarray, d: np.ndarray, guard: float) -> float:
    shrinking = d < 0
    if not shrinking.any():
        return 1.0
    limits = (a[shrinking] - guard) / (-d[shrinking])
    return min(1.0, FRACTION_TO_BOUNDARY * float(limits.min()))


def minimize_volume(
    link: WeightedSphereLink,
    xi0: VectorLike,
    opts: Optional[MinimizeConfig] = None,
    boundary_guard: float = 1e-6,
    callback: Optional[IterateCallback] = None,
) -> ReebVector:
    """
    Damped Newton on the slice with backtracking

    Iterates are kept at min a_i >= boundary_guard by shortening the step.

    Args:
        link: Link
        xi0: Interior start (rescaled onto the slice)
        opts: grad_tol and max_iter
        boundary_guard: Smallest admissible coefficient
        callback: Called as callback(iteration, reeb, volume, grad_norm) per iterate

    Returns:
        The volume minimizer

    Raises:
        ConvergenceError: line search exhausted or max_iter reached
    """
    opts = opts or MinimizeConfig()
    xi = normalize_to_slice(xi0)
    a = xi.array
    if a.min() < boundary_guard:
        raise BoundaryProximityError(f"start {xi} is within {boundary_guard:g} of the boundary",
                                     min_pairing=float(a.min()))
    basis = tangent_basis(link.n)

    vol = volume(link, xi)
    for iteration in range(opts.max_iter + 1):
        g = basis.T @ _full_gradient(link, a)
        grad_norm = float(np.linalg.norm(g))
        if callback:
            callback(iteration, xi, vol, grad_norm)
        if grad_norm < opts.grad_tol:
            logger.info(f"✅ Newton converged in {iteration} iterations: {xi} (|grad| {grad_norm:.2e})")
            return xi
        if iteration == opts.max_iter:
            break

        hessian = hessian_volume(link, xi)
        try:
            p = -np.linalg.solve(hessian, g)
        except np.linalg.LinAlgError:
            p = -g
        if p @ g >= 0:
            logger.warning("⚠️ Newton direction is not a descent direction; using steepest descent")
            p = -g
        d = basis @ p
        slope = float(g @ p)

        alpha = _max_feasible_step(a, d, boundary_guard)
        accepted = False
        for _ in range(MAX_BACKTRACKS):
            trial = normalize_to_slice(a + alpha * d)
            trial_vol = volume(link, trial)
            if trial_vol <= vol + ARMIJO * alpha * slope:
                accepted = True
                break
            if abs(trial_vol - vol) <= VOLUME_SLACK * vol:
                # decrease below round-off: accept if the gradient still shrinks
                trial_g = basis.T @ _full_gradient(link, trial.array)
                if np.linalg.norm(trial_g) < grad_norm:
                    accepted = True
                    break
            alpha /= 2.0
        if not accepted:
            raise ConvergenceError(
                f"line search exhausted at {xi} with |grad| = {grad_norm:.3g} (tolerance {opts.grad_tol:g})"
            )
        xi, a, vol = trial, trial.array, trial_vol

    raise ConvergenceError(f"Newton did not reach |grad| < {opts.grad_tol:g} in {opts.max_iter} iterations")


# ============================================
# STRAIGHT LINE AND PROPERNESS
# ============================================

def straight_line(
    link: WeightedSphereLink,
    xi0: VectorLike,
    target: Optional[VectorLike] = None,
    steps: int = 20,
) -> FlowTrajectory:
    """
    Deform along the segment from ξ₀ to the minimizer

    Time is the segment parameter s ∈ [0, 1]. By convexity the volume is
    non-increasing along the segment.
    """
    if steps < 1:
        raise InvalidInputError(f"steps must be >= 1, got {steps}")
    start = normalize_to_slice(xi0)
    end = normalize_to_slice(target) if target is not None else minimize_volume(link, start)
    states = []
    for s in np.linspace(0.0, 1.0, steps + 1):
        xi = normalize_to_slice((1.0 - s) * start.array + s * end.array)
        states.append(_state(link, float(s), xi))
    return FlowTrajectory(states=states, terminated_by=TerminationReason.STRAIGHT_LINE)


def probe_point(n: int, boundary_dir: int, eps: float) -> ReebVector:
    """Slice point with a_i = ε and the rest of the charge shared equally"""
    if not 0 <= boundary_dir <= n:
        raise InvalidInputError(f"boundary direction {boundary_dir} out of range 0..{n}")
    if not 0 < eps < n + 1:
        raise InvalidInputError(f"eps must be in (0, {n + 1}), got {eps!r}")
    coeffs = [(n + 1 - eps) / n] * (n + 1)
    coeffs[boundary_dir] = eps
    return ReebVector.of(coeffs)


def properness_probe(
    link: WeightedSphereLink,
    boundary_dir: int,
    eps_list: Sequence[float],
) -> List[Tuple[float, float]]:
    """
    Volume along a ray toward the cone boundary

    Args:
        link: Link
        boundary_dir: Index i of the coefficient sent to ε
        eps_list: ε values

    Returns:
        [(ε, volume)] in the order given
    """
    table = []
    for eps in eps_list:
        xi = probe_point(link.n, boundary_dir, float(eps))
        table.append((float(eps), volume(link, xi)))
        logger.debug(f"Properness probe eps={eps}: volume {table[-1][1]:.10g}")
    return table


# ============================================
# ENTROPY ALONG A TRAJECTORY
# ============================================

def attach_mu(trajectory: FlowTrajectory, samples: int = 10, config=None) -> FlowTrajectory:
    """
    Fill FlowState.mu at evenly spaced states (n = 1 only)

    μ comes from the soliton at each sampled Reeb vector.
    """
    from .entropy import mu_of_soliton
    from .soliton_ode import solve_soliton

    if trajectory.n != 1:
        raise InvalidInputError(f"soliton entropy is only available for n = 1, got n = {trajectory.n}")
    if samples < 2:
        raise InvalidInputError(f"need at least 2 samples, got {samples}")

    count = len(trajectory.states)
    picks = sorted(set(int(round(k)) for k in np.linspace(0, count - 1, min(samples, count))))
    states = list(trajectory.states)
    for k in picks:
        a0, a1 = states[k].reeb.coeffs
        profile = solve_soliton(a0, a1, config=config)
        states[k] = states[k].model_copy(update={"mu": mu_of_soliton(profile, config=config)})
    logger.info(f"✅ Attached entropy at {len(picks)} trajectory states")
    return FlowTrajectory(states=states, terminated_by=trajectory.terminated_by)


def sampled_mus(trajectory: FlowTrajectory) -> List[Tuple[float, float]]:
    """(t, μ) for the states that carry an entropy value"""
    return [(s.t, s.mu) for s in trajectory.states if s.mu is not None and math.isfinite(s.mu)]
