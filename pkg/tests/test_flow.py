"""
Tests for the volume flow, the Newton minimizer and the properness probe
"""
import math

import numpy as np
import pytest

from src.core.config import FlowConfig, MinimizeConfig
from src.core.errors import BoundaryProximityError, ConvergenceError, InvalidInputError
from src.reeb_engine import entropy, flow, soliton_ode
from src.reeb_engine.volume_futaki import volume
from src.storage.models import TerminationReason

pytestmark = pytest.mark.integration


class TestRunFlow:
    def test_converges_to_round_point(self, link1):
        trajectory = flow.run_flow(link1, (0.5, 1.5), FlowConfig())
        assert trajectory.terminated_by is TerminationReason.GRADIENT_TOLERANCE
        np.testing.assert_allclose(trajectory.final.reeb.array, [1.0, 1.0], atol=1e-8)
        assert trajectory.final.volume == pytest.approx(2 * math.pi ** 2, rel=1e-12)

    def test_converges_in_dimension_two(self, link2):
        trajectory = flow.run_flow(link2, (0.2, 0.8, 2.0), FlowConfig())
        assert trajectory.terminated_by is TerminationReason.GRADIENT_TOLERANCE
        np.testing.assert_allclose(trajectory.final.reeb.array, 1.0, atol=1e-6)

    def test_converges_in_dimension_three(self, link3):
        trajectory = flow.run_flow(link3, (0.4, 0.7, 1.3, 1.6), FlowConfig())
        assert trajectory.terminated_by is TerminationReason.GRADIENT_TOLERANCE
        np.testing.assert_allclose(trajectory.final.reeb.array, 1.0, atol=1e-6)

    def test_volume_is_non_increasing(self, link2):
        trajectory = flow.run_flow(link2, (0.3, 1.0, 1.7), FlowConfig(t_max=2.0))
        volumes = trajectory.volumes()
        assert (np.diff(volumes) <= 1e-13 * volumes[:-1]).all()

    def test_every_state_stays_on_the_slice(self, link2):
        trajectory = flow.run_flow(link2, (0.3, 1.0, 1.7), FlowConfig(t_max=0.5))
        for state in trajectory.states:
            assert math.fsum(state.reeb.coeffs) == pytest.approx(3.0, rel=1e-13)
            assert min(state.reeb.coeffs) > 0

    def test_max_time_termination(self, link1):
        trajectory = flow.run_flow(link1, (0.2, 1.8), FlowConfig(t_max=0.05))
        assert trajectory.terminated_by is TerminationReason.MAX_TIME
        assert trajectory.final.t == pytest.approx(0.05)

    def test_step_size_never_exceeds_dt0(self, link1):
        trajectory = flow.run_flow(link1, (0.5, 1.5), FlowConfig(dt0=0.02, t_max=1.0))
        assert all(s.dt <= 0.02 for s in trajectory.states[1:])

    def test_on_state_hook_sees_every_state(self, link1):
        seen = []
        trajectory = flow.run_flow(link1, (0.5, 1.5), FlowConfig(t_max=0.1), on_state=seen.append)
        assert len(seen) == len(trajectory.states)

    def test_start_inside_guard_rejected(self, link1):
        with pytest.raises(BoundaryProximityError):
            flow.run_flow(link1, (1e-7, 2.0), FlowConfig())

    def test_flow_step_rejects_nonpositive_dt(self, link1):
        state = flow.run_flow(link1, (0.5, 1.5), FlowConfig(t_max=0.01)).states[0]
        with pytest.raises(InvalidInputError):
            flow.flow_step(link1, state, 0.0)

    def test_large_step_is_halved(self, link1):
        state = flow.run_flow(link1, (0.05, 1.95), FlowConfig(t_max=0.01)).states[0]
        new = flow.flow_step(link1, state, 10.0)
        assert new.dt < 10.0
        assert new.volume <= state.volume


class TestMinimize:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_minimizer_is_all_ones(self, links, n):
        start = np.linspace(0.3, 1.7, n + 1)
        xi = flow.minimize_volume(links[n], start, MinimizeConfig())
        np.testing.assert_allclose(xi.array, 1.0, atol=1e-9)

    def test_callback_records_decreasing_volume(self, link2):
        iterates = []
        flow.minimize_volume(link2, (0.2, 0.8, 2.0), callback=lambda *args: iterates.append(args))
        volumes = [v for _, _, v, _ in iterates]
        assert iterates[0][0] == 0
        assert all(b <= a * (1 + 1e-13) for a, b in zip(volumes, volumes[1:]))

    def test_iteration_limit(self, link1):
        with pytest.raises(ConvergenceError):
            flow.minimize_volume(link1, (0.05, 1.95), MinimizeConfig(grad_tol=1e-14, max_iter=1))

    def test_agrees_with_flow(self, link1):
        newton = flow.minimize_volume(link1, (0.5, 1.5))
        flowed = flow.run_flow(link1, (0.5, 1.5), FlowConfig()).final.reeb
        np.testing.assert_allclose(newton.array, flowed.array, atol=1e-6)

    @pytest.mark.slow
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_agrees_with_flow_from_random_starts(self, links, n):
        rng = np.random.default_rng(20 + n)
        floor = 0.2
        for _ in range(10):
            start = floor + (n + 1) * (1 - floor) * rng.dirichlet(np.ones(n + 1))
            newton = flow.minimize_volume(links[n], start)
            flowed = flow.run_flow(links[n], start, FlowConfig()).final.reeb
            np.testing.assert_allclose(newton.array, flowed.array, atol=1e-5)


class TestStraightLine:
    def test_volume_non_increasing_along_segment(self, link2):
        trajectory = flow.straight_line(link2, (0.2, 1.0, 1.8))
        assert trajectory.terminated_by is TerminationReason.STRAIGHT_LINE
        volumes = trajectory.volumes()
        assert (np.diff(volumes) <= 1e-12 * volumes[:-1]).all()
        np.testing.assert_allclose(trajectory.final.reeb.array, 1.0, atol=1e-9)

    def test_steps_validated(self, link1):
        with pytest.raises(InvalidInputError):
            flow.straight_line(link1, (0.5, 1.5), target=(1.0, 1.0), steps=0)


class TestProperness:
    def test_probe_point(self):
        xi = flow.probe_point(2, 1, 0.3)
        assert xi.coeffs == pytest.approx((1.35, 0.3, 1.35))

    @pytest.mark.parametrize("eps", [0.0, 2.0, -0.1])
    def test_probe_eps_range(self, eps):
        with pytest.raises(InvalidInputError):
            flow.probe_point(1, 0, eps)

    def test_relative_volume_blows_up(self, link1):
        table = flow.properness_probe(link1, 0, [0.3, 0.1, 0.03, 0.01])
        relative = [v / link1.total_mass for _, v in table]
        assert all(b > a for a, b in zip(relative, relative[1:]))
        assert relative[-1] == pytest.approx(50.251, abs=1e-3)

    def test_probe_in_higher_dimension(self, link2):
        table = flow.properness_probe(link2, 2, [0.3, 0.1])
        assert table[1][1] > table[0][1] > volume(link2, (1.0, 1.0, 1.0))


class TestEntropyAlongFlow:
    def test_attach_mu_fills_sampled_states(self, link1, soliton_config):
        trajectory = flow.run_flow(link1, (0.5, 1.5), FlowConfig(t_max=0.5))
        with_mu = flow.attach_mu(trajectory, samples=4, config=soliton_config)
        mus = flow.sampled_mus(with_mu)
        assert 2 <= len(mus) <= 4
        assert with_mu.states[0].mu is not None and with_mu.final.mu is not None

    def test_entropy_lower_away_from_round_point(self, soliton_config):
        off = entropy.mu_of_soliton(soliton_ode.solve_soliton(0.9, 1.1), soliton_config)
        round_ = entropy.mu_of_soliton(soliton_ode.solve_soliton(1.0, 1.0), soliton_config)
        assert off <= round_

    def test_entropy_non_decreasing_along_flow(self, link1, soliton_config):
        trajectory = flow.run_flow(link1, (0.5, 1.5), FlowConfig())
        mus = [mu for _, mu in flow.sampled_mus(flow.attach_mu(trajectory, samples=10, config=soliton_config))]
        assert len(mus) >= 5
        assert all(b >= a - 1e-8 for a, b in zip(mus, mus[1:]))
        assert mus[-1] == pytest.approx(entropy.w_link(entropy.round_datum(1)), rel=1e-8)

    def test_attach_mu_needs_n_one(self, link2):
        trajectory = flow.run_flow(link2, (0.5, 1.0, 1.5), FlowConfig(t_max=0.01))
        with pytest.raises(InvalidInputError, match="n = 1"):
            flow.attach_mu(trajectory)
