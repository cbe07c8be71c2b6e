"""
Tests for the W and μ functionals, the cone integral and the volume bound
"""
import math

import numpy as np
import pytest
from scipy.integrate import quad

from src.core.errors import InvalidInputError
from src.reeb_engine import entropy, soliton_ode


@pytest.mark.unit
class TestRoundSphere:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_constant_datum_is_normalized(self, n):
        datum = entropy.round_datum(n)
        assert entropy.is_normalized(datum)
        assert entropy.mass(datum) == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("n", [1, 2])
    def test_w_on_round_sphere(self, n):
        volume = 2 * math.pi ** (n + 1) / math.factorial(n)
        expected = 2 * n * (2 * n + 1) + 4 * (n + 1) * math.log(volume)
        assert entropy.w_link(entropy.round_datum(n)) == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_cone_to_link_ratio(self, n):
        datum = entropy.round_datum(n)
        ratio = entropy.w_cone(datum) / entropy.w_link(datum)
        assert ratio == pytest.approx(entropy.cone_ratio(n), rel=1e-12)

    def test_cone_ratio_values(self):
        assert entropy.cone_ratio(1) == 4.0
        assert entropy.cone_ratio(2) == 12.0

    @pytest.mark.parametrize("n", [1, 2])
    def test_cone_mass(self, n):
        assert entropy.cone_mass(entropy.round_datum(n)) == pytest.approx(2 ** (n + 1) * math.factorial(n + 1))

    def test_unnormalized_datum_rejected(self):
        datum = entropy.constant_datum(soliton_ode.round_metric(1), value=0.0)
        with pytest.raises(InvalidInputError, match="not normalized"):
            entropy.w_link(datum)


@pytest.mark.unit
@pytest.mark.parametrize("k", [0, 1, 2, 3, 5])
def test_gaussian_moments(k):
    numeric, _ = quad(lambda r: math.exp(-r * r / 2) * r ** (2 * k + 1), 0, math.inf)
    assert entropy.gaussian_moment(k) == pytest.approx(numeric, rel=1e-10)


@pytest.mark.unit
class TestSolitonEntropy:
    @pytest.fixture(scope="class")
    def profile(self):
        return soliton_ode.solve_soliton(1.0, 2.0)

    def test_potential_sign_convention(self, profile):
        assert soliton_ode.soliton_potential_sign(profile) == [-1]

    def test_both_signs_pass_when_einstein(self):
        assert soliton_ode.soliton_potential_sign(soliton_ode.solve_soliton(1.0, 1.0)) == [-1, 1]

    def test_minimizer_equation_holds(self, profile):
        datum = entropy.normalize(entropy.soliton_datum(profile))
        A = entropy.best_fit_A(datum)
        assert entropy.minimizer_residual(datum, A) < 1e-9
        assert A == pytest.approx(entropy.w_link(datum), rel=1e-10)

    def test_soliton_identity_with_transverse_curvature(self, profile):
        datum = entropy.normalize(entropy.soliton_datum(profile))
        a_transverse = entropy.best_fit_A(datum, "transverse")
        assert a_transverse == pytest.approx(entropy.w_link(datum) + 2, rel=1e-10)
        assert entropy.soliton_identity_residual(datum, a_transverse) < 1e-9

    def test_cone_minimizer_equation_vanishes(self, profile):
        datum = entropy.normalize(entropy.soliton_datum(profile))
        A = entropy.best_fit_A(datum)
        assert entropy.cone_minimizer_residual(datum, A) < 1e-8

    def test_cone_expression_scales_link_expression(self, profile):
        datum = entropy.normalize(entropy.soliton_datum(profile))
        A = entropy.best_fit_A(datum) + 1.0
        cone = entropy.cone_minimizer_expression(datum, A)
        link = entropy.minimizer_expression(datum) - A
        r2, _ = entropy._radial_rule()
        assert cone.shape == (entropy.RADIAL_POINTS, len(datum.f))
        np.testing.assert_allclose(cone * r2[:, None], np.broadcast_to(link, cone.shape), rtol=1e-12, atol=1e-12)

    def test_cone_minimizer_detects_wrong_constant(self, profile):
        datum = entropy.normalize(entropy.soliton_datum(profile))
        A = entropy.best_fit_A(datum)
        assert entropy.cone_minimizer_residual(datum, A + 1.0) > 1.0

    def test_report(self, profile, soliton_config):
        report = entropy.entropy_report(profile, soliton_config)
        assert report["mu"] == report["W"]
        assert report["bound_ok"]
        assert report["cone_ratio"] == pytest.approx(4.0, rel=1e-10)
        assert report["cone_residual"] < 1e-8
        assert report["potential_sign"] == [-1]
        assert report["V"] == pytest.approx(4 * math.pi ** 2 * profile.x_max)

    def test_einstein_mu_matches_round_value(self):
        mu = entropy.mu_of_soliton(soliton_ode.solve_soliton(1.0, 1.0))
        assert mu == pytest.approx(entropy.w_link(entropy.round_datum(1)), rel=1e-12)

    def test_potential_is_normalized(self, profile, soliton_config):
        metric = soliton_ode.attach_metric(profile, profile.weights, soliton_config.quad_points)
        f = entropy.soliton_potential(profile, np.asarray(metric.nodes), soliton_config)
        assert np.asarray(metric.weights) @ np.exp(-f) == pytest.approx(1.0, rel=1e-13)

    def test_bad_curvature_name(self, profile):
        datum = entropy.normalize(entropy.soliton_datum(profile))
        with pytest.raises(InvalidInputError):
            entropy.minimizer_expression(datum, "ricci")


@pytest.mark.unit
def test_volume_bound():
    assert entropy.entropy_volume_bound(1.0, 0.0, 1)
    assert not entropy.entropy_volume_bound(1e-6, 100.0, 1)
    with pytest.raises(InvalidInputError):
        entropy.entropy_volume_bound(0.0, 1.0, 1)


@pytest.mark.unit
@pytest.mark.parametrize("n", [1, 2, 3])
def test_cone_minimizer_on_round_sphere(n):
    datum = entropy.round_datum(n)
    A = entropy.best_fit_A(datum)
    assert entropy.cone_minimizer_residual(datum, A) < 1e-10
