"""
Tests for the Reeb cone, the normalized slice and the deformations
"""
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core.errors import InvalidInputError, NotInReebConeError
from src.reeb_engine.reeb_cone import (
    contact_pairing,
    homothetic,
    min_link_pairing,
    normalization_charge,
    normalize_to_slice,
    project_tangent,
    reeb_membership,
    require_membership,
    tangent_basis,
)
from src.storage.models import ReebVector, TangentVector

positive = st.floats(min_value=0.05, max_value=20.0, allow_nan=False, allow_infinity=False)


@pytest.mark.unit
class TestContactPairing:
    def test_round_reeb_gives_one_everywhere(self):
        z = np.array([0.6, 0.8j])
        assert contact_pairing((1.0, 1.0), z) == pytest.approx(1.0, abs=1e-15)

    def test_weighted_pairing_on_coordinate_circle(self):
        assert contact_pairing((0.5, 1.5), [0.0, 1j]) == pytest.approx(1.5)

    def test_rejects_point_off_the_sphere(self):
        with pytest.raises(InvalidInputError, match="unit sphere"):
            contact_pairing((1.0, 1.0), [1.0, 1.0])

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(InvalidInputError, match="coordinates"):
            contact_pairing((1.0, 1.0, 1.0), [1.0, 0.0])

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_minimum_over_dense_points_is_smallest_weight(self, n):
        rng = np.random.default_rng(100 + n)
        steps = 12
        lattice = np.array([c for c in itertools.product(range(steps + 1), repeat=n + 1)
                            if sum(c) == steps], dtype=float) / steps
        phases = np.exp(2j * np.pi * rng.random(lattice.shape))
        points = np.sqrt(lattice) * phases
        for _ in range(20):
            coeffs = rng.uniform(0.05, 3.0, n + 1)
            lowest = min(contact_pairing(coeffs, z) for z in points)
            assert abs(lowest - coeffs.min()) < 1e-6
            assert lowest == pytest.approx(min_link_pairing(coeffs), abs=1e-12)


@pytest.mark.unit
class TestMembership:
    def test_positive_vector_is_in_cone(self):
        assert reeb_membership((0.1, 2.0, 0.9))
        assert min_link_pairing((0.1, 2.0, 0.9)) == pytest.approx(0.1)

    @pytest.mark.parametrize("coeffs", [(0.0, 2.0), (-0.5, 2.5), (1.0, 1.0, -1e-9)])
    def test_boundary_and_outside_rejected(self, coeffs):
        assert not reeb_membership(coeffs)
        with pytest.raises(NotInReebConeError):
            require_membership(coeffs)

    def test_non_finite_coefficients_rejected(self):
        with pytest.raises(ValueError):
            ReebVector.of([1.0, float('nan')])


@pytest.mark.unit
class TestSlice:
    def test_normalize_hits_level(self):
        xi = normalize_to_slice((1.0, 3.0))
        assert xi.coeffs == pytest.approx((0.5, 1.5))
        assert normalization_charge(xi) == pytest.approx(2.0)

    def test_point_on_slice_is_unchanged(self):
        xi = ReebVector.of((0.5, 1.5))
        assert normalize_to_slice(xi) is xi

    def test_homothetic_scales_inverse(self):
        assert homothetic((2.0, 4.0), 2.0).coeffs == (1.0, 2.0)
        with pytest.raises(InvalidInputError):
            homothetic((1.0, 1.0), 0.0)

    def test_projection_is_tangent(self):
        y = project_tangent((3.0, 1.0, -1.0))
        assert isinstance(y, TangentVector)
        assert y.is_tangent()
        assert y.coeffs == pytest.approx((2.0, 0.0, -2.0))

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_tangent_basis_is_orthonormal_and_tangent(self, n):
        basis = tangent_basis(n)
        assert basis.shape == (n + 1, n)
        np.testing.assert_allclose(basis.T @ basis, np.eye(n), atol=1e-14)
        np.testing.assert_allclose(basis.sum(axis=0), 0.0, atol=1e-14)


@pytest.mark.property
@settings(max_examples=200, deadline=None)
@given(st.lists(positive, min_size=2, max_size=5), st.floats(min_value=0.1, max_value=10.0))
def test_normalization_is_scale_invariant(coeffs, scale):
    a = normalize_to_slice(coeffs)
    b = normalize_to_slice([scale * c for c in coeffs])
    assert math.fsum(a.coeffs) == pytest.approx(len(coeffs), rel=1e-12)
    np.testing.assert_allclose(a.array, b.array, rtol=1e-12)
