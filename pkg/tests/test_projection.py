import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.spatial.distance import pdist

from app.algorithms.projection import (choose_target_dim, draw_map, measured_distortion, membership_certificate,
                                       project)
from app.models import InvalidInputError, PointSet, UndefinedCertificateError


class TestChooseTargetDim:
    def test_formula(self):
        # ceil(4 * ln(1000) / 0.25)
        assert choose_target_dim(1000, 0.5, c=4.0) == 111

    def test_default_constant(self):
        assert choose_target_dim(1000, 0.5) == 111

    def test_capped_by_source_dimension(self):
        assert choose_target_dim(1000, 0.5, source_dim=50) == 50

    def test_single_point_needs_one_dimension(self):
        assert choose_target_dim(1, 0.3) == 1

    @pytest.mark.parametrize("eps_prime", [0.0, 1.5])
    def test_eps_out_of_range(self, eps_prime):
        with pytest.raises(InvalidInputError):
            choose_target_dim(100, eps_prime)

    def test_constant_must_be_positive(self):
        with pytest.raises(InvalidInputError):
            choose_target_dim(100, 0.5, c=0.0)


class TestProject:
    def test_map_is_seeded_and_frozen(self):
        first, second = draw_map(6, 3, seed=4), draw_map(6, 3, seed=4)
        assert np.array_equal(first.matrix, second.matrix)
        assert first.matrix.shape == (3, 6)
        with pytest.raises(ValueError):
            first.matrix[0, 0] = 1.0

    def test_rows_map_to_rows(self):
        points = np.random.default_rng(1).standard_normal((7, 6))
        jl_map = draw_map(6, 3, seed=2)
        projected = project(jl_map, PointSet(points))
        assert projected.n == 7
        assert projected.m == 3
        assert_allclose(projected.points[5], jl_map.matrix @ points[5])

    def test_keeps_cache_setting(self):
        projected = project(draw_map(2, 2, seed=0), PointSet(np.eye(2), cache=False))
        assert not projected.cache_enabled

    def test_dimension_mismatch(self, triangle):
        with pytest.raises(InvalidInputError):
            project(draw_map(3, 2, seed=0), triangle)

    def test_bad_dimensions(self):
        with pytest.raises(InvalidInputError):
            draw_map(3, 0, seed=0)


class TestMeasuredDistortion:
    def test_identity(self, square_center):
        assert measured_distortion(square_center, square_center) == 0.0

    def test_scaling(self, square_center):
        doubled = PointSet(square_center.points * 2.0)
        assert measured_distortion(square_center, doubled) == pytest.approx(1.0)

    def test_random_projection_stays_moderate(self):
        ps = PointSet(np.random.default_rng(3).standard_normal((100, 400)))
        projected = project(draw_map(400, 300, seed=3), ps)
        assert measured_distortion(ps, projected) < 0.5

    def test_most_pairs_within_the_chosen_distortion(self):
        target_dim = choose_target_dim(50, 0.5)
        assert target_dim == 63
        for seed in range(3):
            ps = PointSet(np.random.default_rng(seed).standard_normal((50, 200)))
            projected = project(draw_map(200, target_dim, seed=seed), ps)
            ratios = pdist(projected.points) / pdist(ps.points)
            assert np.mean(np.abs(ratios - 1.0) <= 0.5) >= 0.95

    def test_sizes_must_agree(self, triangle, square_center):
        with pytest.raises(InvalidInputError):
            measured_distortion(triangle, square_center)


class TestMembershipCertificate:
    def test_segment(self):
        certificate = membership_certificate(PointSet([[0.0, 0.0], [1.0, 0.0]]), [2.0, 0.0])
        assert certificate.E_ratio == pytest.approx(2.0, rel=1e-5)
        assert certificate.epsilon_bound == pytest.approx(1.0 / 3.0, rel=1e-5)
        assert certificate.d_min == pytest.approx(1.0, rel=1e-6)
        assert certificate.D_max == 2.0
        assert certificate.lower_bound == pytest.approx(1.0 / 16.0, rel=1e-5)
        assert certificate.bound_holds
        assert_allclose(certificate.closest_point, [1.0, 0.0], atol=1e-6)

    def test_single_point_has_unbounded_ratio(self):
        certificate = membership_certificate(PointSet([[0.0, 0.0]]), [1.0, 1.0])
        assert certificate.E_ratio == float("inf")
        assert certificate.epsilon_bound == 1.0
        assert certificate.bound_holds

    def test_inside_point_has_no_certificate(self, triangle):
        with pytest.raises(UndefinedCertificateError):
            membership_certificate(triangle, [0.2, 0.2])

    def test_bound_holds_on_random_instances(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            points = rng.standard_normal((15, 4))
            p = points.mean(axis=0) + rng.standard_normal(4) * 4.0
            try:
                certificate = membership_certificate(PointSet(points), p)
            except UndefinedCertificateError:
                continue
            assert certificate.E_ratio > 1.0
            assert certificate.bound_holds

    def test_dimension_mismatch(self, triangle):
        with pytest.raises(InvalidInputError):
            membership_certificate(triangle, [1.0, 1.0, 1.0])
