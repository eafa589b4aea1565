import logging
from collections import Counter

import numpy as np
import pytest

from app.algorithms.robust import (avta_robust, multi_projection_vote, projection_tally, recovery_error,
                                   robust_sigma_search, sigma_from_gamma, top_frequent)
from app.models import GammaFloorError, HypothesisViolationError, InstanceSpec, InvalidInputError, PointSet
from app.utils import oracle
from app.utils.datagen import gen_hull_instance, perturb

CORNERS = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]


@pytest.fixture
def square_with_bump() -> PointSet:
    # (1.001, 0.5) pokes out of the right edge: a vertex of the data, not of the square
    return PointSet(CORNERS + [[1.001, 0.5]])


class TestSigmaFromGamma:
    def test_value(self):
        assert sigma_from_gamma(0.5, 1.0, 2.0) == pytest.approx(0.25)

    def test_rejects_non_positive(self):
        with pytest.raises(InvalidInputError):
            sigma_from_gamma(0.5, 0.0, 2.0)


class TestAvtaRobust:
    def test_spurious_vertex_is_pruned(self, square_with_bump):
        report = avta_robust(square_with_bump, 0.3, 0.01, seed=0)
        assert sorted(report.pruned_indices) == [0, 1, 2, 3]
        assert 4 not in report.pruned_indices
        assert set(report.pruned_indices) <= set(report.superset_indices)
        assert report.certificates[0] > 0.3 * report.R / 2

    def test_removed_bump_when_it_made_the_superset(self, square_with_bump):
        for seed in range(6):
            report = avta_robust(square_with_bump, 0.3, 0.01, seed=seed)
            if 4 in report.superset_indices:
                assert report.removed_indices == [4]
                assert report.certificates[4] < 0.3 * report.R / 2

    def test_hypothesis_violation(self, square_with_bump):
        with pytest.raises(HypothesisViolationError):
            avta_robust(square_with_bump, 0.1, 0.05)

    @pytest.mark.parametrize("sigma", [0.0, 1.5])
    def test_sigma_out_of_range(self, square_with_bump, sigma):
        with pytest.raises(InvalidInputError):
            avta_robust(square_with_bump, sigma, 0.0)

    def test_recovers_the_vertices_of_a_perturbed_instance(self):
        for seed in range(3):
            instance = gen_hull_instance(InstanceSpec(K=5, n=40, m=3, seed=seed))
            sigma = oracle.sigma_star(instance.points.points) / 2.0
            epsilon = sigma / 50.0
            noisy = perturb(instance.points, epsilon, seed=seed)
            report = avta_robust(noisy, sigma, epsilon, seed=seed)
            assert sorted(report.pruned_indices) == instance.vertex_indices

    def test_counters_include_pruning(self, square_with_bump):
        report = avta_robust(square_with_bump, 0.3, 0.01, seed=2)
        assert report.membership_calls >= len(report.superset_indices)


class TestRobustSigmaSearch:
    def test_stops_at_first_sigma_with_enough(self, square_with_bump):
        report = robust_sigma_search(square_with_bump, 4, 0.01, seed=0)
        assert report.sigma_used == 0.5
        assert sorted(report.pruned_indices) == [0, 1, 2, 3]

    def test_floor_is_four_epsilon(self, square_with_bump):
        with pytest.raises(GammaFloorError) as raised:
            robust_sigma_search(square_with_bump, 6, 0.01, seed=0)
        assert raised.value.found == 4


class TestProjectionVote:
    def test_tally_is_seeded(self, square_center):
        first = projection_tally(square_center, 0.05, 3, target_dim=2, seed=9)
        second = projection_tally(square_center, 0.05, 3, target_dim=2, seed=9)
        assert first == second
        assert len(first.seeds) == 3
        assert len(set(first.seeds)) == 3

    def test_default_target_dim_is_capped(self, square_center):
        assert projection_tally(square_center, 0.05, 1, seed=0).target_dim == 2

    def test_center_never_votes(self, square_center):
        tally = projection_tally(square_center, 0.05, 5, target_dim=2, seed=1)
        assert tally.frequencies[4] == 0
        assert sum(tally.frequencies.values()) > 0

    def test_vote_picks_the_corners(self, square_center):
        assert sorted(multi_projection_vote(square_center, 4, 0.05, 5, target_dim=2, seed=1)) == [0, 1, 2, 3]

    def test_rounds_must_be_positive(self, square_center):
        with pytest.raises(InvalidInputError):
            projection_tally(square_center, 0.05, 0)


class TestTopFrequent:
    def test_ties_by_smaller_index(self):
        assert top_frequent(Counter({5: 4, 3: 2, 1: 2}), 2) == [5, 1]

    def test_warns_when_short(self, caplog):
        with caplog.at_level(logging.WARNING):
            assert top_frequent(Counter({2: 1}), 3) == [2]
        assert "fewer" in caplog.text


class TestRecoveryError:
    def test_zero_when_recovered_exactly(self):
        assert recovery_error(np.array(CORNERS), np.array(CORNERS)) == pytest.approx(0.0, abs=1e-6)

    def test_sum_of_distances(self):
        recovered = np.array([[0.0, 0.0], [1.0, 0.0]])
        true_vertices = np.array([[0.0, 1.0], [1.0, 2.0]])
        assert recovery_error(true_vertices, recovered) == pytest.approx(3.0, abs=1e-6)

    def test_empty_recovery(self):
        with pytest.raises(InvalidInputError):
            recovery_error(np.array(CORNERS), np.empty((0, 2)))
