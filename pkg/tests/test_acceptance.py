"""
Oracle-backed runs over many seeded instances. Deselect with ``-m "not slow"``.
"""
from math import sqrt

import numpy as np
import pytest

from app.algorithms.avta import avta_gamma
from app.algorithms.lp import prune_columns_feasibility, prune_columns_optimization
from app.algorithms.projection import (choose_target_dim, draw_map, measured_distortion, membership_certificate,
                                       project)
from app.algorithms.robust import avta_robust
from app.algorithms.triangle import solve_membership, validate_witness
from app.models import InstanceSpec, LinearSystem, PointSet
from app.utils import oracle
from app.utils.datagen import gen_hull_instance, perturb
from app.utils.distance import compute_diameter, diameter, hull_projection

pytestmark = pytest.mark.slow


def corpus(count: int, n: int = 40):
    """
    Seeded full-dimensional hull instances, m in 2..6 and K in m + 1..m + 3.
    Interior points of a lower-dimensional hull come out of rounding just off its flat.
    """
    for seed in range(count):
        m = 2 + seed % 5
        K = m + 1 + (seed // 5) % 3
        yield seed, gen_hull_instance(InstanceSpec(K=K, n=n, m=m, seed=seed))


def interior_query(rng: np.random.Generator, points: np.ndarray) -> np.ndarray:
    weights = rng.random(points.shape[0])
    return weights / weights.sum() @ points


class TestVertexEnumeration:
    def test_all_vertices_below_the_robustness_ratio(self):
        for seed, instance in corpus(50):
            points = instance.points.points
            truth = oracle.vertex_set(points)
            assert truth == instance.vertex_indices
            report = avta_gamma(instance.points, 0.9 * oracle.gamma_star(points), seed=seed)
            assert sorted(report.vertex_indices) == truth, f"seed {seed}"

    def test_no_false_vertices_for_any_gamma(self):
        rng = np.random.default_rng(1)
        for seed, instance in corpus(50):
            gamma = float(rng.uniform(0.01, 0.99))
            report = avta_gamma(instance.points, gamma, seed=seed)
            for index in report.vertex_indices:
                assert oracle.is_vertex(instance.points.points, index), f"seed {seed}, gamma {gamma}"


class TestTriangleAlgorithm:
    @pytest.mark.parametrize("epsilon", [0.1, 0.05, 0.02])
    def test_iteration_bound(self, epsilon):
        for seed in range(100):
            rng = np.random.default_rng(seed)
            points = rng.standard_normal((12, 5))
            p = interior_query(rng, points[:6])
            result = solve_membership(PointSet(points), None, p, epsilon)
            assert result.kind == "ApproxSolution"
            assert result.iterations <= 48 / epsilon ** 2

    def test_every_logged_step_contracts(self):
        checked = 0
        seed = 0
        while checked < 10_000:
            rng = np.random.default_rng(1000 + seed)
            points = rng.standard_normal((25, 4))
            p = interior_query(rng, points)
            result = solve_membership(PointSet(points), None, p, 1e-3, record_steps=True)
            for step in result.steps:
                delta, r = step.gap_before, step.pivot_distance
                if delta > r:
                    continue
                assert step.gap_after <= delta * sqrt(max(1.0 - delta ** 2 / (4.0 * r ** 2), 0.0)) + 1e-9
                checked += 1
            seed += 1

    def test_witnesses_are_valid(self):
        witnesses = 0
        seed = 0
        while witnesses < 100:
            rng = np.random.default_rng(5000 + seed)
            points = rng.standard_normal((10, 3))
            p = rng.standard_normal(3) * 3.0
            ps = PointSet(points)
            result = solve_membership(ps, None, p, 1e-3)
            if result.kind == "Witness":
                assert not oracle.in_hull(points, p)
                assert validate_witness(ps, None, p, result.combination)
                witnesses += 1
            seed += 1


class TestPerturbationRecovery:
    def test_recovers_the_perturbed_vertices(self):
        for seed, instance in corpus(30):
            points = instance.points.points
            sigma_star = oracle.sigma_star(points)
            epsilon = sigma_star / 5.0
            R = compute_diameter(instance.points, approximate=False).value
            noisy = perturb(instance.points, epsilon, seed=seed, R=R)
            report = avta_robust(noisy, 0.9 * sigma_star, epsilon, seed=seed, R=R)
            assert sorted(report.pruned_indices) == instance.vertex_indices, f"seed {seed}"


class TestProjections:
    def test_projected_vertices_are_vertices(self):
        for seed, instance in corpus(30):
            points = instance.points.points
            for round_seed in range(3):
                target_dim = max(1, instance.points.m - 1)
                projected = project(draw_map(instance.points.m, target_dim, 100 * seed + round_seed), instance.points)
                for index in oracle.vertex_set(projected.points):
                    assert oracle.is_vertex(points, index), f"seed {seed}, map {round_seed}"


    def test_robustness_survives_the_measured_distortion(self):
        held, pairs = 0, 0
        for seed in range(30):
            instance = gen_hull_instance(InstanceSpec(K=4, n=30, m=20, seed=seed))
            # the vertices span a 4-flat that the 12-dimensional map keeps injective, so they stay the vertices
            vertices = instance.points.subset(instance.vertex_indices)
            original = oracle.gamma_star(vertices.points) * diameter(vertices)
            for round_seed in range(3):
                projected = project(draw_map(20, 12, 100 * seed + round_seed), instance.points)
                distortion = measured_distortion(instance.points, projected)
                image = projected.subset(instance.vertex_indices)
                robustness = oracle.gamma_star(image.points) * diameter(image)
                held += robustness >= (1.0 - distortion) * original
                pairs += 1
        assert held >= 0.9 * pairs

    def test_certified_queries_stay_outside(self):
        # 120 points span R^100; the certified dimension stays below that, so outside is not automatic
        rng = np.random.default_rng(61)
        ps = PointSet(rng.standard_normal((120, 100)))
        kept, trials = 0, 0
        for query_seed in range(10):
            direction = rng.standard_normal(100)
            p = 80.0 * direction / np.linalg.norm(direction)
            certificate = membership_certificate(ps, p)
            target_dim = choose_target_dim(ps.n, certificate.epsilon_bound, source_dim=ps.m)
            assert target_dim < ps.m
            for round_seed in range(10):
                jl_map = draw_map(ps.m, target_dim, 1000 * query_seed + round_seed)
                projected = project(jl_map, ps)
                closest = hull_projection(projected.points, jl_map(p))
                kept += closest.distance > 1e-6 * np.linalg.norm(p)
                trials += 1
        assert kept >= 0.9 * trials


class TestLinearPrograms:
    def test_feasibility_verdicts_agree(self):
        for seed in range(20):
            instance = gen_hull_instance(InstanceSpec(K=6, n=30, m=4, vertex_dist="uniform01", seed=seed))
            A = instance.points.points.T.copy()
            reduced, kept = prune_columns_feasibility(LinearSystem(A=A, b=np.ones(4)),
                                                      0.9 * oracle.gamma_star(A.T), seed=seed)
            assert sorted(kept) == instance.vertex_indices
            rng = np.random.default_rng(seed)
            for _ in range(3):
                b = rng.standard_normal(4) + 0.5
                assert oracle.feasible(A, b) == oracle.feasible(reduced.A, b), f"seed {seed}"

    def test_optimal_values_agree(self):
        for seed in range(20):
            instance = gen_hull_instance(InstanceSpec(K=6, n=30, m=5, vertex_dist="uniform01", seed=100 + seed))
            stacked = instance.points.points.T.copy()
            c, A = stacked[0], stacked[1:]
            b = A @ np.random.default_rng(seed).random(30)
            reduced, _ = prune_columns_optimization(LinearSystem(A=A, b=b), c, 0.9 * oracle.gamma_star(stacked.T),
                                                    seed=seed)
            full = oracle.exact_lp(A, b, c)
            pruned = oracle.exact_lp(reduced.A, b, reduced.c)
            assert full.status == pruned.status == "optimal"
            assert float(full.value) == pytest.approx(float(pruned.value), abs=1e-6), f"seed {seed}"


class TestScaling:
    def test_membership_calls_grow_with_n(self):
        K, m = 5, 3
        small = gen_hull_instance(InstanceSpec(K=K, n=60, m=m, seed=7))
        large = gen_hull_instance(InstanceSpec(K=K, n=600, m=m, seed=7))
        reports = []
        for instance in (small, large):
            vertices = instance.points.points[instance.vertex_indices]
            reports.append(avta_gamma(instance.points, 0.9 * oracle.gamma_star(vertices), seed=7))
        assert len(reports[0]) == len(reports[1]) == K
        assert reports[1].membership_calls <= 12 * reports[0].membership_calls
