"""
Seeded synthetic instances with known ground truth.
"""
import logging
from typing import NamedTuple, Optional

import numpy as np

from app.models import InstanceSpec, InvalidInputError, LinearSystem, PointSet
from app.utils.distance import compute_diameter

from . import oracle

logger = logging.getLogger(__name__)

MAX_RETRIES = 100
# vertex sets up to this size are checked with the exact oracle, larger ones with the direction screen
_ORACLE_MAX_K = 60
_ORACLE_MAX_M = 8


class HullInstance(NamedTuple):
    points: PointSet
    vertex_indices: list[int]
    metadata: dict


class ConeInstance(NamedTuple):
    system: LinearSystem
    generator_indices: list[int]
    metadata: dict


def _draw_vertices(spec: InstanceSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.vertex_dist == "gaussian":
        return rng.standard_normal((spec.K, spec.m))
    if spec.vertex_dist == "gaussian10":
        return rng.standard_normal((spec.K, spec.m)) * np.sqrt(10.0)
    return rng.random((spec.K, spec.m))


def _screen(vertices: np.ndarray) -> bool:
    """Each point must be the unique maximizer of x . (v - centroid)."""
    centroid = vertices.mean(axis=0)
    for index, vertex in enumerate(vertices):
        scores = vertices @ (vertex - centroid)
        best = np.flatnonzero(scores >= scores[index])
        if best.size != 1:
            return False
    return True


def in_convex_position(vertices: np.ndarray) -> bool:
    if vertices.shape[0] <= 1:
        return True
    if np.unique(vertices, axis=0).shape[0] != vertices.shape[0]:
        return False
    if vertices.shape[0] <= _ORACLE_MAX_K and vertices.shape[1] <= _ORACLE_MAX_M:
        return len(oracle.vertex_set(vertices)) == vertices.shape[0]
    return _screen(vertices)


def gen_hull_instance(spec: InstanceSpec) -> HullInstance:
    """
    K vertices drawn per ``spec.vertex_dist``, n - K points as uniform-weight convex combinations of them,
    noise added last, rows shuffled.

    :return: points, positions of the intended vertices (ascending) and metadata
    :raises InvalidInputError: when no draw in convex position is found within MAX_RETRIES
    """
    rng = np.random.default_rng(spec.seed)
    for attempt in range(MAX_RETRIES):
        vertices = _draw_vertices(spec, rng)
        if not spec.ensure_convex_position or in_convex_position(vertices):
            break
        logger.debug("vertex draw %d not in convex position, redrawing", attempt)
    else:
        raise InvalidInputError(f"no {spec.K} vertices in convex position in dimension {spec.m} "
                                f"after {MAX_RETRIES} draws")

    weights = rng.random((spec.n - spec.K, spec.K))
    interior = (weights / weights.sum(axis=1, keepdims=True)) @ vertices
    points = np.vstack([vertices, interior])

    order = rng.permutation(spec.n)
    points = points[order]
    if spec.noise == "gaussian":
        points = points + rng.normal(0.0, np.sqrt(spec.noise_scale), points.shape)
    elif spec.noise == "uniform":
        points = points + rng.uniform(-spec.noise_scale, spec.noise_scale, points.shape)

    truth = [int(index) for index in np.flatnonzero(order < spec.K)]
    metadata = {**spec.model_dump(), "vertex_indices": truth, "retries": attempt}
    return HullInstance(PointSet(points), truth, metadata)


def gen_cone_instance(K: int, n: int, m: int, B_scale: float = 10.0, seed: int = 0) -> ConeInstance:
    """
    K generator columns with U(0, 1) entries and n - K redundant columns G B, B with U(0, B_scale) entries.
    The right-hand side is G x for a U(0, 1) vector x, so the system is feasible.
    """
    if not 1 <= K <= n or m < 1:
        raise InvalidInputError(f"need 1 <= K <= n and m >= 1, got K={K}, n={n}, m={m}")
    if B_scale <= 0:
        raise InvalidInputError(f"B_scale must be positive, got {B_scale}")
    rng = np.random.default_rng(seed)
    generators = rng.random((m, K))
    redundant = generators @ rng.uniform(0.0, B_scale, (K, n - K))
    A = np.hstack([generators, redundant])

    order = rng.permutation(n)
    A = A[:, order]
    b = generators @ rng.random(K)
    truth = [int(index) for index in np.flatnonzero(order < K)]
    metadata = {"K": K, "n": n, "m": m, "B_scale": B_scale, "seed": seed, "generator_indices": truth}
    return ConeInstance(LinearSystem(A=A, b=b), truth, metadata)


def perturb(ps: PointSet, epsilon: float, seed: int = 0, R: Optional[float] = None) -> PointSet:
    """Move every point by a uniform direction times a radius drawn uniformly from [0, epsilon * R]."""
    if epsilon < 0:
        raise InvalidInputError(f"epsilon must be non-negative, got {epsilon}")
    rng = np.random.default_rng(seed)
    R = compute_diameter(ps, approximate=False).value if R is None else R
    directions = rng.standard_normal(ps.points.shape)
    lengths = np.linalg.norm(directions, axis=1, keepdims=True)
    directions = np.divide(directions, lengths, out=np.zeros_like(directions), where=lengths > 0)
    radii = rng.uniform(0.0, epsilon * R, (ps.n, 1))
    return PointSet(ps.points + directions * radii)


def gaussian_noise(ps: PointSet, tau: float, seed: int = 0) -> PointSet:
    """Add N(0, tau) to every coordinate; tau is the variance."""
    if tau < 0:
        raise InvalidInputError(f"tau must be non-negative, got {tau}")
    rng = np.random.default_rng(seed)
    return PointSet(ps.points + rng.normal(0.0, np.sqrt(tau), ps.points.shape))


def cone_queries(system: LinearSystem, count: int, seed: int = 0,
                 max_draws: int = 1000) -> tuple[np.ndarray, list[bool]]:
    """
    ``count`` right-hand sides, half of them A x with x ~ U(0, 1)^n, the rest drawn like generator
    columns and kept only when the exact oracle rejects them.

    :return: queries as rows, and whether each is feasible
    """
    if count < 1:
        raise InvalidInputError(f"count must be positive, got {count}")
    rng = np.random.default_rng(seed)
    feasible_count = (count + 1) // 2
    queries = [system.A @ rng.random(system.n) for _ in range(feasible_count)]
    labels = [True] * feasible_count

    draws = 0
    while len(queries) < count:
        if draws == max_draws:
            raise InvalidInputError(f"no infeasible query found in {max_draws} draws; the cone covers the box")
        draws += 1
        candidate = rng.random(system.m)
        if not oracle.feasible(system.A, candidate):
            queries.append(candidate)
            labels.append(False)

    order = rng.permutation(count)
    return np.asarray(queries)[order], [labels[index] for index in order]


__all__ = [
    "MAX_RETRIES",
    "HullInstance",
    "ConeInstance",
    "in_convex_position",
    "gen_hull_instance",
    "gen_cone_instance",
    "perturb",
    "gaussian_noise",
    "cone_queries",
]
