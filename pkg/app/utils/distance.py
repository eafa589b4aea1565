import logging
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import nnls
from scipy.spatial.distance import cdist

from app.config import get_settings
from app.models import ConvexCombination, InvalidInputError, PointSet

logger = logging.getLogger(__name__)

# rows per block in the pairwise scans, keeps the distance block around 16 MB
_BLOCK_ROWS = 2048


class Diameter(NamedTuple):
    value: float
    approximate: bool


class MinDistance(NamedTuple):
    value: float
    duplicates: bool


class HullProjection(NamedTuple):
    point: np.ndarray
    weights: np.ndarray
    distance: float


def _blocks(n: int):
    for start in range(0, n, _BLOCK_ROWS):
        yield start, min(start + _BLOCK_ROWS, n)


def compute_diameter(ps: PointSet, approximate: Optional[bool] = None,
                     exact_threshold: Optional[int] = None) -> Diameter:
    """
    Max pairwise Euclidean distance.

    :param approximate: allow the 2-approximation (2 * max distance from point 0) above ``exact_threshold``;
        defaults to the ``approximate_diameter`` setting
    :param exact_threshold: point count above which the approximation is used; defaults to settings
    :return: value plus whether it is the approximation (thresholds scale with R, so callers record it)
    """
    settings = get_settings()
    approximate = settings.approximate_diameter if approximate is None else approximate
    exact_threshold = settings.diameter_exact_threshold if exact_threshold is None else exact_threshold

    if ps.n == 1:
        return Diameter(0.0, False)

    if approximate and ps.n > exact_threshold:
        value = 2.0 * float(cdist(ps.points[:1], ps.points).max())
        logger.warning("Using the 2-approximate diameter for %d points (R=%.6g)", ps.n, value)
        return Diameter(value, True)

    best = 0.0
    for start, stop in _blocks(ps.n):
        # only pairs (i, j) with j >= start are new for this block
        block = cdist(ps.points[start:stop], ps.points[start:])
        best = max(best, float(block.max()))
    return Diameter(best, False)


def diameter(ps: PointSet) -> float:
    """Exact max pairwise distance, 0 for a single point."""
    return compute_diameter(ps, approximate=False).value


def min_pairwise_distance(ps: PointSet) -> MinDistance:
    """
    Smallest distance between two distinct indices. Duplicated points give 0 and raise the duplicates flag.
    """
    if ps.n < 2:
        raise InvalidInputError("the minimum pairwise distance needs at least two points")

    best = np.inf
    for start, stop in _blocks(ps.n):
        block = cdist(ps.points[start:stop], ps.points[start:])
        # mask the diagonal and the lower triangle already covered by earlier rows
        rows = np.arange(stop - start)
        block[np.arange(block.shape[1])[None, :] <= rows[:, None]] = np.inf
        if block.size:
            best = min(best, float(block.min()))

    duplicates = best == 0.0
    if duplicates:
        logger.warning("Point set of %d points contains duplicated rows", ps.n)
    return MinDistance(float(best), duplicates)


def materialize(combination: ConvexCombination, ps: PointSet) -> np.ndarray:
    """Dense point sum(alpha_i * v_i)."""
    combination.check_indices(ps.n)
    indices = np.fromiter(combination.weights.keys(), dtype=int)
    weights = np.fromiter(combination.weights.values(), dtype=float)
    return weights @ ps.points[indices]


def distances_to(ps: PointSet, point: np.ndarray, indices=None) -> np.ndarray:
    rows = ps.points if indices is None else ps.points[np.asarray(indices, dtype=int)]
    return np.linalg.norm(rows - np.asarray(point, dtype=float), axis=1)


def hull_projection(points: np.ndarray, p: np.ndarray, weight: float = 1e4) -> HullProjection:
    """
    Closest point of conv(points) to p, via non-negative least squares with a heavily weighted
    sum-to-one row appended.

    :param points: k x m matrix, rows are the hull generators
    :param p: query point
    :param weight: weight of the sum-to-one row, relative to the spread of the points around p
    :return: closest point, convex weights (aligned with the rows) and distance
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    p = np.asarray(p, dtype=float)
    shifted = points - p
    scale = max(float(np.abs(shifted).max()), 1.0)
    w = weight * scale
    A = np.vstack([shifted.T, np.full((1, points.shape[0]), w)])
    rhs = np.concatenate([np.zeros(points.shape[1]), [w]])
    alpha, _ = nnls(A, rhs, maxiter=50 * A.shape[1])
    total = alpha.sum()
    if total <= 0:
        alpha = np.zeros(points.shape[0])
        alpha[int(np.argmin(np.linalg.norm(shifted, axis=1)))] = 1.0
    else:
        alpha = alpha / total
    closest = alpha @ points
    return HullProjection(closest, alpha, float(np.linalg.norm(closest - p)))


__all__ = [
    "Diameter",
    "MinDistance",
    "HullProjection",
    "compute_diameter",
    "diameter",
    "min_pairwise_distance",
    "materialize",
    "distances_to",
    "hull_projection",
]
