"""
Exact-arithmetic ground truth for small instances.

Feasibility of ``A x = b, x >= 0`` is decided with a two-phase simplex over ``fractions.Fraction``
(Bland's rule, so it terminates). A HiGHS solve proposes the answer first: a proposed solution is
confirmed by an exact simplex restricted to its support, a proposed Farkas ray is checked exactly.
Whatever cannot be confirmed goes through the full exact simplex.

Inputs are floats; every float is converted to the rational number it represents, so verdicts are exact
for the data as stored. Meant for desk sizes (m <= 8, n <= 200).
"""
import logging
from fractions import Fraction
from typing import Literal, NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import linprog
from shapely.geometry import MultiPoint

from app.models import InvalidInputError, PointSet
from app.utils.distance import compute_diameter, hull_projection

logger = logging.getLogger(__name__)

# HiGHS answers below this are not trusted as a sign and go to the exact path
_FLOAT_SLACK = 1e-9


class ExactLp(NamedTuple):
    status: Literal["optimal", "infeasible", "unbounded"]
    value: Optional[Fraction]
    x: Optional[list[Fraction]]


def _rational(matrix) -> list[list[Fraction]]:
    return [[Fraction(float(value)) for value in row] for row in np.atleast_2d(matrix)]


def _pivot(rows: list[list[Fraction]], objective: list[Fraction], r: int, col: int) -> None:
    pivot = rows[r][col]
    rows[r] = [value / pivot for value in rows[r]]
    base = rows[r]
    for i, row in enumerate(rows):
        factor = row[col]
        if i != r and factor != 0:
            rows[i] = [a - factor * b for a, b in zip(row, base)]
    factor = objective[col]
    if factor != 0:
        objective[:] = [a - factor * b for a, b in zip(objective, base)]


def _run(rows, objective, basis, allowed: Sequence[int]) -> bool:
    """Bland's rule until optimal (True) or unbounded (False)."""
    while True:
        entering = next((j for j in allowed if objective[j] < 0), None)
        if entering is None:
            return True
        best = None
        for i, row in enumerate(rows):
            if row[entering] > 0:
                key = (row[-1] / row[entering], basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return False
        _pivot(rows, objective, best[1], entering)
        basis[best[1]] = entering


def _phase_one(A: list[list[Fraction]], b: list[Fraction]):
    m, n = len(A), len(A[0])
    rows = []
    for i in range(m):
        sign = -1 if b[i] < 0 else 1
        identity = [Fraction(int(i == k)) for k in range(m)]
        rows.append([sign * value for value in A[i]] + identity + [sign * b[i]])
    basis = [n + i for i in range(m)]
    objective = [-sum((row[j] for row in rows), Fraction(0)) for j in range(n)] + [Fraction(0)] * m
    objective.append(-sum((row[-1] for row in rows), Fraction(0)))
    _run(rows, objective, basis, range(n + m))
    if objective[-1] != 0:
        return None

    # drive artificials out of the basis, dropping redundant rows
    r = 0
    while r < len(rows):
        if basis[r] >= n:
            col = next((j for j in range(n) if rows[r][j] != 0), None)
            if col is None:
                del rows[r]
                del basis[r]
                continue
            _pivot(rows, objective, r, col)
            basis[r] = col
        r += 1
    rows = [row[:n] + [row[-1]] for row in rows]
    return rows, basis


def exact_lp(A, b, c=None) -> ExactLp:
    """min c.x subject to A x = b, x >= 0 in exact arithmetic; a zero cost decides feasibility only."""
    A_q, b_q = _rational(A), _rational(np.reshape(b, (1, -1)))[0]
    m, n = len(A_q), len(A_q[0])
    if len(b_q) != m:
        raise InvalidInputError(f"b must have {m} entries, got {len(b_q)}")
    c_q = [Fraction(0)] * n if c is None else _rational(np.reshape(c, (1, -1)))[0]

    start = _phase_one(A_q, b_q)
    if start is None:
        return ExactLp("infeasible", None, None)
    rows, basis = start
    objective = [c_q[j] - sum((c_q[basis[i]] * row[j] for i, row in enumerate(rows)), Fraction(0))
                 for j in range(n)]
    objective.append(-sum((c_q[basis[i]] * row[-1] for i, row in enumerate(rows)), Fraction(0)))
    if not _run(rows, objective, basis, range(n)):
        return ExactLp("unbounded", None, None)
    x = [Fraction(0)] * n
    for i, column in enumerate(basis):
        x[column] = rows[i][-1]
    return ExactLp("optimal", -objective[-1], x)


def _farkas_ray(A: np.ndarray, b: np.ndarray) -> Optional[np.ndarray]:
    """Float y with A^T y >= 0 and b.y < 0, if HiGHS finds one."""
    result = linprog(b, A_ub=-A.T, b_ub=np.zeros(A.shape[1]), bounds=(-1, 1), method="highs")
    if result.status == 0 and result.fun < -_FLOAT_SLACK:
        return result.x
    return None


def _ray_is_exact(A: np.ndarray, b: np.ndarray, y: np.ndarray) -> bool:
    y_q = [Fraction(float(value)) for value in y]
    A_q, b_q = _rational(A), [Fraction(float(value)) for value in b]
    if sum((yi * bi for yi, bi in zip(y_q, b_q)), Fraction(0)) >= 0:
        return False
    return all(sum((y_q[i] * A_q[i][j] for i in range(len(y_q))), Fraction(0)) >= 0 for j in range(len(A_q[0])))


def feasible(A, b) -> bool:
    """Exact verdict on A x = b, x >= 0."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)

    proposal = linprog(np.zeros(A.shape[1]), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if proposal.status == 0:
        support = np.flatnonzero(proposal.x > _FLOAT_SLACK)
        if support.size and exact_lp(A[:, support], b).status == "optimal":
            return True
    else:
        ray = _farkas_ray(A, b)
        if ray is not None and _ray_is_exact(A, b, ray):
            return False
    logger.debug("float proposal not confirmed, running the full exact simplex (%d x %d)", *A.shape)
    return exact_lp(A, b).status == "optimal"


def in_hull(points, p) -> bool:
    """Whether p is a convex combination of the rows of ``points``, exactly."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape[0] != points.shape[1]:
        raise InvalidInputError(f"query has dimension {p.shape[0]}, points have {points.shape[1]}")
    A = np.vstack([points.T, np.ones((1, points.shape[0]))])
    return feasible(A, np.append(p, 1.0))


def is_vertex(points, index: int) -> bool:
    """
    Whether point ``index`` is outside the hull of every point with different coordinates.
    Copies of a vertex are therefore all vertices.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    v = points[index]
    others = points[np.any(points != v, axis=1)]
    if others.shape[0] == 0:
        return True
    return not in_hull(others, v)


def vertex_set(points) -> list[int]:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return [index for index in range(points.shape[0]) if is_vertex(points, index)]


def planar_vertex_set(points) -> list[int]:
    """Vertices of a planar point set from shapely's convex hull, as an independent check for m = 2."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != 2:
        raise InvalidInputError("planar_vertex_set needs two-dimensional points")
    hull = MultiPoint([tuple(point) for point in points]).convex_hull
    if hull.geom_type == "Polygon":
        corners = set(hull.exterior.coords)
    elif hull.geom_type == "LineString":
        corners = {hull.coords[0], hull.coords[-1]}
    else:
        corners = {(hull.x, hull.y)}
    return [index for index, point in enumerate(points) if tuple(point) in corners]


def gamma_star(points) -> float:
    """Min distance of a vertex to the hull of the other vertices, divided by the diameter."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    vertices = points[vertex_set(points)]
    return _min_distance_to_rest(vertices, vertices) / compute_diameter(PointSet(points), approximate=False).value


def sigma_star(points) -> float:
    """Min distance of a vertex to the hull of all other points, divided by the diameter."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    vertices = points[vertex_set(points)]
    return _min_distance_to_rest(vertices, points) / compute_diameter(PointSet(points), approximate=False).value


def _min_distance_to_rest(vertices: np.ndarray, pool: np.ndarray) -> float:
    if vertices.shape[0] < 2:
        raise InvalidInputError("robustness needs at least two distinct vertices")
    best = np.inf
    for vertex in vertices:
        rest = pool[np.any(pool != vertex, axis=1)]
        best = min(best, hull_projection(rest, vertex).distance)
    return float(best)


__all__ = [
    "ExactLp",
    "exact_lp",
    "feasible",
    "in_hull",
    "is_vertex",
    "vertex_set",
    "planar_vertex_set",
    "gamma_star",
    "sigma_star",
]
