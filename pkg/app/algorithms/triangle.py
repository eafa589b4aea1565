"""
Approximate convex-hull membership: either an iterate within epsilon * R of the query,
or a witness whose bisecting hyperplane separates the query from the hull.

Every iteration costs O(N) over the working set: the solver keeps p' . v_i, |p'|^2 and p' . p up to date
from cached inner products instead of touching coordinates. Once |p - p'|^2 drops to the rounding level of
those products the run switches to explicit coordinates, and a witness is only reported after a pivot search
in coordinates came back empty.
"""
import logging
from math import ceil, sqrt
from typing import Literal, Optional, Sequence

import numpy as np

from app.config import get_settings
from app.models import (ConvexCombination, DegeneratePivotError, InvalidInputError, IterationLimitError,
                        MembershipResult, PivotStep, PointSet, UndefinedAngleError, WEIGHT_SUM_TOLERANCE,
                        inner_products)
from app.utils.distance import compute_diameter, materialize

logger = logging.getLogger(__name__)

SolveMode = Literal["plain", "strict"]

# smallest gap, relative to the coordinate scale, that explicit coordinates still resolve
RESOLUTION = 1024.0 * float(np.finfo(float).eps)
# cached gaps below this fraction of |p|^2 + |p'|^2 are dominated by cancellation
_CANCELLATION = 1e-10


def _as_working_set(ps: PointSet, working_set: Optional[Sequence[int]]) -> np.ndarray:
    if working_set is None:
        return np.arange(ps.n)
    indices = np.asarray(list(working_set), dtype=int)
    if indices.size == 0:
        raise InvalidInputError("the working set is empty")
    if indices.min() < 0 or indices.max() >= ps.n:
        raise InvalidInputError(f"working set refers to indices outside a set of {ps.n} points")
    return indices


def _as_query(ps: PointSet, p) -> np.ndarray:
    point = np.asarray(p, dtype=float).reshape(-1)
    if point.shape[0] != ps.m:
        raise InvalidInputError(f"query has dimension {point.shape[0]}, points have {ps.m}")
    if not np.all(np.isfinite(point)):
        raise InvalidInputError("query coordinates must be finite")
    return point


class SolverState:
    """
    Iterate p' of one membership run, as weights over the working set plus the cached dot products.

    :param ps: the owning point set
    :param working_set: indices the hull is taken over
    :param p: query point
    :param start: initial iterate; the working-set point closest to p when omitted
    """

    def __init__(self, ps: PointSet, working_set: Sequence[int], p, start: Optional[ConvexCombination] = None):
        self.ps = ps
        self.working_set = _as_working_set(ps, working_set)
        self._positions = {int(index): k for k, index in enumerate(self.working_set)}
        self.p = _as_query(ps, p)

        rows = ps.points[self.working_set]
        self.rows = rows
        self.norms = ps.squared_norms[self.working_set]
        self.query_dots = inner_products(rows, self.p)
        self.query_norm_sq = float(inner_products(self.p[None, :], self.p)[0])

        self.weights = np.zeros(self.working_set.size)
        if start is None:
            # Step 0: closest point of the working set
            self.weights[int(np.argmin(self.norms - 2.0 * self.query_dots))] = 1.0
        else:
            for index, weight in start.weights.items():
                if index not in self._positions:
                    raise InvalidInputError(f"start combination uses index {index} outside the working set")
                self.weights[self._positions[index]] = weight

        self.iterate_dots = np.zeros(self.working_set.size)
        for k in np.flatnonzero(self.weights):
            self.iterate_dots += self.weights[k] * ps.gram_row(int(self.working_set[k]), self.working_set)
        support = self.weights > 0
        self.iterate_norm_sq = float(self.weights[support] @ self.iterate_dots[support])
        self.iterate_query_dot = float(self.weights @ self.query_dots)

        self.iterations = 0
        self.pivot_steps = 0
        self.last_alpha = 0.0
        self.coordinates = False
        self.point: Optional[np.ndarray] = None

    def use_coordinates(self) -> None:
        """Track p' as a dense vector from now on."""
        if not self.coordinates:
            self.point = self.weights @ self.rows
            self.coordinates = True
            logger.debug("switching to coordinates after %d iterations", self.iterations)

    @property
    def noisy(self) -> bool:
        if self.coordinates:
            return False
        return self.gap_sq <= _CANCELLATION * (self.query_norm_sq + self.iterate_norm_sq)

    def position(self, index: int) -> int:
        try:
            return self._positions[int(index)]
        except KeyError:
            raise InvalidInputError(f"index {index} is not in the working set") from None

    @property
    def gap_sq(self) -> float:
        if self.coordinates:
            offset = self.p - self.point
            return float(offset @ offset)
        return max(self.query_norm_sq - 2.0 * self.iterate_query_dot + self.iterate_norm_sq, 0.0)

    @property
    def gap(self) -> float:
        return sqrt(self.gap_sq)

    @property
    def iterate(self) -> ConvexCombination:
        return ConvexCombination.from_arrays(self.working_set, self.weights)

    def slacks(self) -> np.ndarray:
        """v.p - v.p' - (|p|^2 - |p'|^2) / 2 for every working-set point; >= 0 means pivot."""
        if self.coordinates:
            return (self.rows - 0.5 * (self.p + self.point)) @ (self.p - self.point)
        return (self.query_dots - self.iterate_dots) - 0.5 * (self.query_norm_sq - self.iterate_norm_sq)

    def check_consistency(self, rtol: float) -> None:
        point = self.weights @ self.rows
        if self.coordinates:
            scale = max(float(np.sqrt(self.norms.max())), 1e-300)
            if not np.allclose(self.point, point, rtol=rtol, atol=rtol * scale):
                raise AssertionError(f"solver iterate drifted after {self.iterations} iterations: "
                                     f"max error {np.abs(self.point - point).max():.3g}")
            return
        dots = self.rows @ point
        norm_sq = float(point @ point)
        scale = max(float(self.norms.max()), norm_sq, 1e-300)
        if not np.allclose(self.iterate_dots, dots, rtol=rtol, atol=rtol * scale) \
                or abs(self.iterate_norm_sq - norm_sq) > rtol * scale:
            raise AssertionError(
                f"solver state drifted after {self.iterations} iterations: "
                f"max dot error {np.abs(self.iterate_dots - dots).max():.3g}, "
                f"norm error {abs(self.iterate_norm_sq - norm_sq):.3g}"
            )


def _choose(candidates: np.ndarray, slack: np.ndarray, first_fit: bool) -> int:
    if first_fit:
        return int(candidates[0])
    return int(candidates[np.argmax(slack[candidates])])


def find_pivot(state: SolverState, first_fit: bool = False) -> Optional[int]:
    """
    Index j with v_j.p - v_j.p' >= (|p|^2 - |p'|^2) / 2, i.e. d(p', v_j) >= d(p, v_j).

    :param first_fit: take the first qualifying index instead of the one with the largest slack
    :return: point index, or None when no point of the working set is a pivot
    """
    state.pivot_steps += 1
    slack = state.slacks()
    candidates = np.flatnonzero(slack >= 0)
    if candidates.size == 0:
        return None
    return int(state.working_set[_choose(candidates, slack, first_fit)])


def strict_pivot(state: SolverState, first_fit: bool = False) -> Optional[int]:
    """
    Index j whose angle p'-p-v_j is at least 90 degrees, i.e. (p' - p).(v_j - p) <= 0.

    :raises UndefinedAngleError: when p' coincides with p
    """
    if state.gap_sq <= 0.0:
        raise UndefinedAngleError("p' equals p, the strict-pivot angle is undefined")
    state.pivot_steps += 1
    if state.coordinates:
        angle = (state.rows - state.p) @ (state.point - state.p)
    else:
        angle = state.iterate_dots - state.iterate_query_dot - state.query_dots + state.query_norm_sq
    candidates = np.flatnonzero(angle <= 0)
    if candidates.size == 0:
        return None
    return int(state.working_set[_choose(candidates, state.slacks(), first_fit)])


def apply_pivot(state: SolverState, j: int) -> SolverState:
    """
    Move p' to the point of segment p'v_j nearest to p and refresh the cached products.

    :raises DegeneratePivotError: when v_j coincides with p' or the step has no length
    """
    k = state.position(j)
    if state.coordinates:
        return _step_in_coordinates(state, j, k)
    dot_k = state.iterate_dots[k]
    norm_k = state.norms[k]
    denominator = norm_k - 2.0 * dot_k + state.iterate_norm_sq
    if denominator <= 0.0:
        raise DegeneratePivotError(f"pivot {j} coincides with the iterate")
    numerator = state.query_dots[k] - state.iterate_query_dot - dot_k + state.iterate_norm_sq
    if numerator <= 0.0:
        raise DegeneratePivotError(f"pivot {j} gives a non-positive step ({numerator:.3g})")
    alpha = min(numerator / denominator, 1.0)

    row = state.ps.gram_row(j, state.working_set)
    beta = 1.0 - alpha
    state.iterate_norm_sq = beta * beta * state.iterate_norm_sq + 2.0 * alpha * beta * dot_k + alpha * alpha * norm_k
    state.iterate_dots = beta * state.iterate_dots + alpha * row
    state.iterate_query_dot = beta * state.iterate_query_dot + alpha * state.query_dots[k]

    state.weights *= beta
    state.weights[k] += alpha
    total = state.weights.sum()
    if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
        state.weights /= total

    state.iterations += 1
    state.last_alpha = alpha
    return state


def _step_in_coordinates(state: SolverState, j: int, k: int) -> SolverState:
    step = state.rows[k] - state.point
    denominator = float(step @ step)
    if denominator <= 0.0:
        raise DegeneratePivotError(f"pivot {j} coincides with the iterate")
    numerator = float(step @ (state.p - state.point))
    if numerator <= 0.0:
        raise DegeneratePivotError(f"pivot {j} gives a non-positive step ({numerator:.3g})")
    alpha = min(numerator / denominator, 1.0)

    state.point = state.point + alpha * step
    state.weights *= 1.0 - alpha
    state.weights[k] += alpha
    total = state.weights.sum()
    if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
        state.weights /= total
        state.point = state.weights @ state.rows

    state.iterations += 1
    state.last_alpha = alpha
    return state


def validate_witness(ps: PointSet, working_set: Sequence[int], p, witness: ConvexCombination) -> bool:
    """True iff d(p', v) < d(p, v) for every working-set point, recomputed from coordinates."""
    indices = _as_working_set(ps, working_set)
    p = _as_query(ps, p)
    p_prime = materialize(witness, ps)
    rows = ps.points[indices]
    return bool(np.all(np.linalg.norm(rows - p_prime, axis=1) < np.linalg.norm(rows - p, axis=1)))


def witness_lower_bound(ps: PointSet, working_set: Sequence[int], p, witness: ConvexCombination) -> float:
    """
    Distance from p to the hyperplane with normal p - p' supporting the working set.
    Positive exactly when that hyperplane separates p from the hull, and then a lower bound on d(p, hull).
    """
    indices = _as_working_set(ps, working_set)
    p = _as_query(ps, p)
    direction = p - materialize(witness, ps)
    length = float(np.linalg.norm(direction))
    if length == 0.0:
        return 0.0
    return float((direction @ p - (ps.points[indices] @ direction).max()) / length)


def iteration_cap(epsilon: float, n: int) -> int:
    return ceil(48.0 / epsilon ** 2) + n


def solve_membership(ps: PointSet,
                     working_set: Optional[Sequence[int]],
                     p,
                     epsilon: float,
                     start: Optional[ConvexCombination] = None,
                     mode: SolveMode = "plain",
                     *,
                     R: Optional[float] = None,
                     first_fit: bool = False,
                     record_steps: bool = False,
                     max_iterations: Optional[int] = None) -> MembershipResult:
    """
    Triangle Algorithm: walk p' toward p through pivots until d(p', p) <= epsilon * R or no pivot is left.

    :param ps: point set
    :param working_set: indices spanning the hull (all points when None)
    :param p: query point
    :param epsilon: relative tolerance in (0, 1)
    :param start: warm-start iterate supported on the working set
    :param mode: "strict" tries strict pivots first and falls back to plain ones
    :param R: scale of the tolerance; the diameter of the working set when omitted.
        The tolerance never drops below RESOLUTION times the coordinate scale, where gaps stop being measurable.
    :param first_fit: take the first qualifying pivot instead of the greedy one
    :param record_steps: keep a PivotStep per iteration on the result
    :param max_iterations: iteration ceiling, ceil(48 / epsilon^2) + N by default
    :raises IterationLimitError: when the ceiling is reached
    """
    if not 0.0 < epsilon < 1.0:
        raise InvalidInputError(f"epsilon must lie in (0, 1), got {epsilon}")
    if mode not in ("plain", "strict"):
        raise InvalidInputError(f"unknown mode {mode!r}")

    settings = get_settings()
    state = SolverState(ps, working_set if working_set is not None else range(ps.n), p, start)
    if R is None:
        R = compute_diameter(ps.subset(state.working_set), approximate=False).value
    scale = max(R, sqrt(max(float(state.norms.max()), state.query_norm_sq)))
    tolerance = max(epsilon * R, RESOLUTION * scale)
    cap = max_iterations if max_iterations is not None else iteration_cap(epsilon, state.working_set.size)

    steps: list[PivotStep] = []
    while True:
        if state.noisy:
            state.use_coordinates()
        gap = state.gap
        if gap <= tolerance:
            kind = "ApproxSolution"
            break

        j = strict_pivot(state, first_fit) if mode == "strict" else None
        if j is None:
            j = find_pivot(state, first_fit)
        if j is None:
            if not state.coordinates:
                # confirm from coordinates before trusting an empty pivot search
                state.use_coordinates()
                continue
            kind = "Witness"
            break

        if state.iterations >= cap:
            raise IterationLimitError(
                f"no decision after {state.iterations} iterations (epsilon={epsilon}, N={state.working_set.size})",
                iterations=state.iterations,
            )

        k = state.position(j)
        apply_pivot(state, j)
        if record_steps:
            pivot_distance = sqrt(max(state.query_norm_sq - 2.0 * state.query_dots[k] + state.norms[k], 0.0))
            steps.append(PivotStep(pivot=j, alpha=state.last_alpha, gap_before=gap,
                                   gap_after=state.gap, pivot_distance=pivot_distance))
        if settings.debug_checks:
            state.check_consistency(settings.consistency_rtol)

    combination = state.iterate
    distance = float(np.linalg.norm(materialize(combination, ps) - state.p))
    bound = witness_lower_bound(ps, state.working_set, state.p, combination) if kind == "Witness" else None
    logger.debug("membership: %s after %d iterations (gap %.3g, tolerance %.3g, N=%d)",
                 kind, state.iterations, distance, tolerance, state.working_set.size)

    return MembershipResult(
        kind=kind,
        combination=combination,
        distance_to_query=distance,
        epsilon_used=epsilon,
        R=R,
        iterations=state.iterations,
        pivot_steps=state.pivot_steps,
        mode=mode,
        witness_bound=bound,
        steps=steps,
    )


__all__ = [
    "SolverState",
    "find_pivot",
    "strict_pivot",
    "apply_pivot",
    "solve_membership",
    "validate_witness",
    "witness_lower_bound",
    "iteration_cap",
]
