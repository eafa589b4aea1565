"""
All Vertex Triangle Algorithm.

Grows a set of certified vertices: every remaining point is tested against the hull of the vertices
found so far; points close to that hull are dropped, and the witness of a point that is not close
gives a direction whose maximizers over the remaining points contain a new vertex.
"""
import logging
from typing import Optional, Sequence

import numpy as np

from app.config import get_settings
from app.models import (ConvexCombination, GammaFloorError, InvalidInputError, MembershipResult, PointSet,
                        VertexCertificate, VertexReport)
from app.utils.distance import compute_diameter, distances_to, materialize

from .triangle import solve_membership

logger = logging.getLogger(__name__)


def farthest(ps: PointSet, origin, among: Sequence[int]) -> int:
    """
    Index in ``among`` farthest from ``origin``; ties go to the smallest index.
    When ``origin`` is a point of the set, the answer is a vertex of the hull of ``among``.
    """
    indices = np.asarray(list(among), dtype=int)
    if indices.size == 0:
        raise InvalidInputError("farthest() needs at least one candidate")
    distances = distances_to(ps, origin, indices)
    return int(indices[distances == distances.max()].min())


class _Remaining:
    """Points of S that are neither vertices yet nor discarded; O(1) removal and uniform sampling."""

    def __init__(self, n: int):
        self.items: list[int] = list(range(n))
        self.slots: dict[int, int] = {index: index for index in range(n)}

    def remove(self, index: int) -> None:
        slot = self.slots.pop(index)
        last = self.items.pop()
        if last != index:
            self.items[slot] = last
            self.slots[last] = slot

    def sample(self, rng: np.random.Generator) -> int:
        return self.items[int(rng.integers(len(self.items)))]

    def __len__(self) -> int:
        return len(self.items)

    def __contains__(self, index: int) -> bool:
        return index in self.slots


class VertexSearch:
    """
    One run of the vertex loop at a fixed relative threshold.

    :param ps: input points
    :param threshold: relative tolerance handed to the membership test (gamma / 2, t / 2 or sigma / 2)
    :param seed: seed of the PCG64 generator that picks the next point
    :param R: scale of the threshold; the diameter of ``ps`` when omitted
    :param argmax_tolerance: band defining the support set of a witness direction, relative to |c'| times the
        coordinate scale
    """

    def __init__(self, ps: PointSet, threshold: float, seed: int, R: Optional[float] = None,
                 argmax_tolerance: Optional[float] = None):
        if not 0.0 < threshold < 1.0:
            raise InvalidInputError(f"threshold must lie in (0, 1), got {threshold}")
        settings = get_settings()
        self.ps = ps
        self.threshold = threshold
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.argmax_tolerance = settings.argmax_tolerance if argmax_tolerance is None else argmax_tolerance
        if R is None:
            diameter = compute_diameter(ps)
            self.R, self.diameter_approximate = diameter.value, diameter.approximate
        else:
            self.R, self.diameter_approximate = float(R), False
        self.scale = max(self.R, float(np.sqrt(ps.squared_norms.max())))

        self.vertices: list[int] = []
        self.certificates: list[VertexCertificate] = []
        self.membership_calls = 0
        self.total_pivots = 0
        self.discarded = 0
        self._outside = np.ones(ps.n, dtype=bool)

    def _add_vertex(self, index: int, remaining: _Remaining, certificate: VertexCertificate) -> None:
        self.vertices.append(index)
        self.certificates.append(certificate)
        self._outside[index] = False
        if index in remaining:
            remaining.remove(index)
        logger.debug("vertex %d found (%s), %d points left", index, certificate.origin, len(remaining))

    def _test(self, v: int, start: Optional[ConvexCombination]) -> MembershipResult:
        result = solve_membership(self.ps, self.vertices, self.ps.points[v], self.threshold,
                                  start=start, R=self.R)
        self.membership_calls += 1
        self.total_pivots += result.iterations
        return result

    def _new_vertex(self, v: int, witness: MembershipResult, remaining: _Remaining) -> Optional[int]:
        """
        Vertex found along c' = v - p', or None when c' does not separate v from the current vertices.
        """
        # c' = v - p' is maximized over S minus the vertices by a face of the hull; discarded points count
        direction = self.ps.points[v] - materialize(witness.combination, self.ps)
        band = self.argmax_tolerance * float(np.linalg.norm(direction)) * self.scale
        candidates = np.flatnonzero(self._outside)
        scores = self.ps.points[candidates] @ direction
        top = float(scores.max())
        if top <= float((self.ps.points[self.vertices] @ direction).max()) + band:
            logger.debug("witness for %d does not separate it from the vertices (|c'|=%.3g), dropping it",
                         v, float(np.linalg.norm(direction)))
            return None
        support = candidates[scores >= top - band]
        pick = int(support[int(self.rng.integers(support.size))])
        vertex = farthest(self.ps, self.ps.points[pick], support)
        self._add_vertex(vertex, remaining, VertexCertificate(
            index=vertex,
            origin="witness",
            tested_index=v,
            direction=direction.tolist(),
            support=sorted(int(index) for index in support),
        ))
        return vertex

    def run(self) -> list[int]:
        remaining = _Remaining(self.ps.n)
        first = farthest(self.ps, self.ps.points[0], range(self.ps.n))
        self._add_vertex(first, remaining, VertexCertificate(index=first, origin="farthest-init"))

        while len(remaining):
            v = remaining.sample(self.rng)
            start: Optional[ConvexCombination] = None
            while True:
                result = self._test(v, start)
                if result.kind == "ApproxSolution":
                    remaining.remove(v)
                    self.discarded += 1
                    break
                vertex = self._new_vertex(v, result, remaining)
                if vertex is None:
                    remaining.remove(v)
                    self.discarded += 1
                    break
                if vertex == v:
                    break
                # re-test v against the larger hull; the witness stays a valid start
                start = result.combination
        return self.vertices

    def report(self, mode: str, gamma: Optional[float] = None, t: Optional[float] = None) -> VertexReport:
        return VertexReport(
            vertex_indices=list(self.vertices),
            certificates=list(self.certificates),
            mode=mode,
            gamma_used=gamma,
            t_used=t,
            seed=self.seed,
            R=self.R,
            diameter_approximate=self.diameter_approximate,
            total_pivots=self.total_pivots,
            membership_calls=self.membership_calls,
            discarded=self.discarded,
        )


def _resolve_seed(seed: Optional[int]) -> int:
    return get_settings().seed if seed is None else int(seed)


def avta_gamma(ps: PointSet, gamma: float, *, seed: Optional[int] = None, R: Optional[float] = None,
               argmax_tolerance: Optional[float] = None) -> VertexReport:
    """
    All vertices of conv(ps) when gamma <= (min distance of a vertex to the hull of the others) / R.
    Whatever gamma is, every reported index is a vertex.

    :param gamma: robustness lower bound in (0, 1); points within gamma * R / 2 of the current hull are dropped
    :param seed: RNG seed, settings.seed when omitted
    :param R: override of the diameter used to scale the threshold
    """
    if not 0.0 < gamma < 1.0:
        raise InvalidInputError(f"gamma must lie in (0, 1), got {gamma}")
    search = VertexSearch(ps, gamma / 2.0, _resolve_seed(seed), R=R, argmax_tolerance=argmax_tolerance)
    search.run()
    report = search.report("gamma", gamma=gamma)
    logger.info("gamma=%.4g: %d vertices of %d points (%d membership calls, %d pivots, seed %d)",
                gamma, len(report), ps.n, report.membership_calls, report.total_pivots, report.seed)
    return report


def avta_t(ps: PointSet, t: float, *, seed: Optional[int] = None, R: Optional[float] = None,
           argmax_tolerance: Optional[float] = None) -> VertexReport:
    """
    Subset of the vertices whose hull is within t * R of every input point.
    """
    if not 0.0 < t < 1.0:
        raise InvalidInputError(f"t must lie in (0, 1), got {t}")
    search = VertexSearch(ps, t / 2.0, _resolve_seed(seed), R=R, argmax_tolerance=argmax_tolerance)
    search.run()
    report = search.report("t_approx", t=t)
    logger.info("t=%.4g: %d of %d points kept (seed %d)", t, len(report), ps.n, report.seed)
    return report


def avta_k(ps: PointSet, K: int, *, seed: Optional[int] = None, start_gamma: float = 0.5,
           gamma_floor: Optional[float] = None, R: Optional[float] = None) -> VertexReport:
    """
    Halve gamma from ``start_gamma`` until at least K vertices come back.
    K = 1 is answered by the farthest-point initialization alone, without a membership call.

    :raises GammaFloorError: when gamma drops below the floor with fewer than K vertices
    """
    if K < 1:
        raise InvalidInputError(f"K must be positive, got {K}")
    if not 0.0 < start_gamma < 1.0:
        raise InvalidInputError(f"start_gamma must lie in (0, 1), got {start_gamma}")
    floor = get_settings().gamma_floor if gamma_floor is None else gamma_floor
    seed = _resolve_seed(seed)
    if R is None:
        R = compute_diameter(ps).value
    if K == 1:
        first = farthest(ps, ps.points[0], range(ps.n))
        return VertexReport(
            vertex_indices=[first],
            certificates=[VertexCertificate(index=first, origin="farthest-init")],
            mode="K_search",
            seed=seed,
            R=R,
        )

    gamma = start_gamma
    trials: list[float] = []
    best = 0
    while gamma >= floor:
        trials.append(gamma)
        report = avta_gamma(ps, gamma, seed=seed, R=R)
        best = max(best, len(report))
        if len(report) >= K:
            return report.model_copy(update={"mode": "K_search", "gamma_trials": trials})
        gamma /= 2.0

    raise GammaFloorError(
        f"only {best} vertices found down to gamma={trials[-1]:.3g}; K={K} is too large or the data is degenerate",
        found=best,
        wanted=K,
    )


def membership_via_vertices(ps: PointSet, p, gamma: float, epsilon: float, *, seed: Optional[int] = None,
                            mode: str = "plain") -> MembershipResult:
    """
    Compute the vertices first, then answer the query against them only.
    The tolerance is scaled by the diameter of the full set, which the vertices attain.
    """
    return vertices_then_membership(ps, p, gamma, epsilon, seed=seed, mode=mode)[0]


def vertices_then_membership(ps: PointSet, p, gamma: float, epsilon: float, *, seed: Optional[int] = None,
                             mode: str = "plain") -> tuple[MembershipResult, VertexReport]:
    if not 0.0 < epsilon < 1.0:
        raise InvalidInputError(f"epsilon must lie in (0, 1), got {epsilon}")
    report = avta_gamma(ps, gamma, seed=seed)
    result = solve_membership(ps, report.vertex_indices, p, epsilon, mode=mode, R=report.R)
    return result, report


__all__ = [
    "farthest",
    "VertexSearch",
    "avta_gamma",
    "avta_t",
    "avta_k",
    "membership_via_vertices",
    "vertices_then_membership",
]
