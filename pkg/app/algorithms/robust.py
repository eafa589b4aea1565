"""
Vertex recovery from perturbed data.

A perturbation by at most epsilon * R keeps every vertex a vertex as long as 2 * epsilon < sigma*, but can
create spurious vertices that sit within 2 * epsilon * R of the hull of the others. The recovery runs the
vertex loop at sigma / 2 to get a superset, then prunes members close to the hull of the remaining ones.
"""
import logging
from collections import Counter
from typing import NamedTuple, Optional

import numpy as np

from app.config import get_settings
from app.models import (GammaFloorError, HypothesisViolationError, InvalidInputError, PerturbationReport,
                        PointSet)
from app.utils.distance import hull_projection

from .avta import VertexSearch, avta_gamma
from .projection import choose_target_dim, draw_map, project
from .triangle import solve_membership

logger = logging.getLogger(__name__)


class Tally(NamedTuple):
    frequencies: Counter
    seeds: list[int]
    target_dim: int


def sigma_from_gamma(gamma: float, rho_star: float, R: float) -> float:
    """Lower bound gamma * rho* / R on the weak robustness ratio, valid whenever gamma is."""
    if gamma <= 0 or rho_star <= 0 or R <= 0:
        raise InvalidInputError(f"gamma, rho_star and R must be positive, got {gamma}, {rho_star}, {R}")
    return gamma * rho_star / R


class _Pruner:
    def __init__(self, ps: PointSet, sigma: float, R: float):
        self.ps = ps
        self.sigma = sigma
        self.R = R
        self.limit = sigma * R / 2.0
        self.membership_calls = 0
        self.total_pivots = 0

    def distance_to_others(self, index: int, members: list[int]) -> tuple[float, bool]:
        """
        Certificate distance of ``index`` to the hull of the other members and whether it is below sigma * R / 2.
        """
        others = [member for member in members if member != index]
        point = self.ps.points[index]
        result = solve_membership(self.ps, others, point, self.sigma / 2.0, R=self.R)
        self.membership_calls += 1
        self.total_pivots += result.iterations
        if result.kind == "ApproxSolution":
            return result.distance_to_query, True
        if result.witness_bound is not None and result.witness_bound >= self.limit:
            return result.witness_bound, False
        # a witness only proves distance >= gap / 2; settle the band with the exact projection
        closest = hull_projection(self.ps.points[others], point)
        return closest.distance, closest.distance < self.limit

    def prune(self, superset: list[int]) -> tuple[list[int], list[int], dict[int, float]]:
        members = list(superset)
        removed: list[int] = []
        certificates: dict[int, float] = {}
        while len(members) > 1:
            verdicts = {index: self.distance_to_others(index, members) for index in members}
            certificates.update({index: distance for index, (distance, _) in verdicts.items()})
            close = sorted((distance, index) for index, (distance, is_close) in verdicts.items() if is_close)
            if not close:
                break
            distance, index = close[0]
            members.remove(index)
            removed.append(index)
            logger.debug("pruned %d at distance %.4g (limit %.4g)", index, distance, self.limit)
        return members, removed, certificates


def avta_robust(ps_eps: PointSet, sigma: float, epsilon: float, *, seed: Optional[int] = None,
                R: Optional[float] = None) -> PerturbationReport:
    """
    Vertices of the unperturbed hull from an epsilon-perturbed point set.

    :param ps_eps: perturbed points
    :param sigma: weak-robustness lower bound, 4 * epsilon <= sigma <= 1
    :param epsilon: perturbation scale as a fraction of R
    :raises HypothesisViolationError: when 4 * epsilon > sigma
    """
    if not 0.0 < sigma <= 1.0:
        raise InvalidInputError(f"sigma must lie in (0, 1], got {sigma}")
    if epsilon < 0.0:
        raise InvalidInputError(f"epsilon must be non-negative, got {epsilon}")
    if 4.0 * epsilon > sigma:
        raise HypothesisViolationError(f"recovery needs 4 * epsilon <= sigma, got epsilon={epsilon}, sigma={sigma}")

    seed = get_settings().seed if seed is None else int(seed)
    search = VertexSearch(ps_eps, sigma / 2.0, seed, R=R)
    superset = list(search.run())

    pruner = _Pruner(ps_eps, sigma, search.R)
    kept, removed, certificates = pruner.prune(superset)
    logger.info("robust recovery: %d candidates, %d kept (sigma=%.4g, epsilon=%.4g)",
                len(superset), len(kept), sigma, epsilon)

    return PerturbationReport(
        superset_indices=superset,
        pruned_indices=kept,
        removed_indices=removed,
        certificates=certificates,
        sigma_used=sigma,
        epsilon_assumed=epsilon,
        seed=seed,
        R=search.R,
        membership_calls=search.membership_calls + pruner.membership_calls,
        total_pivots=search.total_pivots + pruner.total_pivots,
    )


def robust_sigma_search(ps_eps: PointSet, K: int, epsilon: float, *, seed: Optional[int] = None,
                        start_sigma: float = 0.5) -> PerturbationReport:
    """
    Halve sigma from ``start_sigma`` until the pruned set has at least K members.

    :raises GammaFloorError: when sigma would break 4 * epsilon <= sigma or fall below the gamma floor
    """
    floor = max(get_settings().gamma_floor, 4.0 * epsilon)
    sigma = start_sigma
    best = 0
    while sigma >= floor:
        report = avta_robust(ps_eps, sigma, epsilon, seed=seed)
        best = max(best, len(report.pruned_indices))
        if len(report.pruned_indices) >= K:
            return report
        sigma /= 2.0
    raise GammaFloorError(f"only {best} vertices recovered before sigma reached {floor:.3g}", found=best, wanted=K)


def projection_tally(ps: PointSet, gamma: float, M: int, target_dim: Optional[int] = None,
                     seed: Optional[int] = None) -> Tally:
    """
    Run the gamma-mode vertex search on M independent random projections and count
    how often each original index comes back as a vertex.
    """
    if M < 1:
        raise InvalidInputError(f"M must be positive, got {M}")
    if target_dim is None:
        target_dim = choose_target_dim(ps.n, gamma, source_dim=ps.m)
    elif target_dim < 1:
        raise InvalidInputError(f"target_dim must be positive, got {target_dim}")

    seed = get_settings().seed if seed is None else int(seed)
    children = np.random.SeedSequence(seed).spawn(M)
    seeds = [int(child.generate_state(1)[0]) for child in children]

    frequencies: Counter = Counter()
    for round_seed in seeds:
        projected = project(draw_map(ps.m, target_dim, round_seed), ps)
        report = avta_gamma(projected, gamma, seed=round_seed)
        frequencies.update(report.vertex_indices)
    return Tally(frequencies, seeds, target_dim)


def top_frequent(frequencies: Counter, K: int) -> list[int]:
    """The K most frequent indices, ties broken by the smaller index."""
    ranked = sorted(frequencies.items(), key=lambda item: (-item[1], item[0]))
    if len(ranked) < K:
        logger.warning("only %d distinct vertices were tallied, fewer than the %d requested", len(ranked), K)
    return [index for index, _ in ranked[:K]]


def multi_projection_vote(ps: PointSet, K: int, gamma: float, M: int, target_dim: Optional[int] = None,
                          seed: Optional[int] = None) -> list[int]:
    """
    Top K indices by how often they are vertices of a random projection.

    :param target_dim: projection dimension, ceil(4 ln(n) / gamma^2) capped at m when omitted
    """
    if K < 1:
        raise InvalidInputError(f"K must be positive, got {K}")
    tally = projection_tally(ps, gamma, M, target_dim=target_dim, seed=seed)
    return top_frequent(tally.frequencies, K)


def recovery_error(true_vertices: np.ndarray, recovered: np.ndarray) -> float:
    """Sum over true vertices of their distance to the hull of the recovered points."""
    true_vertices = np.atleast_2d(np.asarray(true_vertices, dtype=float))
    recovered = np.atleast_2d(np.asarray(recovered, dtype=float))
    if recovered.size == 0:
        raise InvalidInputError("nothing was recovered")
    return float(sum(hull_projection(recovered, vertex).distance for vertex in true_vertices))


__all__ = [
    "Tally",
    "sigma_from_gamma",
    "avta_robust",
    "robust_sigma_search",
    "projection_tally",
    "top_frequent",
    "multi_projection_vote",
    "recovery_error",
]
