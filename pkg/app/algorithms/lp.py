"""
Column pruning for linear programs in standard form and the cone reduction of non-negative systems.
"""
import logging
from typing import Literal, NamedTuple, Optional

import numpy as np
from scipy.optimize import linprog

from app.models import ConeVerdict, InvalidInputError, LinearSystem, PointSet
from app.utils.transformations import choose_anchor, dedupe_rows, scale_to_hyperplane, stack_cost_row

from .avta import avta_gamma
from .triangle import solve_membership

logger = logging.getLogger(__name__)

LpStatus = Literal["optimal", "infeasible", "unbounded", "failed"]


class Pruned(NamedTuple):
    system: LinearSystem
    kept: list[int]


class LpOutcome(NamedTuple):
    status: LpStatus
    value: Optional[float]
    x: Optional[np.ndarray]


def _vertex_columns(columns: np.ndarray, gamma: float, dedup: bool, seed: Optional[int]) -> list[int]:
    """Original indices of the columns that are vertices of the hull of all columns."""
    representatives = dedupe_rows(columns) if dedup else list(range(columns.shape[0]))
    ps = PointSet(columns[representatives])
    report = avta_gamma(ps, gamma, seed=seed)
    kept = sorted(representatives[index] for index in report.vertex_indices)
    logger.info("kept %d of %d columns (gamma=%.4g, dedup=%s)", len(kept), columns.shape[0], gamma, dedup)
    return kept


def prune_columns_feasibility(system: LinearSystem, gamma: float, *, dedup: bool = False,
                              seed: Optional[int] = None) -> Pruned:
    """
    Keep the columns of A that are vertices of the hull of all columns.

    :param dedup: collapse identical columns to their first occurrence before the search
    :return: reduced system and the kept column indices (ascending, into the original A)
    """
    kept = _vertex_columns(system.A.T, gamma, dedup, seed)
    return Pruned(system.restrict(kept), kept)


def prune_columns_optimization(system: LinearSystem, c: Optional[np.ndarray], gamma: float, *,
                               dedup: bool = False, seed: Optional[int] = None) -> Pruned:
    """
    Same pruning on the columns of [c^T; A], so that cost and constraints stay paired.

    :param c: cost vector, the system's own cost row when omitted
    """
    c = system.c if c is None else np.asarray(c, dtype=float).reshape(-1)
    if c is None:
        raise InvalidInputError("optimization pruning needs a cost vector")
    stacked = stack_cost_row(c, system.A)
    kept = _vertex_columns(stacked.T, gamma, dedup, seed)
    reduced = LinearSystem(A=system.A[:, kept], b=system.b, c=c[kept], anchor=system.anchor, beta=system.beta)
    return Pruned(reduced, kept)


def cone_feasibility(system: LinearSystem, gamma: float, epsilon: float, *,
                     seed: Optional[int] = None) -> ConeVerdict:
    """
    Decide whether A x = b has a solution x >= 0.

    Columns and b are scaled onto the hyperplane <a, x> = beta, the scaled columns are reduced to their
    hull vertices and the scaled b is tested against that hull at tolerance epsilon.

    :raises AnchorError: when no anchor is positive on every column
    """
    if not 0.0 < epsilon < 1.0:
        raise InvalidInputError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not np.any(system.b):
        return ConeVerdict(feasible=True, reason="zero-rhs")

    anchor = choose_anchor(system.A, system.anchor)
    if float(anchor @ system.b) <= 0:
        # every a . (A x) is positive for x >= 0, x != 0
        logger.info("anchor separates b from the cone")
        return ConeVerdict(feasible=False, reason="anchor-separates", anchor=anchor.tolist())

    columns, target = scale_to_hyperplane(system.A, system.b, anchor, system.beta)
    ps = PointSet(columns.T)
    report = avta_gamma(ps, gamma, seed=seed)
    result = solve_membership(ps, report.vertex_indices, target, epsilon, R=report.R)
    return ConeVerdict(
        feasible=result.kind == "ApproxSolution",
        reason="membership",
        kept_indices=report.sorted_indices,
        anchor=anchor.tolist(),
        membership=result,
    )


def solve_lp(system: LinearSystem, c: Optional[np.ndarray] = None) -> LpOutcome:
    """
    Float LP verdict with HiGHS: min c.x subject to A x = b, x >= 0 (a zero cost when c is absent).
    """
    cost = system.c if c is None else np.asarray(c, dtype=float)
    if cost is None:
        cost = np.zeros(system.n)
    result = linprog(cost, A_eq=system.A, b_eq=system.b, bounds=(0, None), method="highs")
    if result.status == 0:
        return LpOutcome("optimal", float(result.fun), result.x)
    if result.status == 2:
        return LpOutcome("infeasible", None, None)
    if result.status == 3:
        return LpOutcome("unbounded", None, None)
    logger.warning("linprog failed: %s", result.message)
    return LpOutcome("failed", None, None)


__all__ = [
    "Pruned",
    "LpOutcome",
    "prune_columns_feasibility",
    "prune_columns_optimization",
    "cone_feasibility",
    "solve_lp",
]
