import logging
from typing import Callable

from .avta import avta_gamma, avta_k, avta_t, membership_via_vertices
from .lp import cone_feasibility, prune_columns_feasibility, prune_columns_optimization
from .projection import choose_target_dim, membership_certificate, project
from .robust import avta_robust, multi_projection_vote, robust_sigma_search, sigma_from_gamma
from .triangle import solve_membership

logger = logging.getLogger(__name__)

_ALG_REGISTRY: dict[str, Callable] = {
    "gamma": avta_gamma,
    "k": avta_k,
    "t": avta_t,
}


def get_algorithm(name: str = ""):
    """Vertex enumeration routine for a mode name; unknown names fall back to gamma mode."""
    algorithm = _ALG_REGISTRY.get(name.lower())  # Case-insensitive lookup
    if algorithm is None:
        logger.warning("Unknown vertex mode %r, using gamma mode", name)
        return avta_gamma
    return algorithm


__all__ = [
    "avta_gamma",
    "avta_k",
    "avta_t",
    "avta_robust",
    "choose_target_dim",
    "cone_feasibility",
    "get_algorithm",
    "membership_certificate",
    "membership_via_vertices",
    "multi_projection_vote",
    "project",
    "prune_columns_feasibility",
    "prune_columns_optimization",
    "robust_sigma_search",
    "sigma_from_gamma",
    "solve_membership",
]
