import logging
from math import ceil, log
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist

from app.config import get_settings
from app.models import InvalidInputError, JlMap, PointSet, ProjectionCertificate, UndefinedCertificateError
from app.utils.distance import compute_diameter, hull_projection

logger = logging.getLogger(__name__)


def choose_target_dim(n: int, eps_prime: float, c: Optional[float] = None, source_dim: Optional[int] = None) -> int:
    """
    ceil(c * ln(n) / eps_prime^2), at least 1 and capped at the source dimension.

    :param n: number of points
    :param eps_prime: pairwise distortion to tolerate, in (0, 1)
    :param c: universal constant, settings.jl_constant (4) when omitted
    :param source_dim: dimension of the data, the cap
    """
    if not 0.0 < eps_prime <= 1.0:
        raise InvalidInputError(f"eps_prime must lie in (0, 1], got {eps_prime}")
    if n < 1:
        raise InvalidInputError(f"n must be positive, got {n}")
    c = get_settings().jl_constant if c is None else c
    if c <= 0:
        raise InvalidInputError(f"c must be positive, got {c}")
    target = max(1, ceil(c * log(n) / eps_prime ** 2))
    if source_dim is not None:
        target = min(target, int(source_dim))
    return target


def draw_map(source_dim: int, target_dim: int, seed: int) -> JlMap:
    if target_dim < 1 or source_dim < 1:
        raise InvalidInputError(f"dimensions must be positive, got {source_dim} -> {target_dim}")
    return JlMap.draw(source_dim, target_dim, seed)


def project(jl_map: JlMap, ps: PointSet) -> PointSet:
    """Apply the map row by row; row i of the result is the image of point i."""
    if jl_map.source_dim != ps.m:
        raise InvalidInputError(f"map expects dimension {jl_map.source_dim}, points have {ps.m}")
    return PointSet(jl_map(ps.points), cache=ps.cache_enabled)


def measured_distortion(ps: PointSet, projected: PointSet) -> float:
    """Largest |d'(u, v) / d(u, v) - 1| over pairs of distinct points."""
    if ps.n != projected.n:
        raise InvalidInputError("point sets must have the same number of points")
    if ps.n < 2:
        return 0.0
    before = pdist(ps.points)
    after = pdist(projected.points)
    mask = before > 0
    if not mask.any():
        return 0.0
    return float(np.abs(after[mask] / before[mask] - 1.0).max())


def membership_certificate(ps: PointSet, p) -> ProjectionCertificate:
    """
    Ratio certificate of how far outside conv(ps) the point p lies.
    The larger (E - 1) / (E + 1), the smaller a projection distortion that still keeps p outside.

    :raises UndefinedCertificateError: when p lies in the hull (within settings.certificate_epsilon * R)
    """
    settings = get_settings()
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape[0] != ps.m:
        raise InvalidInputError(f"query has dimension {p.shape[0]}, points have {ps.m}")

    R = compute_diameter(ps, approximate=False).value
    scale = max(R, float(np.linalg.norm(ps.points - p, axis=1).max()))
    closest = hull_projection(ps.points, p)
    if closest.distance <= settings.certificate_epsilon * scale:
        raise UndefinedCertificateError("the point lies in the convex hull, no separation certificate exists")

    to_query = np.linalg.norm(ps.points - p, axis=1)
    to_closest = np.linalg.norm(ps.points - closest.point, axis=1)
    usable = to_closest > settings.certificate_epsilon * scale
    E = float((to_query[usable] / to_closest[usable]).min()) if usable.any() else np.inf

    epsilon_bound = 1.0 if np.isinf(E) else (E - 1.0) / (E + 1.0)
    d_min = closest.distance
    D_max = float(to_query.max())
    lower_bound = d_min ** 2 / (4.0 * D_max ** 2)
    holds = epsilon_bound >= lower_bound - 1e-12
    if not holds:
        logger.warning("certificate bound violated: (E-1)/(E+1)=%.6g < d^2/4D^2=%.6g", epsilon_bound, lower_bound)

    return ProjectionCertificate(
        E_ratio=E,
        d_min=d_min,
        D_max=D_max,
        epsilon_bound=epsilon_bound,
        lower_bound=lower_bound,
        bound_holds=holds,
        closest_point=closest.point.tolist(),
    )


__all__ = [
    "choose_target_dim",
    "draw_map",
    "project",
    "measured_distortion",
    "membership_certificate",
]
