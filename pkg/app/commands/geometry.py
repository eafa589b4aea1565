import argparse
import logging

from app.algorithms import get_algorithm
from app.algorithms.avta import vertices_then_membership
from app.algorithms.robust import avta_robust, projection_tally, robust_sigma_search, sigma_from_gamma, top_frequent
from app.algorithms.triangle import solve_membership, validate_witness
from app.models import PointSet, RobustnessParams
from app.utils.distance import compute_diameter, min_pairwise_distance
from app.utils.formats import parse_query, read_points

from .common import ExitCode, Outcome, UsageError, add_output_flags, render, seed_of

logger = logging.getLogger(__name__)


def cmd_membership(args: argparse.Namespace) -> Outcome:
    """
    Exit 0 when the query is within epsilon * R of the hull, 2 with a witness otherwise.
    """
    if args.via_vertices and args.gamma is None:
        raise UsageError("--via-vertices needs --gamma")
    ps = read_points(args.input)
    p = parse_query(args.point, ps.m)
    seed = seed_of(args)

    if args.via_vertices:
        result, vertices = vertices_then_membership(ps, p, args.gamma, args.epsilon, seed=seed, mode=args.mode)
        working_set = vertices.vertex_indices
        counters = {"iterations": result.iterations, "pivots": result.pivot_steps + vertices.total_pivots,
                    "membership_calls": vertices.membership_calls + 1}
    else:
        result = solve_membership(ps, None, p, args.epsilon, mode=args.mode)
        working_set = list(range(ps.n))
        counters = {"iterations": result.iterations, "pivots": result.pivot_steps, "membership_calls": 1}

    values = result.model_dump(mode="json")
    values["via_vertices"] = args.via_vertices
    if result.is_witness:
        values["witness_valid"] = validate_witness(ps, working_set, p, result.combination)
    exit_code = ExitCode.WITNESS if result.is_witness else ExitCode.OK
    return Outcome(exit_code, render(values, args), counters, seed)


def _check_modifiers(args: argparse.Namespace) -> None:
    if args.robust and args.project:
        raise UsageError("--robust and --project cannot be combined")
    if args.robust:
        if args.t is not None:
            raise UsageError("--robust works with --gamma/--sigma or --k, not --t")
        if args.eps_perturb is None:
            raise UsageError("--robust needs --eps-perturb")
    elif args.sigma is not None or args.eps_perturb is not None:
        raise UsageError("--sigma and --eps-perturb only apply with --robust")
    if args.project is not None and args.gamma is None:
        raise UsageError("--project needs --gamma")
    if args.project is None and (args.target_dim is not None or args.top is not None):
        raise UsageError("--target-dim and --top only apply with --project")


def _robustness(args: argparse.Namespace, ps: PointSet) -> tuple[RobustnessParams, bool]:
    """
    Parameters of a --robust run and whether the points hold duplicates.
    Without --sigma, sigma is gamma * rho* / R with rho* the smallest pairwise distance.
    """
    R = compute_diameter(ps).value
    if args.k is not None:
        return RobustnessParams(K_known=args.k, epsilon_perturb=args.eps_perturb, R=R), False
    closest = min_pairwise_distance(ps)
    if args.sigma is not None:
        sigma = args.sigma
    elif closest.duplicates:
        raise UsageError("duplicated points make rho* zero, so --gamma bounds no sigma; pass --sigma")
    else:
        sigma = sigma_from_gamma(args.gamma, closest.value, R)
        logger.info("sigma=%.4g from gamma=%.4g, rho*=%.4g, R=%.4g", sigma, args.gamma, closest.value, R)
    params = RobustnessParams(sigma=sigma, epsilon_perturb=args.eps_perturb, R=R, rho_star=closest.value)
    return params, closest.duplicates


def _robust(args: argparse.Namespace, ps: PointSet, seed: int) -> Outcome:
    params, duplicates = _robustness(args, ps)
    if params.mode == "k":
        report = robust_sigma_search(ps, params.K_known, params.epsilon_perturb, seed=seed)
    else:
        report = avta_robust(ps, params.sigma, params.epsilon_perturb, seed=seed, R=params.R)
    values = report.model_dump(mode="json")
    values.update(gamma=args.gamma, rho_star=params.rho_star, duplicates=duplicates,
                  sigma_derived=args.sigma is None and args.k is None)
    counters = {"pivots": report.total_pivots, "membership_calls": report.membership_calls}
    return Outcome(ExitCode.OK, render(values, args, report.pruned_indices), counters, seed)


def _project(args: argparse.Namespace, ps, seed: int) -> Outcome:
    tally = projection_tally(ps, args.gamma, args.project, target_dim=args.target_dim, seed=seed)
    if args.top is not None:
        indices = top_frequent(tally.frequencies, args.top)
    else:
        indices = [index for index, count in tally.frequencies.items() if 2 * count > args.project]
    values = {
        "mode": "projection",
        "gamma": args.gamma,
        "rounds": args.project,
        "target_dim": tally.target_dim,
        "frequencies": {str(index): count for index, count in sorted(tally.frequencies.items())},
        "round_seeds": tally.seeds,
        "seed": seed,
    }
    return Outcome(ExitCode.OK, render(values, args, indices), {"rounds": args.project}, seed)


def cmd_vertices(args: argparse.Namespace) -> Outcome:
    _check_modifiers(args)
    ps = read_points(args.input)
    seed = seed_of(args)
    if args.robust:
        return _robust(args, ps, seed)
    if args.project is not None:
        return _project(args, ps, seed)

    if args.gamma is not None:
        report = get_algorithm("gamma")(ps, args.gamma, seed=seed)
    elif args.k is not None:
        report = get_algorithm("k")(ps, args.k, seed=seed)
    else:
        report = get_algorithm("t")(ps, args.t, seed=seed)
    counters = {"pivots": report.total_pivots, "membership_calls": report.membership_calls}
    return Outcome(ExitCode.OK, render(report, args, report.vertex_indices), counters, seed)


def register(subparsers) -> None:
    membership = subparsers.add_parser("membership", help="approximate convex hull membership of one query")
    membership.add_argument("input", help="point file (CSV or binary)")
    membership.add_argument("point", help="query as x1,x2,... or a one-row CSV file")
    membership.add_argument("--epsilon", type=float, default=0.01, help="tolerance relative to the diameter")
    membership.add_argument("--mode", choices=["plain", "strict"], default="plain")
    membership.add_argument("--via-vertices", action="store_true", help="compute the vertices first")
    membership.add_argument("--gamma", type=float, help="robustness bound for --via-vertices")
    add_output_flags(membership)
    membership.set_defaults(handler=cmd_membership)

    vertices = subparsers.add_parser("vertices", help="vertices of the convex hull")
    vertices.add_argument("input", help="point file (CSV or binary)")
    mode = vertices.add_mutually_exclusive_group(required=True)
    mode.add_argument("--gamma", type=float, help="robustness lower bound in (0, 1)")
    mode.add_argument("--k", type=int, help="number of vertices to find by halving gamma")
    mode.add_argument("--t", type=float, help="approximation level in (0, 1)")
    vertices.add_argument("--robust", action="store_true", help="recover vertices of perturbed data")
    vertices.add_argument("--sigma", type=float, help="weak robustness bound for --robust (default: gamma * rho* / R)")
    vertices.add_argument("--eps-perturb", type=float, help="perturbation scale for --robust")
    vertices.add_argument("--project", type=int, metavar="M", help="vote over M random projections")
    vertices.add_argument("--target-dim", type=int, help="projection dimension for --project")
    vertices.add_argument("--top", type=int, help="keep the TOP most frequent indices for --project")
    add_output_flags(vertices)
    vertices.set_defaults(handler=cmd_vertices)


__all__ = [
    "cmd_membership",
    "cmd_vertices",
    "register",
]
