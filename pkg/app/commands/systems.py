import argparse
import logging
from pathlib import Path

from app.algorithms.lp import cone_feasibility, prune_columns_feasibility, prune_columns_optimization, solve_lp
from app.models import AvtaError, LinearSystem
from app.utils.formats import parse_vector, read_system, write_system

from .common import ExitCode, Outcome, UsageError, add_output_flags, render, seed_of

logger = logging.getLogger(__name__)


def _reduced_path(args: argparse.Namespace) -> Path:
    if args.output:
        return Path(args.output)
    source = Path(args.system)
    return source.with_name(f"{source.stem}.reduced{source.suffix or '.csv'}")


def _load(args: argparse.Namespace) -> LinearSystem:
    system = read_system(args.system)
    if args.anchor is None:
        return system
    return LinearSystem(A=system.A, b=system.b, c=system.c, anchor=parse_vector(args.anchor))


def cmd_lp(args: argparse.Namespace) -> Outcome:
    """
    Prune columns, then report a verdict. Exit 0 for feasible (or a finite optimum), 2 for infeasible.
    """
    if not 0.0 < args.gamma < 1.0:
        raise UsageError(f"--gamma must lie in (0, 1), got {args.gamma}")
    system = _load(args)
    seed = seed_of(args)

    if args.cone:
        verdict = cone_feasibility(system, args.gamma, args.epsilon, seed=seed)
        kept = verdict.kept_indices if verdict.reason == "membership" else list(range(system.n))
        reduced = system.restrict(kept)
        values = verdict.model_dump(mode="json")
        values["verdict"] = "feasible" if verdict.feasible else "infeasible"
        exit_code = ExitCode.OK if verdict.feasible else ExitCode.WITNESS
        iterations = verdict.membership.iterations if verdict.membership else 0
        counters = {"kept_columns": len(kept), "iterations": iterations}
    else:
        if args.optimize:
            reduced, kept = prune_columns_optimization(system, None, args.gamma, dedup=args.dedup, seed=seed)
        else:
            reduced, kept = prune_columns_feasibility(system, args.gamma, dedup=args.dedup, seed=seed)
        outcome = solve_lp(reduced, reduced.c if args.optimize else None)
        if outcome.status == "failed":
            raise AvtaError("the LP solver failed on the reduced system")
        values = {
            "verdict": "feasible" if outcome.status == "optimal" and not args.optimize else outcome.status,
            "value": outcome.value if args.optimize else None,
            "kept_indices": kept,
            "columns": system.n,
        }
        exit_code = ExitCode.WITNESS if outcome.status == "infeasible" else ExitCode.OK
        counters = {"kept_columns": len(kept)}

    path = _reduced_path(args)
    values["reduced_path"] = str(path)
    text = render(values, args, kept)
    write_system(path, reduced)
    logger.info("reduced system with %d of %d columns written to %s", len(kept), system.n, path)
    return Outcome(exit_code, text, counters, seed, str(path))


def register(subparsers) -> None:
    lp = subparsers.add_parser("lp", help="column pruning and feasibility of A x = b, x >= 0")
    lp.add_argument("system", help="system file: A rows, blank line, b row, optional blank line and c row")
    task = lp.add_mutually_exclusive_group(required=True)
    task.add_argument("--feasibility", action="store_true", help="prune hull-interior columns, report feasibility")
    task.add_argument("--optimize", action="store_true", help="prune columns of [c; A], report the optimum")
    task.add_argument("--cone", action="store_true", help="decide b in cone(A) through hyperplane scaling")
    lp.add_argument("--gamma", type=float, required=True, help="robustness lower bound for the pruning")
    lp.add_argument("--epsilon", type=float, default=1e-3, help="membership tolerance for --cone")
    lp.add_argument("--anchor", help="scaling direction a1,a2,... for --cone (default: ones)")
    lp.add_argument("--dedup", action="store_true", help="collapse identical columns before pruning")
    lp.add_argument("--output", help="where to write the reduced system (default: next to the input)")
    add_output_flags(lp)
    lp.set_defaults(handler=cmd_lp)


__all__ = [
    "cmd_lp",
    "register",
]
