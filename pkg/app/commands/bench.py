"""
Benchmark suites. Each size is one cell with its own seed drawn from the master seed and the cell index;
wall-clock columns (``*_seconds``) depend on the machine, counter columns do not.
"""
import argparse
import csv
import logging
from pathlib import Path
from time import perf_counter
from typing import Callable

import numpy as np

from app.algorithms.avta import avta_k
from app.algorithms.robust import multi_projection_vote, recovery_error
from app.algorithms.triangle import solve_membership
from app.models import InstanceSpec, PointSet
from app.utils.datagen import cone_queries, gaussian_noise, gen_cone_instance, gen_hull_instance
from app.utils.distance import compute_diameter
from app.utils.transformations import choose_anchor

from .common import ExitCode, Outcome, UsageError, add_output_flags, render, seed_of

logger = logging.getLogger(__name__)


def cell_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence([master, index]).generate_state(1)[0])


def _hull_queries(ps: PointSet, count: int, rng: np.random.Generator) -> np.ndarray:
    """Half convex combinations of five random points, half pushed out past a random point."""
    centre = ps.points.mean(axis=0)
    queries = []
    for index in range(count):
        if index % 2 == 0:
            chosen = ps.points[rng.choice(ps.n, size=min(5, ps.n), replace=False)]
            weights = rng.random(chosen.shape[0])
            queries.append(weights / weights.sum() @ chosen)
        else:
            queries.append(centre + 2.0 * (ps.points[rng.integers(ps.n)] - centre))
    return np.asarray(queries)


def membership_scaling(size: float, seed: int, args: argparse.Namespace) -> dict:
    spec = InstanceSpec(K=args.k, n=int(size), m=args.m, seed=seed)
    ps = gen_hull_instance(spec).points
    queries = _hull_queries(ps, args.queries, np.random.default_rng(seed))
    R = compute_diameter(ps).value

    started = perf_counter()
    direct = [solve_membership(ps, None, q, args.epsilon, R=R) for q in queries]
    direct_seconds = perf_counter() - started

    started = perf_counter()
    report = avta_k(ps, args.k, seed=seed, R=R)
    first = solve_membership(ps, report.vertex_indices, queries[0], args.epsilon, R=R)
    end_to_end_seconds = perf_counter() - started
    rest = [solve_membership(ps, report.vertex_indices, q, args.epsilon, R=R) for q in queries[1:]]
    amortized_seconds = perf_counter() - started

    return {
        "n": int(size),
        "direct_seconds": direct_seconds,
        "avta_end_to_end_seconds": end_to_end_seconds,
        "avta_amortized_seconds": amortized_seconds,
        "vertices": len(report),
        "membership_calls": report.membership_calls,
        "direct_iterations": sum(result.iterations for result in direct),
        "avta_iterations": sum(result.iterations for result in [first, *rest]),
    }


def feasibility_amortization(size: float, seed: int, args: argparse.Namespace) -> dict:
    queries_count = int(size)
    instance = gen_cone_instance(args.k, args.n, args.m, seed=seed)
    system = instance.system
    queries, labels = cone_queries(system, queries_count, seed=seed)

    anchor = choose_anchor(system.A, system.anchor)
    ps = PointSet((system.A * (system.beta / (anchor @ system.A))).T)
    R = compute_diameter(ps).value

    def scaled(b: np.ndarray):
        level = float(anchor @ b)
        return None if level <= 0 else b * (system.beta / level)

    def decide(working_set, b) -> tuple[bool, int]:
        target = scaled(b)
        if target is None:
            return False, 0
        result = solve_membership(ps, working_set, target, args.epsilon, R=R)
        return result.kind == "ApproxSolution", result.iterations

    started = perf_counter()
    direct = [decide(None, b) for b in queries]
    direct_seconds = perf_counter() - started

    started = perf_counter()
    report = avta_k(ps, args.k, seed=seed, R=R)
    pruned = [decide(report.vertex_indices, b) for b in queries]
    avta_seconds = perf_counter() - started

    return {
        "queries": queries_count,
        "direct_seconds": direct_seconds,
        "avta_seconds": avta_seconds,
        "direct_iterations": sum(iterations for _, iterations in direct),
        "avta_iterations": sum(iterations for _, iterations in pruned),
        "avta_agreement": sum(verdict == label for (verdict, _), label in zip(pruned, labels)) / queries_count,
        "kept_columns": len(report),
    }


def vertex_scaling(size: float, seed: int, args: argparse.Namespace) -> dict:
    spec = InstanceSpec(K=args.k, n=int(size), m=args.m, seed=seed)
    ps = gen_hull_instance(spec).points
    started = perf_counter()
    report = avta_k(ps, args.k, seed=seed)
    return {
        "n": int(size),
        "seconds": perf_counter() - started,
        "vertices": len(report),
        "membership_calls": report.membership_calls,
        "pivots": report.total_pivots,
    }


def perturbation_recovery(size: float, seed: int, args: argparse.Namespace) -> dict:
    """Recovery error after N(0, tau) noise, single run against the projection vote."""
    instance = gen_hull_instance(InstanceSpec(K=args.k, n=args.n, m=args.m, seed=seed))
    true_vertices = instance.points.points[instance.vertex_indices]
    noisy = gaussian_noise(instance.points, size, seed=seed)

    started = perf_counter()
    report = avta_k(noisy, args.k, seed=seed)
    single_seconds = perf_counter() - started
    gamma = report.gamma_trials[-1]
    started = perf_counter()
    voted = multi_projection_vote(noisy, args.k, gamma, args.rounds, seed=seed)
    projection_seconds = perf_counter() - started

    return {
        "tau": size,
        "single_error": recovery_error(true_vertices, noisy.points[report.vertex_indices]),
        "projection_error": recovery_error(true_vertices, noisy.points[voted]),
        "single_seconds": single_seconds,
        "projection_seconds": projection_seconds,
    }


_SUITES: dict[str, Callable[[float, int, argparse.Namespace], dict]] = {
    "membership-scaling": membership_scaling,
    "feasibility-amortization": feasibility_amortization,
    "vertex-scaling": vertex_scaling,
    "perturbation-recovery": perturbation_recovery,
}


def _cells(args: argparse.Namespace) -> int:
    if args.suite in ("membership-scaling", "vertex-scaling"):
        return sum(int(size) * args.m for size in args.sizes)
    if args.suite == "feasibility-amortization":
        return sum(int(size) * args.n * args.m for size in args.sizes)
    return len(args.sizes) * args.n * args.m


def write_plot_data(path: Path, suite: str, rows: list[dict]) -> None:
    x_name = next(iter(rows[0]))
    blocks = [f"# {suite}: x={x_name}; *_seconds series are machine-dependent\n"]
    for column in list(rows[0])[1:]:
        lines = "".join(f"{row[x_name]} {row[column]}\n" for row in rows)
        blocks.append(f"# series {column}\n{lines}")
    path.write_text("\n\n".join(blocks))


def cmd_bench(args: argparse.Namespace) -> Outcome:
    if not args.sizes:
        raise UsageError("--sizes needs at least one value")
    cells = _cells(args)
    if cells > args.max_cells:
        raise UsageError(f"suite needs {cells} cells, above --max-cells {args.max_cells}")
    master = seed_of(args)

    rows = []
    for index, size in enumerate(args.sizes):
        logger.info("%s: cell %d (size %s)", args.suite, index, size)
        rows.append(_SUITES[args.suite](size, cell_seed(master, index), args))

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{args.suite}.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    plot_path = out_dir / f"{args.suite}.plot.dat"
    write_plot_data(plot_path, args.suite, rows)

    values = {"suite": args.suite, "rows": len(rows), "csv_path": str(csv_path), "plot_path": str(plot_path),
              "seed": master, "note": "wall-clock columns are machine-dependent"}
    return Outcome(ExitCode.OK, render(values, args), {"cells": len(rows)}, master, str(csv_path))


def _sizes(value: str) -> list[float]:
    try:
        return [float(item) for item in value.split(",") if item.strip()]
    except ValueError as error:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers: {error}") from error


def register(subparsers) -> None:
    bench = subparsers.add_parser("bench", help="emit a benchmark table and plot data")
    bench.add_argument("suite", choices=sorted(_SUITES))
    bench.add_argument("--sizes", type=_sizes, required=True,
                       help="n per cell; query counts for feasibility-amortization; tau for perturbation-recovery")
    bench.add_argument("--k", type=int, default=10, help="vertices or generators per instance")
    bench.add_argument("--m", type=int, default=10, help="dimension")
    bench.add_argument("--n", type=int, default=500, help="points or columns when the size is not n")
    bench.add_argument("--queries", type=int, default=10, help="queries per cell in membership-scaling")
    bench.add_argument("--epsilon", type=float, default=0.01)
    bench.add_argument("--rounds", type=int, default=5, help="projections for perturbation-recovery")
    bench.add_argument("--out-dir", default=".", help="directory for the CSV and plot-data files")
    bench.add_argument("--max-cells", type=int, default=50_000_000, help="refuse suites above this many cells")
    add_output_flags(bench)
    bench.set_defaults(handler=cmd_bench)


__all__ = [
    "cell_seed",
    "membership_scaling",
    "feasibility_amortization",
    "vertex_scaling",
    "perturbation_recovery",
    "write_plot_data",
    "cmd_bench",
    "register",
]
