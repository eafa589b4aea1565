import argparse
from pathlib import Path

from app.models import InstanceSpec
from app.utils.datagen import gen_cone_instance, gen_hull_instance
from app.utils.formats import write_metadata, write_points, write_system

from .common import ExitCode, Outcome, add_output_flags, render, seed_of


def metadata_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta")


def cmd_gen(args: argparse.Namespace) -> Outcome:
    """Write a seeded instance and its ``.meta`` sidecar."""
    seed = seed_of(args)
    out = Path(args.out)
    if args.kind == "hull":
        spec = InstanceSpec(K=args.K, n=args.n, m=args.m, vertex_dist=args.vertex_dist, noise=args.noise,
                            noise_scale=args.noise_scale, seed=seed)
        points, truth, metadata = gen_hull_instance(spec)
        write_points(out, points, binary=args.binary)
    else:
        system, truth, metadata = gen_cone_instance(args.K, args.n, args.m, B_scale=args.b_scale, seed=seed)
        write_system(out, system)
    write_metadata(metadata_path(out), metadata)
    values = {"kind": args.kind, "path": str(out), "metadata_path": str(metadata_path(out)), **metadata}
    return Outcome(ExitCode.OK, render(values, args, truth), {"points": args.n}, seed, str(out))


def register(subparsers) -> None:
    gen = subparsers.add_parser("gen", help="generate a synthetic instance with known vertices or generators")
    gen.add_argument("kind", choices=["hull", "cone"])
    gen.add_argument("--K", type=int, required=True, help="number of vertices (hull) or generators (cone)")
    gen.add_argument("--n", type=int, required=True, help="number of points or columns")
    gen.add_argument("--m", type=int, required=True, help="dimension")
    gen.add_argument("--vertex-dist", choices=["gaussian", "gaussian10", "uniform01"], default="gaussian")
    gen.add_argument("--noise", choices=["none", "gaussian", "uniform"], default="none")
    gen.add_argument("--noise-scale", type=float, default=0.0, help="variance (gaussian) or half-width (uniform)")
    gen.add_argument("--b-scale", type=float, default=10.0, help="upper end of the redundant-column weights")
    gen.add_argument("--binary", action="store_true", help="write points in the binary format")
    gen.add_argument("--out", required=True, help="instance file to write")
    add_output_flags(gen)
    gen.set_defaults(handler=cmd_gen)


__all__ = [
    "metadata_path",
    "cmd_gen",
    "register",
]
