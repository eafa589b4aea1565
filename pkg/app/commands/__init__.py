from . import bench, generate, geometry, systems
from .common import AvtaArgumentParser, ExitCode, Outcome, UsageError


def build_parser() -> AvtaArgumentParser:
    parser = AvtaArgumentParser(prog="avta", description="Convex hull membership, vertex enumeration and "
                                                         "LP column pruning with the Triangle Algorithm")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR (default: AVTA_LOG_LEVEL or WARNING)")
    parser.add_argument("--run-log", help="append one JSON run record per invocation to this file")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for module in (geometry, systems, generate, bench):
        module.register(subparsers)
    return parser


__all__ = [
    "build_parser",
    "ExitCode",
    "Outcome",
    "UsageError",
]
