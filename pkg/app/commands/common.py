import argparse
import json
import logging
from enum import IntEnum
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np
from pydantic import BaseModel

from app.config import get_settings
from app.models import RunRecord
from app.utils.formats import render_report

logger = logging.getLogger(__name__)


class ExitCode(IntEnum):
    OK = 0
    WITNESS = 2
    USAGE = 64
    DATA = 65
    NO_INPUT = 66
    SOFTWARE = 70


class UsageError(Exception):
    """Bad command line: unknown flags, missing or conflicting options."""


class AvtaArgumentParser(argparse.ArgumentParser):
    """Raises instead of exiting with 2, which is reserved for witnesses and infeasible verdicts."""

    def error(self, message: str):
        raise UsageError(message)


class Outcome(NamedTuple):
    exit_code: int
    text: str
    counters: Optional[dict[str, int]] = None
    seed: Optional[int] = None
    result_path: Optional[str] = None


def seed_of(args: argparse.Namespace) -> int:
    return get_settings().seed if getattr(args, "seed", None) is None else args.seed


def render(report, args: argparse.Namespace, indices: Optional[list[int]] = None) -> str:
    """Render for stdout and write the same text to ``--report`` when given."""
    text = render_report(report, indices, as_json=args.json)
    if getattr(args, "report", None):
        Path(args.report).write_text(text)
    return text


def _jsonable(value):
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    return value


def run_record(args: argparse.Namespace, outcome: Outcome, wall_time: float) -> RunRecord:
    parameters = {key: _jsonable(value) for key, value in sorted(vars(args).items()) if key != "handler"}
    return RunRecord(
        command=args.command,
        parameters=parameters,
        seed=outcome.seed,
        wall_time=wall_time,
        counters=dict(outcome.counters or {}),
        result_path=outcome.result_path or getattr(args, "report", None),
        exit_code=outcome.exit_code,
    )


def append_run_record(path: Optional[str], record: RunRecord) -> None:
    line = json.dumps(record.model_dump(mode="json"), sort_keys=True)
    if path is None:
        logger.debug("run record: %s", line)
        return
    with open(path, "a", encoding="utf-8") as handle:
        handle.write(line + "\n")


def add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--json", action="store_true", help="print the report as one JSON object")
    parser.add_argument("--report", help="also write the report to this file")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed (default: AVTA_SEED or 0)")


__all__ = [
    "ExitCode",
    "UsageError",
    "AvtaArgumentParser",
    "Outcome",
    "seed_of",
    "render",
    "run_record",
    "append_run_record",
    "add_output_flags",
]
