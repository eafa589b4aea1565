# Built-in packages import (e.g. os, math,...)
import logging
import sys
from time import perf_counter
from typing import Optional, Sequence

# Imported packages imports
from pydantic import ValidationError

# Project module imports
from app.commands import ExitCode, Outcome, UsageError, build_parser
from app.commands.common import append_run_record, run_record
from app.config import get_settings
from app.models import AnchorError, AvtaError, FormatError, InvalidInputError

logger = logging.getLogger("app")


def configure_logging(level: Optional[str]) -> None:
    level = (level or get_settings().log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _fail(code: ExitCode, message: str) -> int:
    print(f"avta: error: {message}", file=sys.stderr)
    return int(code)


def _execute(args) -> Outcome:
    """Run the handler; errors become an empty outcome with their exit code."""
    try:
        return args.handler(args)
    except UsageError as error:
        code = _fail(ExitCode.USAGE, str(error))
    except FileNotFoundError as error:
        code = _fail(ExitCode.NO_INPUT, f"{error.filename}: no such file")
    except (FormatError, ValidationError) as error:
        code = _fail(ExitCode.DATA, str(error))
    except AnchorError as error:
        code = _fail(ExitCode.DATA, f"{error} ({error.hint})" if error.hint else str(error))
    except InvalidInputError as error:
        code = _fail(ExitCode.USAGE, str(error))
    except AvtaError as error:
        logger.exception("%s failed", args.command)
        code = _fail(ExitCode.SOFTWARE, str(error))
    return Outcome(code, "")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as error:
        print(parser.format_usage(), end="", file=sys.stderr)
        return _fail(ExitCode.USAGE, str(error))

    configure_logging(args.log_level)
    started = perf_counter()
    outcome = _execute(args)
    sys.stdout.write(outcome.text)
    append_run_record(args.run_log, run_record(args, outcome, perf_counter() - started))
    return int(outcome.exit_code)


if __name__ == "__main__":
    sys.exit(main())
