"""
File formats.

Point sets: CSV (one point per row, optional header line) or binary
(magic ``AVTA1``, little-endian u64 n, u64 m, then n * m little-endian f64 row-major).
Systems: CSV blocks separated by a blank line, A (m rows) then b then optionally c.
Metadata and reports: one ``key=value`` per line.
"""
import json
import struct
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np
from pydantic import BaseModel

from app.models import FormatError, LinearSystem, PointSet

MAGIC = b"AVTA1"
_HEADER = struct.Struct("<QQ")

PathLike = Union[str, Path]


def _is_numeric_row(line: str) -> bool:
    try:
        np.loadtxt([line], delimiter=",", ndmin=2)
    except ValueError:
        return False
    return True


def parse_csv_matrix(text: str, allow_header: bool = True) -> np.ndarray:
    """
    Comma separated rows, blank lines ignored. A first line that does not parse as numbers is a header.

    :raises FormatError: on an empty input, ragged or non-numeric rows, or non-finite values
    """
    lines = [line for line in text.splitlines() if line.strip()]
    if lines and allow_header and not _is_numeric_row(lines[0]):
        lines = lines[1:]
    if not lines:
        raise FormatError("no data rows")
    try:
        matrix = np.loadtxt(lines, delimiter=",", ndmin=2, dtype=float)
    except ValueError as error:
        raise FormatError(f"malformed CSV: {error}") from error
    if not np.all(np.isfinite(matrix)):
        raise FormatError("non-finite values in the data")
    return matrix


def _read_binary(data: bytes) -> np.ndarray:
    offset = len(MAGIC)
    if len(data) < offset + _HEADER.size:
        raise FormatError("truncated binary header")
    n, m = _HEADER.unpack_from(data, offset)
    payload = data[offset + _HEADER.size:]
    if len(payload) != 8 * n * m:
        raise FormatError(f"binary payload holds {len(payload)} bytes, expected {8 * n * m} for {n} x {m}")
    if n == 0 or m == 0:
        raise FormatError("empty point set")
    return np.frombuffer(payload, dtype="<f8").reshape(n, m).astype(float)


def read_points(path: PathLike) -> PointSet:
    """
    :raises FileNotFoundError: when the file is missing
    :raises FormatError: when its contents are malformed
    """
    data = Path(path).read_bytes()
    if data.startswith(MAGIC):
        matrix = _read_binary(data)
    else:
        try:
            matrix = parse_csv_matrix(data.decode("utf-8"))
        except UnicodeDecodeError as error:
            raise FormatError(f"{path} is neither CSV nor the binary point format") from error
    try:
        return PointSet(matrix)
    except ValueError as error:
        raise FormatError(str(error)) from error


def write_points(path: PathLike, points, binary: bool = False) -> None:
    matrix = points.points if isinstance(points, PointSet) else np.atleast_2d(np.asarray(points, dtype=float))
    path = Path(path)
    if binary:
        path.write_bytes(MAGIC + _HEADER.pack(*matrix.shape) + matrix.astype("<f8").tobytes())
    else:
        path.write_text("".join(_csv_line(row) for row in matrix))


def _csv_line(values: Iterable[float]) -> str:
    return ",".join(repr(float(value)) for value in values) + "\n"


def parse_query(value: str, m: int) -> np.ndarray:
    """A query point given inline as ``x1,x2,...`` or as the path of a one-row CSV file."""
    candidate = Path(value)
    text = candidate.read_text() if candidate.is_file() else value
    query = parse_csv_matrix(text, allow_header=candidate.is_file())
    if query.shape[0] != 1:
        raise FormatError(f"a query is one row, got {query.shape[0]}")
    if query.shape[1] != m:
        raise FormatError(f"the query has {query.shape[1]} coordinates, the points have {m}")
    return query[0]


def parse_vector(value: str) -> np.ndarray:
    return parse_csv_matrix(value, allow_header=False).reshape(-1)


def _blocks(text: str) -> list[str]:
    """Runs of non-blank lines; a line holding only whitespace separates two blocks."""
    blocks: list[list[str]] = [[]]
    for line in text.splitlines():
        if line.strip():
            blocks[-1].append(line)
        elif blocks[-1]:
            blocks.append([])
    return ["\n".join(block) for block in blocks if block]


def read_system(path: PathLike) -> LinearSystem:
    blocks = _blocks(Path(path).read_text())
    if len(blocks) not in (2, 3):
        raise FormatError(f"a system file holds A, b and optionally c; found {len(blocks)} blocks")
    A = parse_csv_matrix(blocks[0])
    vectors = [parse_csv_matrix(block, allow_header=False) for block in blocks[1:]]
    for vector in vectors:
        if vector.shape[0] != 1:
            raise FormatError("b and c are single rows")
    try:
        return LinearSystem(A=A, b=vectors[0][0], c=vectors[1][0] if len(vectors) == 2 else None)
    except ValueError as error:
        raise FormatError(str(error)) from error


def write_system(path: PathLike, system: LinearSystem) -> None:
    blocks = ["".join(_csv_line(row) for row in system.A), _csv_line(system.b)]
    if system.c is not None:
        blocks.append(_csv_line(system.c))
    Path(path).write_text("\n".join(blocks))


def _format_value(value) -> str:
    if isinstance(value, (list, dict, tuple)):
        return json.dumps(value, separators=(",", ":"), sort_keys=True)
    if value is None:
        return ""
    return str(value)


def render_key_values(values: dict) -> str:
    return "".join(f"{key}={_format_value(value)}\n" for key, value in values.items())


def write_metadata(path: PathLike, metadata: dict) -> None:
    Path(path).write_text(render_key_values(metadata))


def read_metadata(path: PathLike) -> dict[str, str]:
    metadata = {}
    for number, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        key, separator, value = line.partition("=")
        if not separator:
            raise FormatError(f"line {number}: expected key=value")
        metadata[key.strip()] = value
    return metadata


def render_report(report: Union[BaseModel, dict], indices: Optional[list[int]] = None,
                  as_json: bool = False) -> str:
    """
    Text form: the index list on the first line (space separated, ascending) then ``key=value`` lines.
    JSON form: the same content as one object.
    """
    values = report.model_dump(mode="json") if isinstance(report, BaseModel) else dict(report)
    if indices is not None:
        values = {"indices": sorted(indices), **values}
    if as_json:
        return json.dumps(values, sort_keys=True) + "\n"
    head = " ".join(str(index) for index in sorted(indices)) + "\n" if indices is not None else ""
    values.pop("indices", None)
    return head + render_key_values(values)


__all__ = [
    "MAGIC",
    "parse_csv_matrix",
    "read_points",
    "write_points",
    "parse_query",
    "parse_vector",
    "read_system",
    "write_system",
    "render_key_values",
    "write_metadata",
    "read_metadata",
    "render_report",
]
