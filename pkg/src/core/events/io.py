"""Event file readers and writers.

Two formats are supported:

- ``EVB1`` binary: 8-byte magic ``EVB1\\0\\0\\0\\0``, little-endian header
  ``{W: u16, H: u16, count: u64}``, then ``count`` records
  ``{t: f64, x: u16, y: u16, p: i8, pad: i8}``.
- CSV with a ``t,x,y,p`` header line, for debugging. The resolution is not
  stored in CSV files and must be supplied when reading them.
"""

import logging
import struct
from pathlib import Path

import numpy as np
import pandas as pd

from src.core.events.models import EventStream, Resolution
from src.utils.exceptions import ErrorCode, EventFormatError

logger = logging.getLogger(__name__)

EVB1_MAGIC = b"EVB1\x00\x00\x00\x00"
_HEADER = struct.Struct("<HHQ")
EVB1_RECORD = np.dtype(
    [("t", "<f8"), ("x", "<u2"), ("y", "<u2"), ("p", "i1"), ("pad", "i1")]
)
CSV_COLUMNS = ["t", "x", "y", "p"]


def write_evb1(stream: EventStream, path: Path) -> None:
    """Write a stream in the EVB1 binary format."""
    width, height = stream.resolution
    records = np.zeros(len(stream), dtype=EVB1_RECORD)
    records["t"] = stream.t
    records["x"] = stream.x
    records["y"] = stream.y
    records["p"] = stream.p
    with Path(path).open("wb") as fh:
        fh.write(EVB1_MAGIC)
        fh.write(_HEADER.pack(width, height, len(stream)))
        fh.write(records.tobytes())


def read_evb1(path: Path) -> EventStream:
    """Read an EVB1 file.

    Raises:
        EventFormatError: On a bad magic tag or a truncated record block.
    """
    path = Path(path)
    try:
        payload = path.read_bytes()
    except OSError as e:
        raise EventFormatError(f"Cannot read event file: {e}", path=str(path)) from e

    head = len(EVB1_MAGIC) + _HEADER.size
    if len(payload) < head or payload[: len(EVB1_MAGIC)] != EVB1_MAGIC:
        raise EventFormatError("Not an EVB1 event file", path=str(path))
    width, height, count = _HEADER.unpack_from(payload, len(EVB1_MAGIC))
    expected = head + count * EVB1_RECORD.itemsize
    if len(payload) != expected:
        raise EventFormatError(
            "EVB1 record block has the wrong size",
            path=str(path),
            details={"expected_bytes": expected, "actual_bytes": len(payload)},
        )
    records = np.frombuffer(payload, dtype=EVB1_RECORD, count=count, offset=head)
    return EventStream.create(
        records["t"], records["x"], records["y"], records["p"], (width, height)
    )


def write_csv(stream: EventStream, path: Path) -> None:
    """Write a stream as ``t,x,y,p`` CSV."""
    frame = pd.DataFrame({"t": stream.t, "x": stream.x, "y": stream.y, "p": stream.p})
    frame.to_csv(path, index=False, columns=CSV_COLUMNS, float_format="%.9f")


def read_csv(path: Path, resolution: Resolution) -> EventStream:
    """Read a ``t,x,y,p`` CSV file.

    Raises:
        EventFormatError: If the header is missing a column or rows are malformed.
    """
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise EventFormatError(f"Cannot parse event CSV: {e}", path=str(path)) from e
    missing = [c for c in CSV_COLUMNS if c not in frame.columns]
    if missing:
        raise EventFormatError(
            f"Event CSV lacks columns {missing}",
            error_code=ErrorCode.EVENTS_INVALID_FORMAT,
            path=str(path),
        )
    return EventStream.create(
        frame["t"].to_numpy(), frame["x"].to_numpy(), frame["y"].to_numpy(), frame["p"].to_numpy(),
        resolution,
    )


def read_events(path: Path, resolution: Resolution | None = None) -> EventStream:
    """Read an event file, choosing the format by suffix.

    Raises:
        EventFormatError: If the suffix is unknown or a CSV file is read without a resolution.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".evb1":
        stream = read_evb1(path)
    elif suffix == ".csv":
        if resolution is None:
            raise EventFormatError("CSV event files need an explicit resolution", path=str(path))
        stream = read_csv(path, resolution)
    else:
        raise EventFormatError(f"Unknown event file suffix '{suffix}'", path=str(path))
    logger.debug(f"Read {len(stream)} events from {path}")
    return stream


def write_events(stream: EventStream, path: Path) -> None:
    """Write an event file, choosing the format by suffix."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        write_csv(stream, path)
    else:
        write_evb1(stream, path)
