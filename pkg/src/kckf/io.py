"""CSV datasets, truth files and estimate files.

Floats are written with ``repr`` (shortest round-trip form), so a file
written here reads back bit-identically.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import TextIO

import numpy as np
import numpy.typing as npt

from .errors import DatasetError
from .models import ImuData
from .quaternion import quats_to_euler

DATASET_COLUMNS = ("t", "gx", "gy", "gz", "ax", "ay", "az", "mx", "my", "mz")
ATTITUDE_COLUMNS = ("t", "q0", "q1", "q2", "q3", "roll", "pitch", "yaw")


def _write_rows(fh: TextIO, header: tuple[str, ...], table: npt.NDArray[np.float64]) -> None:
    fh.write(",".join(header) + "\n")
    for row in table:
        fh.write(",".join(repr(float(x)) for x in row) + "\n")


def _read_table(path: str | Path, columns: tuple[str, ...]) -> npt.NDArray[np.float64]:
    """Read the named columns as floats, checking the time column is strictly increasing.

    Extra columns are ignored and the header may list columns in any order.
    Line numbers in errors are 1-based file lines (the header is line 1).
    """
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise DatasetError(f"{path}: cannot open ({exc.strerror})") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DatasetError(f"{path}: empty file, expected a header", line=1)
        header = [h.strip() for h in header]
        index = {}
        for name in columns:
            if name not in header:
                raise DatasetError(f"{path}: missing column {name!r}", line=1, column=name)
            index[name] = header.index(name)
        width = len(header)
        rows = []
        prev_t = -np.inf
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != width:
                raise DatasetError(f"{path}: expected {width} fields, got {len(row)}", line=line)
            values = []
            for name in columns:
                cell = row[index[name]].strip()
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DatasetError(f"{path}: non-numeric value {cell!r}", line=line, column=name) from None
            t = values[0]
            if not np.isfinite(t):
                raise DatasetError(f"{path}: non-finite time {t!r}", line=line, column=columns[0])
            if t <= prev_t:
                raise DatasetError(f"{path}: time {t!r} does not increase", line=line, column=columns[0])
            prev_t = t
            rows.append(values)
    return np.array(rows, dtype=np.float64).reshape(-1, len(columns))


def parse_dataset(path: str | Path) -> ImuData:
    """Load a raw nine-axis CSV (header ``t,gx,gy,gz,ax,ay,az,mx,my,mz``).

    Raises
    ------
    DatasetError
        On a missing column, a non-numeric cell, a ragged row or a time
        that is not strictly greater than the previous row's; the error
        names the line and column.
    """
    a = _read_table(path, DATASET_COLUMNS)
    return ImuData(a[:, 0], a[:, 1:4], a[:, 4:7], a[:, 7:10])


def write_dataset(path: str | Path, data: ImuData) -> None:
    with Path(path).open("w", newline="") as fh:
        _write_rows(fh, DATASET_COLUMNS, np.column_stack([data.t, data.gyro, data.acc, data.mag]))


def write_attitude(path: str | Path, t: npt.ArrayLike, q: npt.ArrayLike) -> None:
    """Write ``t, q0..q3, roll, pitch, yaw`` rows (angles in degrees)."""
    t = np.asarray(t, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64).reshape(-1, 4)
    if t.shape[0] != q.shape[0]:
        raise ValueError(f"{t.shape[0]} times for {q.shape[0]} quaternions")
    euler = quats_to_euler(q) if q.shape[0] else np.empty((0, 3))
    with Path(path).open("w", newline="") as fh:
        _write_rows(fh, ATTITUDE_COLUMNS, np.column_stack([t, q, euler]))


def read_attitude(path: str | Path) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Read a truth or estimate file as ``(t, q, euler_deg)``."""
    a = _read_table(path, ATTITUDE_COLUMNS)
    return a[:, 0], a[:, 1:5], a[:, 5:8]


__all__ = [
    "ATTITUDE_COLUMNS",
    "DATASET_COLUMNS",
    "parse_dataset",
    "read_attitude",
    "write_attitude",
    "write_dataset",
]
