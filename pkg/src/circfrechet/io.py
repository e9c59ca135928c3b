"""CSV ingestion and emission for angle samples and paired datasets.

Response encodings by space: ``euclidean`` uses every non-predictor column
(or the named ones), ``circle`` one radians column, ``wasserstein`` the
columns ``q1..qQ``.  Numbers are written with 17 significant digits so a
write/read cycle is lossless.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .circle import CircularSample, canonical_angle
from .errors import DomainError, EmptySampleError, ParseError
from .frechet_lc import PairedSample
from .metric import MetricSpace, Wasserstein1D

__all__ = [
    "DatasetSchema",
    "load_paired_dataset",
    "load_angles",
    "write_paired_dataset",
    "write_angles",
    "write_rows",
    "format_number",
]


def format_number(x) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class DatasetSchema:
    predictor_column: str = "angle"
    angle_unit: str = "radians"
    response_columns: Optional[tuple] = None
    delimiter: str = ","

    def __post_init__(self):
        if self.angle_unit not in ("radians", "degrees"):
            raise DomainError(f"angle unit must be radians or degrees, got {self.angle_unit!r}")
        if self.response_columns is not None:
            object.__setattr__(self, "response_columns", tuple(self.response_columns))

    def to_radians(self, values: np.ndarray) -> np.ndarray:
        if self.angle_unit == "degrees":
            values = np.deg2rad(values)
        return canonical_angle(values)


def _read_table(path, delimiter):
    """Header and data rows with their 1-based line numbers (header is line 1)."""
    with open(path, newline="") as fh:
        rows = [(i + 1, r) for i, r in enumerate(csv.reader(fh, delimiter=delimiter))
                if any(cell.strip() for cell in r)]
    if not rows:
        raise EmptySampleError(f"{path}: file is empty")
    header = [c.strip() for c in rows[0][1]]
    data = rows[1:]
    if not data:
        raise EmptySampleError(f"{path}: no data rows")
    return header, data


def _column_index(header, name, path):
    try:
        return header.index(name)
    except ValueError:
        raise ParseError(f"{path}: missing column {name!r}") from None


def _numeric_block(data, header, cols, path):
    out = np.empty((len(data), len(cols)))
    for r, (line, row) in enumerate(data):
        if len(row) != len(header):
            raise ParseError(f"{path}: row {line} has {len(row)} fields, expected {len(header)}")
        for c, ci in enumerate(cols):
            cell = row[ci].strip()
            try:
                out[r, c] = float(cell)
            except ValueError:
                raise ParseError(f"{path}: non-numeric value {cell!r}, row {line}, column {header[ci]!r}") from None
            if not math.isfinite(out[r, c]):
                raise ParseError(f"{path}: non-finite value {cell!r}, row {line}, column {header[ci]!r}")
    return out


def _response_columns(space: MetricSpace, header, schema):
    if schema.response_columns is not None:
        return list(schema.response_columns)
    if isinstance(space, Wasserstein1D):
        return [f"q{k + 1}" for k in range(space.size)]
    if space.name == "circle":
        return ["response"] if "response" in header else [h for h in header if h != schema.predictor_column][:1]
    return [h for h in header if h != schema.predictor_column]


def load_paired_dataset(path, space: MetricSpace, schema: DatasetSchema = DatasetSchema()) -> PairedSample:
    """Read ``(angle, response)`` rows into a :class:`PairedSample`.

    Errors name the offending file line (the header is line 1) and column.
    """
    header, data = _read_table(path, schema.delimiter)
    pi = _column_index(header, schema.predictor_column, path)
    names = _response_columns(space, header, schema)
    if not names:
        raise ParseError(f"{path}: no response columns")
    ri = [_column_index(header, n, path) for n in names]
    angles = schema.to_radians(_numeric_block(data, header, [pi], path)[:, 0])
    resp = _numeric_block(data, header, ri, path)
    if isinstance(space, Wasserstein1D):
        bad = np.nonzero(np.any(np.diff(resp, axis=1) < 0, axis=1))[0]
        if bad.size:
            line = data[int(bad[0])][0]
            k = int(np.argmax(np.diff(resp[bad[0]]) < 0)) + 1
            raise ParseError(f"{path}: non-monotone quantiles, row {line}, column {names[k]!r}")
    else:
        if resp.shape[1] == 1:
            resp = resp[:, 0]
    resp = space.as_points(resp)
    return PairedSample(CircularSample(angles), resp)


def load_angles(path, column: Optional[str] = None, degrees: bool = False,
                delimiter: str = ",") -> CircularSample:
    """Read one column of angles; the first column when ``column`` is None."""
    header, data = _read_table(path, delimiter)
    ci = 0 if column is None else _column_index(header, column, path)
    schema = DatasetSchema(angle_unit="degrees" if degrees else "radians")
    vals = _numeric_block([(line, row[:len(header)]) for line, row in data], header, [ci], path)[:, 0]
    return CircularSample(schema.to_radians(vals))


def write_rows(path_or_file, header: Sequence[str], rows) -> None:
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_number(v) if isinstance(v, (float, np.floating)) else v for v in row])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)


def _response_header(space: MetricSpace, resp: np.ndarray):
    if isinstance(space, Wasserstein1D):
        return [f"q{k + 1}" for k in range(space.size)]
    if resp.ndim == 1:
        return ["response"]
    return [f"y{k + 1}" for k in range(resp.shape[1])]


def write_paired_dataset(path, sample: PairedSample, space: MetricSpace) -> None:
    resp = space.as_points(sample.responses)
    header = ["angle"] + _response_header(space, resp)
    flat = resp.reshape(len(resp), -1)
    write_rows(path, header, ([float(a)] + [float(v) for v in r] for a, r in zip(sample.angles, flat)))


def write_angles(path, sample: CircularSample) -> None:
    write_rows(path, ["angle"], ([float(a)] for a in sample.angles))
