"""Loading and validating tabular data for interaction screening."""

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .exceptions import (
    BadResponse,
    ConstantColumn,
    DimensionTooSmall,
    ParseError,
)


class Family(str, enum.Enum):
    GAUSSIAN = "gaussian"
    BINOMIAL = "binomial"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(
                f"unknown family {value!r}; expected one of "
                f"{[f.value for f in cls]}"
            ) from None


class PairIndex(NamedTuple):
    i: int
    j: int


@dataclass(frozen=True, eq=False)
class Dataset:
    """Covariate matrix, response and family tag.

    ``x`` is ``(n, p)`` float64 and ``y`` has length ``n``.  Instances are
    validated on construction and never mutated afterwards.
    """

    x: np.ndarray
    y: np.ndarray
    family: Family = Family.GAUSSIAN
    column_names: Sequence[str] = field(default=None)
    standardized: bool = False

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.float64).ravel()
        if x.ndim != 2:
            raise DimensionTooSmall(f"x must be 2-D, got shape {x.shape}")
        n, p = x.shape
        if y.shape[0] != n:
            raise DimensionTooSmall(
                f"x has {n} rows but y has {y.shape[0]} entries"
            )
        if n < 4 or p < 2:
            raise DimensionTooSmall(
                f"need n >= 4 and p >= 2, got n={n}, p={p}"
            )
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ParseError("non-finite value in data")
        family = Family.parse(self.family)
        if family is Family.BINOMIAL and not np.all((y == 0) | (y == 1)):
            raise BadResponse("binomial response must contain only 0 and 1")
        names = self.column_names
        if names is None:
            names = [f"x{k}" for k in range(p)]
        names = tuple(str(s) for s in names)
        if len(names) != p:
            raise ValueError(f"{len(names)} column names for {p} columns")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "column_names", names)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]

    @property
    def n_pairs(self):
        return n_pairs(self.p)


def zscore(a, names=None):
    """Column-wise z-score with the ``n - 1`` denominator.

    Raises :class:`ConstantColumn` for any zero-variance column.
    """
    a = np.asarray(a, dtype=np.float64)
    squeeze = a.ndim == 1
    a2 = a.reshape(a.shape[0], -1)
    mean = a2.mean(axis=0)
    centered = a2 - mean
    sd = np.sqrt((centered ** 2).sum(axis=0) / (a2.shape[0] - 1))
    scale = np.maximum(np.abs(mean), 1.0)
    bad = np.flatnonzero(sd <= 1e-12 * scale)
    if bad.size:
        k = int(bad[0])
        raise ConstantColumn(names[k] if names is not None else k)
    out = centered / sd
    return out.ravel() if squeeze else out


def standardize_dataset(ds, standardize_response=False):
    """Return a standardized copy of ``ds``.

    Only covariates are z-scored unless ``standardize_response`` is set,
    which is ignored for the binomial family.
    """
    x = zscore(ds.x, ds.column_names)
    y = ds.y
    if standardize_response and ds.family is Family.GAUSSIAN:
        y = zscore(y, ["<response>"])
    return Dataset(x, y, ds.family, ds.column_names, standardized=True)


def as_dataset(x, y, family="gaussian", column_names=None, standardize_x=False,
               standardize_response=False):
    """Validate array-likes into a :class:`Dataset`."""
    ds = Dataset(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64),
                 Family.parse(family), column_names)
    if standardize_x:
        ds = standardize_dataset(ds, standardize_response)
    return ds


def _parse_float(cell, row, col):
    try:
        v = float(cell)
    except ValueError:
        raise ParseError(f"cannot parse {cell!r} as a number", row=row, column=col) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {cell!r}", row=row, column=col)
    return v


def _looks_numeric(row):
    try:
        for cell in row:
            float(cell)
    except ValueError:
        return False
    return True


def load_delimited(path, response_column, family="gaussian", delimiter=",",
                   standardize=False, header=None, standardize_response=False):
    """Read a delimited text file into a :class:`Dataset`.

    Parameters
    ----------
    path : str or path-like
        UTF-8 text file, one sample per line.
    response_column : str or int
        Header name or zero-based column index of the response.
    family : {"gaussian", "binomial"}
    delimiter : str
        Single character, typically ``","`` or ``"\\t"``.
    standardize : bool
        Z-score every covariate column (``n - 1`` denominator).
    header : bool or None
        ``None`` detects a header by trying to parse the first row as
        numbers.
    standardize_response : bool
        Also z-score a gaussian response.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r and any(c.strip() for c in r)]
    if not rows:
        raise DimensionTooSmall(f"{path}: file is empty")

    if header is None:
        header = not _looks_numeric(rows[0])
    if header:
        names = [c.strip() for c in rows[0]]
        body = rows[1:]
        first_line = 2
    else:
        names = [f"x{k}" for k in range(len(rows[0]))]
        body = rows
        first_line = 1

    width = len(names)
    if isinstance(response_column, str) and not response_column.lstrip("-").isdigit():
        if response_column not in names:
            raise BadResponse(f"response column {response_column!r} not found")
        ycol = names.index(response_column)
    else:
        ycol = int(response_column)
        if not -width <= ycol < width:
            raise BadResponse(f"response column index {ycol} out of range")
        ycol %= width

    values = np.empty((len(body), width))
    for r, row in enumerate(body):
        line = first_line + r
        if len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", row=line)
        for c, cell in enumerate(row):
            values[r, c] = _parse_float(cell.strip(), line, names[c])

    y = values[:, ycol]
    keep = [c for c in range(width) if c != ycol]
    ds = Dataset(values[:, keep], y, Family.parse(family), [names[c] for c in keep])
    if standardize:
        ds = standardize_dataset(ds, standardize_response)
    return ds


standardize = standardize_dataset


def n_pairs(p):
    return p * (p - 1) // 2


def pair_iterator(p) -> Iterator[PairIndex]:
    """Yield every ``(i, j)`` with ``0 <= i < j < p`` in lexicographic order."""
    if p < 2:
        raise DimensionTooSmall(f"need at least 2 columns, got {p}")
    for i in range(p - 1):
        for j in range(i + 1, p):
            yield PairIndex(i, j)


def pair_arrays(p):
    """Vectorized :func:`pair_iterator`: two int64 arrays of length q."""
    if p < 2:
        raise DimensionTooSmall(f"need at least 2 columns, got {p}")
    ii, jj = np.triu_indices(p, k=1)
    return ii.astype(np.int64), jj.astype(np.int64)
