"""Three-way contingency tables assembled from a :class:`BitMatrix`."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .exceptions import DegeneratePair, IndexOutOfRange


@dataclass(frozen=True, eq=False)
class ContingencyTable3:
    """Counts ``n[a, b, c]`` over levels of two variables and the response.

    Margins are computed lazily and cached; they are exact integers.
    """

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 3:
            raise ValueError(f"expected a 3-way table, got shape {counts.shape}")
        if counts.dtype.kind == "f":
            if not np.all(np.isfinite(counts)) or np.any(counts < 0):
                raise ValueError("counts must be finite and nonnegative")
        else:
            counts = counts.astype(np.int64)
            if np.any(counts < 0):
                raise ValueError("counts must be nonnegative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def shape(self):
        return self.counts.shape

    @cached_property
    def n_ab(self):
        return self.counts.sum(axis=2)

    @cached_property
    def n_ac(self):
        return self.counts.sum(axis=1)

    @cached_property
    def n_bc(self):
        return self.counts.sum(axis=0)

    @cached_property
    def n_a(self):
        return self.counts.sum(axis=(1, 2))

    @cached_property
    def n_b(self):
        return self.counts.sum(axis=(0, 2))

    @cached_property
    def n_c(self):
        return self.counts.sum(axis=(0, 1))

    @cached_property
    def total(self):
        return self.counts.sum()

    def as_float(self):
        return np.ascontiguousarray(self.counts, dtype=np.float64)

    def transpose(self):
        """Swap the two predictor axes."""
        return ContingencyTable3(np.ascontiguousarray(self.counts.transpose(1, 0, 2)))


def build_table(bm, i, j=None):
    """Tabulate the pair ``(i, j)`` via AND + popcount over packed rows.

    ``i`` may also be a :class:`~boltssi.ingest.PairIndex` with ``j``
    omitted.
    """
    if j is None:
        i, j = i
    for k in (i, j):
        if not 0 <= k < bm.p:
            raise IndexOutOfRange(f"variable {k} out of range [0, {bm.p})")
    li = int(bm.arities[i])
    lj = int(bm.arities[j])
    if li < 2 or lj < 2:
        raise DegeneratePair(f"pair ({i}, {j}) has a single-level variable")
    out = np.zeros((li, lj, bm.m), dtype=np.float64)
    _kernels.fill_table(bm.words, bm.row_offset[i], li, bm.row_offset[j], lj,
                        bm.word_offset, bm.m, out)
    return ContingencyTable3(out.astype(np.int64))
