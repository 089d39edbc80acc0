"""Bit-packed level indicators and popcount joint counting.

For every variable ``k``, level ``a`` and response class ``c`` the
matrix stores one bit per sample of class ``c`` (samples kept in their
original order within the class), set when that sample has level ``a``.
Joint counts of two variables within a class are then a word-wise AND
followed by a population count.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .exceptions import IndexOutOfRange

WORD_BITS = 64


@dataclass(frozen=True, eq=False)
class BitMatrix:
    """Packed indicator rows.

    Attributes
    ----------
    words : ndarray of uint64, shape (sum(arities), total_words)
        Row ``row_offset[k] + a`` holds level ``a`` of variable ``k``.
        Class ``c`` occupies words ``word_offset[c]:word_offset[c+1]``;
        bit ``t`` of that span is the ``t``-th sample of the class.
    row_offset : ndarray of int64, shape (p + 1,)
    word_offset : ndarray of int64, shape (m + 1,)
    arities : ndarray of int64, shape (p,)
    strata_sizes : ndarray of int64, shape (m,)
    sample_order : ndarray of int64, shape (n,)
        Original sample index of each packed bit position, class by class.
    """

    words: np.ndarray
    row_offset: np.ndarray
    word_offset: np.ndarray
    arities: np.ndarray
    strata_sizes: np.ndarray
    sample_order: np.ndarray

    @property
    def p(self):
        return self.arities.shape[0]

    @property
    def m(self):
        return self.strata_sizes.shape[0]

    @property
    def n(self):
        return int(self.strata_sizes.sum())

    @property
    def total_bits(self):
        return self.words.size * WORD_BITS

    def row(self, k, a, c):
        """Raw uint64 words of row (variable ``k``, level ``a``, class ``c``)."""
        self._check(k, a, c)
        return self.words[self.row_offset[k] + a, self.word_offset[c]:self.word_offset[c + 1]]

    def row_bits(self, k, a, c):
        """Row as a boolean vector of length ``strata_sizes[c]``."""
        w = self.row(k, a, c).astype("<u8", copy=False)
        bits = np.unpackbits(w.view(np.uint8), bitorder="little").astype(bool)
        return bits[: self.strata_sizes[c]]

    def row_string(self, k, a, c):
        """Row rendered as ``'0'``/``'1'`` characters in sample order."""
        return "".join("1" if b else "0" for b in self.row_bits(k, a, c))

    def _check(self, k, a, c):
        if not 0 <= k < self.p:
            raise IndexOutOfRange(f"variable {k} out of range [0, {self.p})")
        if not 0 <= a < self.arities[k]:
            raise IndexOutOfRange(f"level {a} out of range for variable {k}")
        if not 0 <= c < self.m:
            raise IndexOutOfRange(f"class {c} out of range [0, {self.m})")


def _pack_rows(mask):
    """Pack a (rows, n_bits) bool array into little-endian uint64 words."""
    rows, nbits = mask.shape
    nwords = -(-nbits // WORD_BITS)
    packed = np.packbits(mask, axis=1, bitorder="little")
    buf = np.zeros((rows, nwords * 8), dtype=np.uint8)
    buf[:, : packed.shape[1]] = packed
    return buf.view("<u8").astype(np.uint64)


def build_bitmatrix(dm):
    """Pack a :class:`~boltssi.discretize.DiscreteMatrix` into a :class:`BitMatrix`."""
    codes = np.asarray(dm.codes)
    ycodes = np.asarray(dm.response_codes)
    arities = np.asarray(dm.arities, dtype=np.int64)
    m = int(dm.response_arity)
    p = codes.shape[1]

    row_offset = np.zeros(p + 1, dtype=np.int64)
    np.cumsum(arities, out=row_offset[1:])
    strata = [np.flatnonzero(ycodes == c) for c in range(m)]
    sizes = np.array([s.size for s in strata], dtype=np.int64)
    word_offset = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(-(-sizes // WORD_BITS), out=word_offset[1:])

    words = np.zeros((row_offset[-1], word_offset[-1]), dtype=np.uint64)
    max_level = int(arities.max()) if p else 0
    for c, idx in enumerate(strata):
        if idx.size == 0:
            continue
        block = codes[idx].T  # (p, n_c)
        for a in range(max_level):
            has = np.flatnonzero(arities > a)
            packed = _pack_rows(block[has] == a)
            words[row_offset[has] + a, word_offset[c]:word_offset[c + 1]] = packed
    words.setflags(write=False)
    return BitMatrix(
        words=words,
        row_offset=row_offset,
        word_offset=word_offset,
        arities=arities,
        strata_sizes=sizes,
        sample_order=np.concatenate(strata) if strata else np.empty(0, np.int64),
    )


def joint_count(bm, i, a, j, b, c):
    """Number of samples with level ``a`` on ``i``, ``b`` on ``j`` and class ``c``."""
    bm._check(i, a, c)
    bm._check(j, b, c)
    return int(_kernels.popcount_and(
        bm.words, bm.row_offset[i] + a, bm.row_offset[j] + b,
        bm.word_offset[c], bm.word_offset[c + 1],
    ))


def level_count(bm, k, a, c):
    bm._check(k, a, c)
    return int(_kernels.popcount_row(
        bm.words, bm.row_offset[k] + a, bm.word_offset[c], bm.word_offset[c + 1]
    ))
