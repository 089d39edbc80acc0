import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boltssi.bitmat import WORD_BITS, build_bitmatrix, joint_count, level_count
from boltssi.contingency import ContingencyTable3, build_table
from boltssi.discretize import DiscreteMatrix, DiscretizationSpec, discretize
from boltssi.exceptions import DegeneratePair, IndexOutOfRange
from boltssi.ingest import Dataset

X1 = [1, 3, 2, 3, 1, 2, 3, 2, 2, 2, 1, 1, 3, 2, 2, 1]
X2 = [3, 2, 1, 1, 3, 2, 2, 1, 2, 3, 2, 3, 1, 2, 3, 2]
Y = [0] * 8 + [1] * 8


@pytest.fixture
def printed():
    codes = np.column_stack([X1, X2]).astype(np.uint8) - 1
    return build_bitmatrix(DiscreteMatrix(codes, np.array([3, 3]), np.array(Y, np.uint8), 2))


def random_matrix(rng, n, p, arity, m=2):
    codes = rng.integers(0, arity, size=(n, p)).astype(np.uint8)
    codes[:arity] = np.arange(arity)[:, None]  # every level present
    y = rng.integers(0, m, size=n).astype(np.uint8)
    y[:m] = np.arange(m)
    return DiscreteMatrix(codes, np.full(p, arity), y, m)


def test_printed_rows(printed):
    assert printed.row_string(0, 0, 0) == "10001000"
    assert printed.row_string(1, 1, 0) == "01000110"


def test_printed_joint_counts(printed):
    assert joint_count(printed, 0, 1, 1, 1, 0) == 1
    # X1 = 1 and X2 = 3 among the first eight samples: positions 1 and 5
    assert joint_count(printed, 0, 0, 1, 2, 0) == 2


def test_single_set_bit():
    dm = DiscreteMatrix(np.zeros((1, 1), np.uint8), np.array([1]), np.zeros(1, np.uint8), 1)
    bm = build_bitmatrix(dm)
    assert int(np.unpackbits(bm.words.view(np.uint8)).sum()) == 1
    assert level_count(bm, 0, 0, 0) == 1


def test_row_popcounts_equal_level_counts(rng):
    dm = random_matrix(rng, 200, 5, 4)
    bm = build_bitmatrix(dm)
    for k in range(5):
        for a in range(4):
            for c in range(2):
                naive = 0
                for s in range(200):
                    naive += dm.codes[s, k] == a and dm.response_codes[s] == c
                assert level_count(bm, k, a, c) == naive


def test_partition_and_padding(rng):
    dm = random_matrix(rng, 131, 4, 3, m=2)
    bm = build_bitmatrix(dm)
    for k in range(4):
        for c in range(2):
            rows = [bm.row(k, a, c) for a in range(3)]
            union = np.bitwise_or.reduce(rows)
            nbits = bm.strata_sizes[c]
            bits = np.unpackbits(union.astype("<u8").view(np.uint8), bitorder="little")
            assert bits[:nbits].all() and not bits[nbits:].any()
            for a in range(3):
                for b in range(a + 1, 3):
                    assert not np.any(rows[a] & rows[b])


def test_memory_accounting(rng):
    dm = random_matrix(rng, 300, 6, 3, m=2)
    bm = build_bitmatrix(dm)
    assert bm.total_bits <= int(bm.arities.sum()) * (300 + 2 * WORD_BITS)


def test_stratum_order_preserved(rng):
    dm = random_matrix(rng, 50, 2, 3)
    bm = build_bitmatrix(dm)
    for c in range(2):
        idx = np.flatnonzero(dm.response_codes == c)
        np.testing.assert_array_equal(bm.row_bits(0, 1, c), dm.codes[idx, 0] == 1)


def test_index_errors(printed):
    with pytest.raises(IndexOutOfRange):
        joint_count(printed, 2, 0, 1, 0, 0)
    with pytest.raises(IndexOutOfRange):
        joint_count(printed, 0, 3, 1, 0, 0)
    with pytest.raises(IndexOutOfRange):
        joint_count(printed, 0, 0, 1, 0, 2)
    with pytest.raises(IndexOutOfRange):
        build_table(printed, 0, 5)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 300), st.integers(2, 6), st.integers(2, 4), st.integers(0, 2 ** 32 - 1))
def test_counting_identities(n, p, arity, seed):
    rng = np.random.default_rng(seed)
    n = max(n, arity)
    dm = random_matrix(rng, n, p, arity)
    bm = build_bitmatrix(dm)
    for i in range(p):
        for j in range(i + 1, p):
            t = build_table(bm, i, j)
            assert t.total == n
            for a in range(arity):
                for b in range(arity):
                    for c in range(2):
                        assert joint_count(bm, i, a, j, b, c) == joint_count(bm, j, b, i, a, c)
                # marginalization over (b, c) gives the level count
                assert t.n_a[a] == sum(level_count(bm, i, a, c) for c in range(2))


def test_printed_table(printed):
    t = build_table(printed, 0, 1)
    assert t.shape == (3, 3, 2)
    assert t.counts[1, 1, 0] == 1
    assert t.total == 16


def test_one_sample_table():
    codes = np.array([[1, 0]], np.uint8)
    dm = DiscreteMatrix(codes, np.array([2, 2]), np.zeros(1, np.uint8), 1)
    t = build_table(build_bitmatrix(dm), 0, 1)
    assert t.counts.sum() == 1 and t.counts[1, 0, 0] == 1


def test_table_margins_exact(rng):
    ds = Dataset(rng.normal(size=(120, 4)), rng.normal(size=120))
    bm = build_bitmatrix(discretize(ds, DiscretizationSpec(4)))
    t = build_table(bm, 1, 3)
    c = t.counts
    np.testing.assert_array_equal(t.n_ab, c.sum(axis=2))
    np.testing.assert_array_equal(t.n_ac, c.sum(axis=1))
    np.testing.assert_array_equal(t.n_bc, c.sum(axis=0))
    np.testing.assert_array_equal(t.n_a, t.n_ab.sum(axis=1))
    np.testing.assert_array_equal(t.n_b, t.n_ab.sum(axis=0))
    np.testing.assert_array_equal(t.n_c, t.n_ac.sum(axis=0))
    assert t.counts.dtype == np.int64


def test_table_transpose(rng):
    ds = Dataset(rng.normal(size=(90, 3)), rng.normal(size=90))
    bm = build_bitmatrix(discretize(ds, DiscretizationSpec([2, 3, 4])))
    np.testing.assert_array_equal(build_table(bm, 0, 2).transpose().counts,
                                  build_table(bm, 2, 0).counts)


def test_degenerate_pair(rng):
    x = np.column_stack([np.ones(10), rng.normal(size=10)])
    bm = build_bitmatrix(discretize(Dataset(x, rng.normal(size=10))))
    with pytest.raises(DegeneratePair):
        build_table(bm, 0, 1)


def test_table_validation():
    with pytest.raises(ValueError):
        ContingencyTable3(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        ContingencyTable3(-np.ones((2, 2, 2)))
