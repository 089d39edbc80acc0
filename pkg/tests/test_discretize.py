import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from boltssi.discretize import (
    DiscretizationSpec,
    QuantileDiscretizer,
    discretize,
    discretize_column,
    median_split,
    quantile_cutpoints,
)
from boltssi.exceptions import BadResponse, DegenerateColumn
from boltssi.ingest import Dataset


def test_median_split_of_six():
    codes, _ = discretize_column(np.arange(1.0, 7.0), 2)
    np.testing.assert_array_equal(codes, [0, 0, 0, 1, 1, 1])


def test_tertiles_of_six():
    # ranks ceil(6/3)=2 and ceil(12/3)=4 give cutpoints 2 and 4
    codes, cuts = discretize_column(np.arange(1.0, 7.0), 3)
    np.testing.assert_array_equal(cuts, [2.0, 4.0])
    np.testing.assert_array_equal(codes, [0, 0, 1, 1, 2, 2])


def test_response_median_split_strict():
    # median is -0.25; strict ">" puts 0.5 and 2 in the upper class
    np.testing.assert_array_equal(median_split([-1, 0.5, 2, -3]), [0, 1, 1, 0])


def test_response_ties_at_median_go_low():
    np.testing.assert_array_equal(median_split([1, 2, 2, 2, 3]), [0, 0, 0, 0, 1])


def test_ties_merge_levels():
    col = np.array([1, 1, 1, 1, 1, 2, 3, 4, 5, 6.0])
    cuts = quantile_cutpoints(col, 4)
    codes, _ = discretize_column(col, 4)
    assert np.unique(codes).size == cuts.size + 1
    assert np.all(codes[:5] == 0)


def test_constant_column_is_degenerate(rng):
    x = np.column_stack([np.ones(20), rng.normal(size=20)])
    dm = discretize(Dataset(x, rng.normal(size=20)))
    assert dm.arities.tolist() == [1, 3]
    assert dm.degenerate.tolist() == [True, False]
    with pytest.raises(DegenerateColumn):
        discretize(Dataset(x, rng.normal(size=20)), strict=True)


def test_binomial_response_passthrough(rng):
    y = np.array([0, 1, 1, 0, 1, 0, 0, 1.0])
    dm = discretize(Dataset(rng.normal(size=(8, 2)), y, "binomial"))
    np.testing.assert_array_equal(dm.response_codes, y.astype(np.uint8))
    assert dm.response_arity == 2


def test_single_class_response_rejected(rng):
    with pytest.raises(BadResponse):
        discretize(Dataset(rng.normal(size=(8, 2)), np.ones(8), "binomial"))


def test_spec_validation():
    with pytest.raises(ValueError):
        DiscretizationSpec(1)
    with pytest.raises(ValueError):
        DiscretizationSpec(17)
    with pytest.raises(ValueError):
        DiscretizationSpec(3, response_arity=3)
    np.testing.assert_array_equal(DiscretizationSpec([2, 3]).arity_for(2), [2, 3])
    with pytest.raises(ValueError):
        DiscretizationSpec([2, 3]).arity_for(3)


def test_per_column_arity(rng):
    dm = discretize(Dataset(rng.normal(size=(60, 3)), rng.normal(size=60)),
                    DiscretizationSpec([2, 3, 5]))
    assert dm.arities.tolist() == [2, 3, 5]


distinct = st.integers(min_value=4, max_value=300).flatmap(
    lambda n: arrays(np.float64, n, elements=st.floats(-1e6, 1e6), unique=True))


@settings(max_examples=80, deadline=None)
@given(distinct, st.integers(min_value=2, max_value=16))
def test_balanced_levels_without_ties(col, arity):
    codes, cuts = discretize_column(col, arity)
    counts = np.bincount(codes, minlength=cuts.size + 1)
    assert np.all(counts > 0)
    if arity <= col.size:
        assert cuts.size + 1 == arity
    # every level holds floor or ceil of n/l samples, so occupancies differ by at most one
    # for the convention c_k = x_(ceil(nk/l)) the counts are ceil(nk/l) - ceil(n(k-1)/l)
    n = col.size
    k = np.arange(1, cuts.size + 2)
    expected = np.minimum(-(-n * k // arity), n) - np.minimum(-(-n * (k - 1) // arity), n)
    if cuts.size + 1 == arity:
        np.testing.assert_array_equal(counts, expected)
        assert counts.max() - counts.min() <= 1


@settings(max_examples=60, deadline=None)
@given(distinct, st.integers(min_value=2, max_value=8))
def test_monotone_invariance(col, arity):
    base, _ = discretize_column(col, arity)
    for transform in (np.arctan, lambda v: 3 * v + 7, lambda v: np.sign(v) * np.abs(v) ** 3):
        moved, _ = discretize_column(transform(col), arity)
        if np.unique(transform(col)).size == col.size:
            np.testing.assert_array_equal(base, moved)


@settings(max_examples=40, deadline=None)
@given(distinct, st.integers(min_value=2, max_value=6), st.randoms())
def test_codes_follow_rank_order(col, arity, r):
    perm = list(range(col.size))
    r.shuffle(perm)
    base, _ = discretize_column(col, arity)
    shuffled, _ = discretize_column(col[perm], arity)
    np.testing.assert_array_equal(base[perm], shuffled)


def test_quantile_discretizer_estimator(rng):
    from sklearn.base import clone

    X = rng.normal(size=(40, 3))
    est = QuantileDiscretizer(arity=4).fit(X)
    assert est.get_params() == {"arity": 4}
    out = est.transform(X)
    assert out.shape == X.shape and out.max() == 3
    np.testing.assert_array_equal(clone(est).fit_transform(X), out)
    with pytest.raises(ValueError):
        est.transform(X[:, :2])
