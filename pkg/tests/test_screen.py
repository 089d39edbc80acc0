import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boltssi.bitmat import build_bitmatrix
from boltssi.contingency import build_table
from boltssi.discretize import discretize
from boltssi.ingest import Dataset
from boltssi.loglinear import score_pair
from boltssi.marginal_glm import ssi_score
from boltssi.screen import (
    PRUNED,
    SCORED,
    SKIP_DEGENERATE,
    BonferroniAlpha,
    Method,
    ScreenConfig,
    Threshold,
    TopD,
    parse_rule,
    resolve_threads,
    screen,
    select,
)


def planted(rng, n=200, p=6, family="gaussian"):
    x = rng.standard_normal((n, p))
    eta = 2 * x[:, 1] * x[:, 2]
    if family == "gaussian":
        y = eta + rng.standard_normal(n)
    else:
        y = (rng.random(n) < 1 / (1 + np.exp(-eta))).astype(float)
    return Dataset(x, y, family)


def test_topd_example():
    flags = select([3.0, 1.0, 2.0], TopD(2), n=10, p=3)
    assert flags.tolist() == [True, False, True]


def test_topd_ties_are_lexicographic():
    flags = select([1.0, 2.0, 2.0, 2.0], TopD(2), n=10, p=4)
    assert flags.tolist() == [False, True, True, False]


def test_topd_resolution():
    assert TopD("auto").resolve(500, 2000, Method.SSI) == 499
    assert TopD("auto").resolve(500, 2000, Method.BOLT) == 2000
    assert TopD("auto").resolve(500, 200, "bolt-ksa") == 500
    assert TopD("max").resolve(500, 200, Method.SSI) == 500
    assert TopD("nlogn").resolve(500, 200) == int(500 / np.log(500))
    with pytest.raises(ValueError):
        TopD(0).resolve(10, 10)


def test_threshold_rule():
    flags = select([0.5, np.nan, 1.5, 1.0], Threshold(1.0), n=10, p=3)
    assert flags.tolist() == [False, False, True, True]
    with pytest.raises(ValueError):
        Threshold(-1)


def test_bonferroni_rule_uses_each_df():
    p = 319156
    rule = BonferroniAlpha(0.05)
    stats = np.array([63.332, 53.566, 53.566])
    df = np.array([4, 4, 1])
    flags = select(stats / 2, rule, n=5000, p=p, statistic=stats, df=df)
    assert flags.tolist() == [True, False, True]
    with pytest.raises(ValueError):
        select(stats, rule, n=10, p=p)
    with pytest.raises(ValueError):
        BonferroniAlpha(1.5)


def test_parse_rule():
    assert parse_rule("topd:auto") == TopD("auto")
    assert parse_rule("topd:25") == TopD(25)
    assert parse_rule("topd") == TopD("auto")
    assert parse_rule("threshold:0.5") == Threshold(0.5)
    assert parse_rule("bonferroni:0.01") == BonferroniAlpha(0.01)
    assert parse_rule("bonferroni") == BonferroniAlpha(0.05)
    with pytest.raises(ValueError):
        parse_rule("best:3")


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 10, allow_nan=False), min_size=1, max_size=60),
       st.integers(1, 60), st.integers(1, 60))
def test_topd_monotone(scores, d1, d2):
    d1, d2 = sorted((d1, d2))
    a = select(scores, TopD(d1), n=10, p=10)
    b = select(scores, TopD(d2), n=10, p=10)
    assert np.all(b[a])
    assert a.sum() == min(d1, len(scores))


@pytest.mark.parametrize("method", ["ssi", "bolt", "bolt-ksa"])
def test_planted_pair_ranks_first(rng, method):
    ds = planted(rng)
    res = screen(ds, method=method, selection=TopD(1), ksa_gamma=0.0)
    top = res.ranked(1)[0]
    assert top.pair == (1, 2) and top.selected
    assert res.n_selected == 1


def test_brute_force_three_columns(rng):
    x = rng.standard_normal((150, 3))
    y = 1.5 * x[:, 0] * x[:, 2] + rng.standard_normal(150)
    ds = Dataset(x, y)
    scores = {pair: ssi_score(ds, pair) for pair in [(0, 1), (0, 2), (1, 2)]}
    best = max(scores, key=scores.get)
    res = screen(ds, method="ssi", selection="topd:1")
    assert best == (0, 2)
    assert tuple(res.selected_pairs[0]) == best


def test_bolt_scores_match_table_scoring(rng):
    ds = planted(rng, n=120, p=5)
    res = screen(ds, method="bolt")
    bm = build_bitmatrix(discretize(ds))
    for t in range(res.n_pairs):
        sp = score_pair(build_table(bm, int(res.i[t]), int(res.j[t])))
        assert res.score[t] == pytest.approx(sp.increment, abs=1e-10)
        assert res.statistic[t] == pytest.approx(sp.statistic, abs=1e-10)
        assert res.df[t] == sp.df


def test_ranking_invariants(rng):
    ds = planted(rng, p=12)
    res = screen(ds, method="bolt", selection="threshold:1.0")
    ranked = res.ranked()
    keys = [(-r.score, r.pair) for r in ranked]
    assert keys == sorted(keys)
    assert res.n_selected == sum(r.selected for r in ranked)
    assert res.n_evaluated + res.n_pruned_by_ksa + res.n_skipped == res.n_pairs == 66
    assert all(r.score >= 1.0 for r in ranked if r.selected)


def test_degenerate_columns_are_skipped(rng):
    x = rng.standard_normal((60, 4))
    x[:, 2] = 1.0
    res = screen(Dataset(x, rng.standard_normal(60)), method="bolt")
    skipped = res.status == SKIP_DEGENERATE
    assert skipped.sum() == 3
    assert np.all((res.i[skipped] == 2) | (res.j[skipped] == 2))
    assert not res.selected[skipped].any()
    assert res.n_evaluated + res.n_skipped == res.n_pairs


def test_ksa_accounting_and_rescore(rng):
    ds = planted(rng, p=30)
    res = screen(ds, method="bolt-ksa", debug_rescore_pruned=True, selection="topd:max")
    assert res.n_pruned_by_ksa > 0
    pruned = res.status == PRUNED
    assert np.all(np.isnan(res.score[pruned]))
    assert not res.selected[pruned].any()
    assert np.all(np.isfinite(res.pruned_statistic[pruned]))
    assert np.all(res.pruned_statistic[pruned] <= 2 * res.ksa_bound[pruned] + 1e-9)
    plain = screen(ds, method="bolt")
    kept = res.status == SCORED
    np.testing.assert_array_equal(res.score[kept], plain.score[kept])


@pytest.mark.parametrize("method", ["ssi", "bolt", "bolt-ksa"])
@pytest.mark.parametrize("family", ["gaussian", "binomial"])
def test_thread_count_invariance(rng, method, family):
    ds = planted(rng, n=150, p=40, family=family)
    a = screen(ds, method=method, threads=1)
    b = screen(ds, method=method, threads=3, chunk_size=37)
    np.testing.assert_array_equal(a.order, b.order)
    np.testing.assert_array_equal(a.score, b.score)
    np.testing.assert_array_equal(a.selected, b.selected)


def test_config_validation():
    with pytest.raises(ValueError):
        ScreenConfig(threads=-1)
    with pytest.raises(ValueError):
        ScreenConfig(ksa_gamma=-2.0)
    with pytest.raises(ValueError):
        ScreenConfig(method="lasso")
    assert ScreenConfig(method="boltssi").method is Method.BOLT
    assert ScreenConfig(ksa_gamma="bonferroni:0.1").ksa_gamma == BonferroniAlpha(0.1)
    assert resolve_threads(0) >= 1
    assert resolve_threads(3) == 3


def test_ssi_statistic_scale(rng):
    ds = planted(rng, p=4)
    res = screen(ds, method="ssi")
    np.testing.assert_allclose(res.statistic, 2 * ds.n * res.score)
    assert np.all(res.df == 1)
