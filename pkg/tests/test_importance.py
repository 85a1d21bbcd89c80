import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from augforge.importance import (
    AnalysisError,
    ForestSettings,
    analyze_study,
    fit_forest,
    fit_tree,
    importance,
    subset_size,
)
from augforge.search import ACTIVE, INACTIVE, SearchSettings, SearchSpace, run_study
from augforge.augment import CATALOG
from oracles import brute_force_first_order

NAMES = ("a", "b", "c", "d", "e", "f")
SMALL = ForestSettings(n_trees=16, n_repeats=3)


def _design(f, d, reps):
    grid = list(itertools.product((0, 1), repeat=d))
    table = {g: f(np.array(g)) for g in grid}
    data = [({n: ACTIVE if b else INACTIVE for n, b in zip(NAMES[:d], g)}, table[g]) for g in grid] * reps
    return data, table


def test_settings_validation():
    for kw in (dict(n_trees=0), dict(max_depth=0), dict(n_repeats=0), dict(min_samples_leaf=0)):
        with pytest.raises(AnalysisError):
            ForestSettings(**kw)


def test_forced_split_gives_exact_leaves():
    data = [({"a": INACTIVE}, 0.0), ({"a": ACTIVE}, 1.0)] * 8
    forest = fit_forest(data, ForestSettings(n_trees=32, min_samples_leaf=1))
    for tree in forest.trees:
        if len(tree.leaves) == 2:
            assert sorted(leaf.value for leaf in tree.leaves) == [0.0, 1.0]
    assert forest.predict({"a": ACTIVE}) == pytest.approx(1.0, abs=0.3)


def test_constant_objective_gives_flat_trees():
    data, _ = _design(lambda g: 0.25, 3, 4)
    forest = fit_forest(data, SMALL)
    assert all(t.depth == 0 and t.leaves[0].value == 0.25 for t in forest.trees)
    assert forest.zero_variance
    report = analyze_study(data, SMALL)
    assert report.zero_variance
    assert all(p.mean == 0.0 and p.std == 0.0 for p in report.params)


def test_subset_rule():
    assert subset_size(16) == 4 and subset_size(30) == 6 and subset_size(1) == 1


def test_split_candidates_limited_to_subset():
    # 16 features, only the last one matters: a root split on it needs it in the random subset
    rng = np.random.default_rng(0)
    X = rng.integers(0, 2, size=(400, 16))
    y = X[:, 15].astype(float)
    roots = []
    for k in range(200):
        tree = fit_tree(X, y, np.random.default_rng(k), max_depth=1, min_samples_leaf=1)
        roots.append(next(iter(tree.leaves[0].constraints)))
    share = roots.count(15) / len(roots)
    assert share == pytest.approx(4 / 16, abs=0.1)


def test_single_factor_is_exact():
    data, _ = _design(lambda g: float(g[2]), 4, 4)
    report = analyze_study(data, ForestSettings(n_trees=16, n_repeats=4))
    assert report.params[0].name == "c"
    for rep in report.per_repeat:
        assert rep["c"] == pytest.approx(1.0, abs=1e-9)
        assert all(rep[n] == pytest.approx(0.0, abs=1e-9) for n in "abd")


@pytest.mark.parametrize("a,b", [(1.0, 1.0), (2.0, 1.0), (3.0, 0.5)])
def test_additive_two_factor(a, b):
    data, _ = _design(lambda g: a * g[0] + b * g[1], 2, 16)
    report = analyze_study(data, SMALL)
    got = {p.name: p.mean for p in report.params}
    assert got["a"] == pytest.approx(a * a / (a * a + b * b), abs=0.05)
    assert got["b"] == pytest.approx(b * b / (a * a + b * b), abs=0.05)


@given(st.integers(2, 5), st.integers(0, 2**31), st.booleans())
@hsettings(max_examples=10, deadline=None)
def test_matches_brute_force_anova(d, seed, interactions):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=d)
    v = np.triu(rng.normal(size=(d, d)) * 0.5, 1) if interactions else np.zeros((d, d))
    data, table = _design(lambda g: float(w @ g + g @ v @ g), d, 8)
    report = analyze_study(data, ForestSettings(n_trees=16, n_repeats=2, seed=seed))
    got = {p.name: p.mean for p in report.params}
    ref = brute_force_first_order([2] * d, table)
    for name, r in zip(NAMES, ref):
        assert got[name] == pytest.approx(r, abs=0.05)
    for rep in report.per_repeat:
        assert sum(rep.values()) <= 1 + 1e-9
        assert all(0.0 <= x <= 1.0 for x in rep.values())


def test_single_repeat_has_zero_spread():
    data, _ = _design(lambda g: g[0] + 0.5 * g[1] * g[2], 3, 4)
    report = analyze_study(data, ForestSettings(n_trees=8, n_repeats=1))
    assert all(p.std == 0.0 for p in report.params)


def test_order_invariance_and_determinism():
    rng = np.random.default_rng(5)
    data = [({n: ACTIVE if rng.random() < 0.5 else INACTIVE for n in NAMES[:4]}, float(rng.random())) for _ in range(40)]
    shuffled = list(data)
    random.Random(1).shuffle(shuffled)
    a = analyze_study(data, SMALL).to_dict()
    assert analyze_study(shuffled, SMALL).to_dict() == a
    assert analyze_study(data, SMALL).to_dict() == a
    assert analyze_study(data, ForestSettings(n_trees=16, n_repeats=3, seed=9)).to_dict() != a


def test_too_few_trials():
    data, _ = _design(lambda g: float(g[0]), 3, 1)
    with pytest.raises(AnalysisError, match="at least 10"):
        analyze_study(data, SMALL)
    with pytest.raises(AnalysisError, match="at least 10"):
        analyze_study([], SMALL)


def test_unknown_param_and_identical_assignments():
    data, _ = _design(lambda g: float(g[0]), 2, 4)
    forest = fit_forest(data, SMALL)
    with pytest.raises(AnalysisError, match="unknown"):
        importance(forest, "zzz")
    with pytest.raises(AnalysisError):
        fit_forest([({"a": ACTIVE}, 0.1), ({"a": ACTIVE}, 0.2)], SMALL)


def test_planted_factor_from_a_study(tmp_path):
    names = tuple(k.value for k in CATALOG)[:6]
    target = names[3]
    db = tmp_path / "db.jsonl"
    run_study(
        SearchSettings(n_trials=60, n_startup_trials=60, study_seed=4),
        SearchSpace(names),
        lambda chain, tid, seed: float(any(k.value == target for k in chain.active_kinds)),
        db,
    )
    report = analyze_study(db, ForestSettings(n_trees=16))
    assert report.params[0].name == target
    assert all(max(rep, key=rep.get) == target for rep in report.per_repeat)
    top = report.to_dict(top=2)
    assert len(top["params"]) == 2 and not report.truncated


def test_missing_db(tmp_path):
    with pytest.raises(FileNotFoundError):
        analyze_study(tmp_path / "nope.jsonl")
