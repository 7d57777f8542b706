# -*- coding: utf-8 -*-
import json
import tracemalloc
from collections import OrderedDict

import numpy as np
import pytest

from fairness_manager import fftree
from fairness_manager.config import GrowthConfig
from fairness_manager.constants import DP, EOPP
from fairness_manager.dataset import encode
from fairness_manager.exceptions import (BadNodeId, ConfigurationException,
                                         CountMismatch, EncodingMismatch,
                                         NoSensitiveColumn, UnencodedData)
from fairness_manager.fftree import (FairnessConstraint, FFTreeModel,
                                     SplitCandidate, audit_compliance,
                                     find_best_split, information_gain,
                                     local_constraint_value, prune,
                                     render_rules)
from fairness_manager.metrics import threshold_grid_dp

from .conftest import build_dataset, random_binary_dataset

SMALL = GrowthConfig(max_depth=4, min_samples_leaf=2, min_samples_split=4)


def test_information_gain():
    assert information_gain((5, 5), (5, 0), (0, 5)) == pytest.approx(1.0)
    assert information_gain((4, 2), (3, 0), (1, 2)) == \
        pytest.approx(0.4591, abs=1e-4)
    assert information_gain((3, 3), (3, 3), (0, 0)) == pytest.approx(0.0)
    with pytest.raises(CountMismatch):
        information_gain((5, 5), (5, 0), (0, 4))


def test_constraint_parsing():
    constraint = FairnessConstraint.parse('dp:0.05:gender')
    assert constraint == FairnessConstraint(DP, 'gender', 0.05)
    assert constraint.key == 'DP:gender'
    assert FairnessConstraint.from_dict(constraint.as_dict()) == constraint
    for text in ('DP:0.05', 'DP:abc:g', 'XX:0.1:g', 'DP:1.5:g'):
        with pytest.raises(ConfigurationException):
            FairnessConstraint.parse(text)


def test_local_demographic_parity_of_a_split():
    # group a: 4 of 4 to the positive branch, group b: 1 of 3
    ds = build_dataset({'x': [1, 1, 1, 1, 1, 0, 0]},
                       [1, 1, 1, 1, 1, 0, 0],
                       {'g': ['a'] * 4 + ['b'] * 3})
    split = SplitCandidate('x', 0.5, 0.0, {}, None, indicator=True)
    value = local_constraint_value(np.arange(7), split,
                                   FairnessConstraint(DP, 'g', 0.1), ds)
    assert value == pytest.approx(2.0 / 3, abs=1e-3)


def test_undefined_constraint_counts_as_satisfied():
    ds = build_dataset({'x': [0, 0, 1, 1]}, [0, 1, 0, 1],
                       {'g': ['a'] * 4})
    split = SplitCandidate('x', 0.5, 0.0, {}, None, indicator=True)
    assert local_constraint_value(
        np.arange(4), split, FairnessConstraint(DP, 'g', 0.0), ds) is None


def test_unconstrained_tree_separates_a_clean_signal():
    ds = build_dataset(OrderedDict([('a', [0, 0, 0, 0, 1, 1, 1, 1]),
                                    ('b', [0, 1, 0, 1, 0, 1, 0, 1])]),
                       [0, 0, 0, 0, 1, 1, 1, 1])
    model = fftree.fit(ds, config=SMALL)
    root = model.node(model.root)
    assert root['feature'] == 'a'
    assert root['threshold'] == 0.5
    assert model.n_leaves == 2
    assert model.predict_label(ds).tolist() == [0] * 4 + [1] * 4


def test_ties_break_by_feature_name():
    ds = build_dataset(OrderedDict([('zeta', [0, 0, 1, 1]),
                                    ('alpha', [0, 0, 1, 1])]),
                       [0, 0, 1, 1])
    model = fftree.fit(ds, config=GrowthConfig(
        max_depth=2, min_samples_leaf=1, min_samples_split=2))
    assert model.node(model.root)['feature'] == 'alpha'


def test_sensitive_column_is_never_questioned():
    g = [0, 0, 0, 0, 1, 1, 1, 1] * 3
    noise = [0, 1, 1, 0, 1, 0, 0, 1] * 3
    ds = build_dataset({'noise': noise}, g, {'g': g}, exposed=True)
    assert 'g' in ds.feature_names
    model = fftree.fit(ds, config=SMALL)
    assert 'g' not in model.split_features()
    assert not model.tests_sensitive()


def test_missing_sensitive_column_and_unencoded_features():
    ds = build_dataset({'x': [0, 1, 0, 1]}, [0, 1, 0, 1])
    with pytest.raises(NoSensitiveColumn):
        fftree.fit(ds, [FairnessConstraint(DP, 'gender', 0.1)], SMALL)
    multi = build_dataset({'x': [0, 1, 0, 1]}, [0, 1, 0, 1],
                          categorical={'c': ['u', 'v', 'w', 'u']})
    with pytest.raises(UnencodedData):
        fftree.fit(multi, config=SMALL)


def test_growth_limits():
    rng = np.random.default_rng(3)
    ds = random_binary_dataset(rng, 300, 6)
    shallow = fftree.fit(ds, config=GrowthConfig(
        max_depth=2, min_samples_leaf=1, min_samples_split=2))
    assert shallow.depth <= 2
    budget = fftree.fit(ds, config=GrowthConfig(
        max_depth=8, min_samples_leaf=1, min_samples_split=2, max_leaves=3))
    assert budget.n_leaves <= 3
    leafy = fftree.fit(ds, config=GrowthConfig(
        max_depth=8, min_samples_leaf=40, min_samples_split=80))
    for leaf_id in leafy.leaf_ids:
        assert leafy.node(leaf_id)['n'] >= 40


def test_no_split_on_a_pure_or_small_node():
    ds = build_dataset({'x': [0, 1, 0, 1]}, [1, 1, 1, 1])
    assert fftree.fit(ds, config=SMALL).n_leaves == 1
    assert find_best_split(np.arange(4), [], SMALL, ds) is None
    mixed = build_dataset({'x': [0, 1, 0, 1]}, [0, 1, 0, 1])
    big = GrowthConfig(min_samples_leaf=3, min_samples_split=6)
    assert find_best_split(np.arange(4), [], big, mixed) is None


def test_group_left_counts_match_dense_masks():
    rng = np.random.default_rng(11)
    n = 300
    features = OrderedDict([('x', rng.normal(size=n)),
                            ('level', rng.integers(0, 6, n)),
                            ('b', rng.integers(0, 2, n))])
    ds = build_dataset(features, rng.integers(0, 2, n),
                       {'g': rng.integers(0, 3, n)},
                       weights=rng.uniform(0.5, 2.0, n))
    data = fftree._TrainingData(ds, [FairnessConstraint(DP, 'g', 0.1)])
    rows = np.sort(rng.choice(n, 200, replace=False))
    onehot, yw, nw, _ = fftree._node_group_stats(data, rows, 'g', 1)
    feats = rng.integers(0, 3, 50)
    thresholds = np.where(feats == 0, rng.normal(size=50),
                          rng.integers(0, 6, 50).astype(np.float64))
    # thresholds equal to data values go left
    thresholds[:5] = data.X[rows[:5], 1]
    feats[:5] = 1
    pg_l, ng_l = fftree._group_left_counts(data, rows, feats, thresholds,
                                           onehot, yw, nw)
    left = (data.X[rows][:, feats] <= thresholds[None, :]).T
    assert np.allclose(pg_l, left.astype(float).dot(onehot * yw[:, None]))
    assert np.allclose(ng_l, left.astype(float).dot(onehot * nw[:, None]))


def test_constrained_fit_memory_grows_with_rows_not_pairs():
    rng = np.random.default_rng(3)
    n = 8000
    g = rng.integers(0, 2, n)
    x1 = rng.normal(size=n) - 0.8 * g
    x2 = rng.normal(size=n)
    y = (x1 + 0.5 * x2 + rng.normal(0.0, 0.7, n) > 0).astype(int)
    ds = build_dataset(OrderedDict([('x1', x1), ('x2', x2)]), y, {'g': g})
    config = GrowthConfig(max_depth=2, min_samples_leaf=20,
                          min_samples_split=40)
    tracemalloc.start()
    try:
        model = fftree.fit(ds, [FairnessConstraint(DP, 'g', 0.1)], config)
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    assert model.n_leaves >= 1
    # a dense rows x candidates mask alone would take 64 MB here
    assert peak < 32 * 1024 * 1024


# brute-force reference builder


def _dp_violated(x, y, g, rows, threshold, delta):
    left = x[rows] <= threshold
    yr, gr = y[rows], g[rows]
    pos_l, pos_r = yr[left].sum(), yr[~left].sum()
    rate_l = pos_l / left.sum()
    rate_r = pos_r / (~left).sum()
    left_positive = rate_l > rate_r or (rate_l == rate_r and pos_l >= pos_r)
    positive = left if left_positive else ~left
    rates = [positive[gr == group].sum() / float((gr == group).sum())
             for group in np.unique(gr)]
    if len(rates) < 2:
        return False
    return max(rates) - min(rates) > delta


def _reference_tree(X, y, g, names, delta, config, rows, depth):
    yr = y[rows]
    leaf = ('leaf', yr.mean())
    if depth >= config.max_depth or rows.size < config.min_samples_split \
            or yr.min() == yr.max():
        return leaf
    pos, neg = yr.sum(), rows.size - yr.sum()
    candidates = []
    for j, name in enumerate(names):
        x = X[:, j]
        distinct = np.unique(x[rows])
        for threshold in (distinct[:-1] + distinct[1:]) / 2.0:
            left = x[rows] <= threshold
            n_left = int(left.sum())
            if n_left < config.min_samples_leaf or \
                    rows.size - n_left < config.min_samples_leaf:
                continue
            pos_l = yr[left].sum()
            neg_l = n_left - pos_l
            ig = information_gain((pos, neg), (pos_l, neg_l),
                                  (pos - pos_l, neg - neg_l))
            if delta is not None and \
                    _dp_violated(x, y, g, rows, threshold, delta):
                ig = 0.0
            candidates.append((ig, name, threshold, j))
    if not candidates:
        return leaf
    top = max(c[0] for c in candidates)
    if top <= fftree.IG_TIE:
        return leaf
    ig, name, threshold, j = min(
        (c for c in candidates if c[0] >= top - fftree.IG_TIE),
        key=lambda c: (c[1], c[2]))
    left = rows[X[rows, j] <= threshold]
    right = rows[X[rows, j] > threshold]
    return ('split', name, threshold,
            _reference_tree(X, y, g, names, delta, config, left, depth + 1),
            _reference_tree(X, y, g, names, delta, config, right, depth + 1))


def _assert_same_tree(model, node_id, expected):
    node = model.node(node_id)
    if expected[0] == 'leaf':
        assert node['kind'] == 'leaf'
        assert node['pos_rate'] == pytest.approx(expected[1])
        return
    assert node['kind'] == 'split'
    assert node['feature'] == expected[1]
    assert node['threshold'] == pytest.approx(expected[2])
    _assert_same_tree(model, node['left'], expected[3])
    _assert_same_tree(model, node['right'], expected[4])


def _random_mixed_dataset(rng, n_rows):
    g = rng.integers(0, 2, n_rows)
    b0 = rng.integers(0, 2, n_rows)
    b1 = (rng.random(n_rows) < 0.3 + 0.4 * g).astype(int)
    level = rng.integers(0, 5, n_rows)
    noise = rng.normal(0.0, 1.0, n_rows)
    y = (b0 + 0.5 * level - b1 + noise > 1.0).astype(int)
    features = OrderedDict([('b0', b0), ('b1', b1), ('level', level)])
    return build_dataset(features, y, {'g': g})


@pytest.mark.parametrize('seed', range(24))
def test_matches_brute_force_reference(seed):
    rng = np.random.default_rng(1000 + seed)
    ds = _random_mixed_dataset(rng, int(rng.integers(30, 90)))
    delta = (None, 0.1, 0.25)[seed % 3]
    constraints = [] if delta is None else \
        [FairnessConstraint(DP, 'g', delta)]
    config = GrowthConfig(max_depth=3, min_samples_leaf=2,
                          min_samples_split=4)
    model = fftree.fit(ds, constraints, config)
    names = ['b0', 'b1', 'level']
    X = ds.feature_matrix(names)
    expected = _reference_tree(X, ds.y.astype(float), ds.group_codes('g'),
                               names, delta, config,
                               np.arange(ds.n_rows), 0)
    _assert_same_tree(model, model.root, expected)


def test_zero_tolerance_on_mirrored_groups_keeps_parity_everywhere():
    rng = np.random.default_rng(17)
    n = 80
    f0 = rng.integers(0, 2, n)
    f1 = rng.integers(0, 2, n)
    y = ((f0 + rng.random(n) * 0.8) > 0.9).astype(int)
    # group b is an exact copy of group a, z only tells the groups apart
    features = OrderedDict([('f0', np.tile(f0, 2)), ('f1', np.tile(f1, 2)),
                            ('z', [0] * n + [1] * n)])
    ds = build_dataset(features, np.tile(y, 2), {'g': [0] * n + [1] * n})
    config = GrowthConfig(max_depth=4, min_samples_leaf=2,
                          min_samples_split=4)
    model = fftree.fit(ds, [FairnessConstraint(DP, 'g', 0.0)], config)
    assert model.internal_ids
    assert 'z' not in model.split_features()
    grid = threshold_grid_dp(model.predict_score(ds), ds.group_codes('g'))
    assert all(gap == 0 for _, gap in grid)
    assert audit_compliance(model, ds).passed

    for node_id in model.internal_ids:
        pruned = prune(model, node_id)
        assert audit_compliance(pruned, ds).passed
        grid = threshold_grid_dp(pruned.predict_score(ds),
                                 ds.group_codes('g'))
        assert all(gap == 0 for _, gap in grid)


@pytest.mark.parametrize('seed', range(6))
def test_pruning_any_node_keeps_a_compliant_tree(seed):
    rng = np.random.default_rng(300 + seed)
    ds = _random_mixed_dataset(rng, 200)
    constraints = [FairnessConstraint(DP, 'g', 0.1)]
    model = fftree.fit(ds, constraints, GrowthConfig(
        max_depth=4, min_samples_leaf=3, min_samples_split=6))
    assert audit_compliance(model, ds).passed
    for node_id in model.internal_ids:
        assert audit_compliance(prune(model, node_id), ds).passed


@pytest.fixture
def skewed():
    rng = np.random.default_rng(5)
    n = 400
    g = rng.integers(0, 2, n)
    x = ((rng.random(n) < 0.2 + 0.6 * g)).astype(int)
    other = rng.integers(0, 2, n)
    y = ((x + 0.3 * other + rng.normal(0, 0.4, n)) > 0.7).astype(int)
    return build_dataset(OrderedDict([('x', x), ('other', other)]), y,
                         {'g': g})


def test_constraint_blocks_group_revealing_splits(skewed):
    config = GrowthConfig(max_depth=3, min_samples_leaf=5,
                          min_samples_split=10)
    free = fftree.fit(skewed, config=config)
    assert free.node(free.root)['feature'] == 'x'
    fair = fftree.fit(skewed, [FairnessConstraint(DP, 'g', 0.1)], config)
    assert 'x' not in [fair.node(i)['feature'] for i in [fair.root]
                       if fair.node(i)['kind'] == 'split']
    assert audit_compliance(fair, skewed).passed


def test_audit_flags_nodes_of_an_unconstrained_tree(skewed):
    config = GrowthConfig(max_depth=2, min_samples_leaf=5,
                          min_samples_split=10)
    free = fftree.fit(skewed, config=config)
    strict = free.with_constraints([FairnessConstraint(DP, 'g', 0.05)])
    report = audit_compliance(strict, skewed)
    assert not report.passed
    assert free.root in report.failing_nodes
    assert report.as_dict()['failing_nodes'] == report.failing_nodes


def test_eopp_constraint_is_audited(skewed):
    config = GrowthConfig(max_depth=3, min_samples_leaf=5,
                          min_samples_split=10)
    model = fftree.fit(skewed, [FairnessConstraint(EOPP, 'g', 0.1)], config)
    assert audit_compliance(model, skewed).passed


def test_prune_collapses_a_subtree(skewed):
    config = GrowthConfig(max_depth=3, min_samples_leaf=5,
                          min_samples_split=10)
    model = fftree.fit(skewed, config=config)
    pruned = prune(model, model.root)
    assert pruned.n_leaves == 1
    root = pruned.node(pruned.root)
    assert root['pos_rate'] == pytest.approx(skewed.y.mean())
    with pytest.raises(BadNodeId):
        prune(model, model.leaf_ids[0])
    with pytest.raises(BadNodeId):
        prune(model, 999)


def test_rules_cover_every_leaf(skewed):
    config = GrowthConfig(max_depth=2, min_samples_leaf=5,
                          min_samples_split=10)
    model = fftree.fit(skewed, config=config)
    rules = model.rules()
    assert [leaf_id for leaf_id, _, _ in rules] == model.leaf_ids
    text = render_rules(model)
    assert text.count('IF') == model.n_leaves
    assert 'x == ' in text


def test_json_round_trip_keeps_predictions(skewed):
    config = GrowthConfig(max_depth=3, min_samples_leaf=5,
                          min_samples_split=10)
    model = fftree.fit(skewed, [FairnessConstraint(DP, 'g', 0.2)], config)
    restored = FFTreeModel.from_dict(json.loads(model.to_json()))
    assert restored == model
    assert np.array_equal(restored.predict_score(skewed),
                          model.predict_score(skewed))


def test_encoded_model_applies_its_map_to_raw_data(make_dataset):
    raw = make_dataset({'age': [20, 25, 30, 35, 40, 45, 50, 55]},
                       [0, 0, 0, 0, 1, 1, 1, 1], {'g': [0, 1] * 4})
    encoded, encoding = encode(raw)
    model = fftree.fit(encoded, config=GrowthConfig(
        max_depth=3, min_samples_leaf=1, min_samples_split=2),
        encoding=encoding)
    assert model.predict_label(raw).tolist() == [0] * 4 + [1] * 4
    bare = FFTreeModel(list(model.nodes.values()), features=model.features)
    with pytest.raises(EncodingMismatch):
        bare.predict_score(raw)
