# -*- coding: utf-8 -*-
from collections import OrderedDict

import numpy as np
import pytest

from fairness_manager.contrast import (UNDEFINED, WAE, WYSIWYG,
                                       DecisionRule, evaluate_worldview,
                                       fairview, g_contrast, render_rules,
                                       trace)
from fairness_manager.config import SurrogateConfig
from fairness_manager.exceptions import (ConfigurationException,
                                         GroupTooSmall, UnknownColumn)

SURROGATE = {'min_rows': 10, 'min_samples_leaf': 2, 'max_depth': 3,
             'max_leaves': 4}


@pytest.fixture
def two_groups(make_dataset):
    # rule x > 0.5 admits 4 rows of each group: 3 vs 1 positives;
    # both groups are half positive overall
    x = [1, 1, 1, 1, 0, 0] * 2
    y = [1, 1, 1, 0, 0, 0] + [1, 0, 0, 0, 1, 1]
    return make_dataset({'x': x}, y, {'g': ['a'] * 6 + ['b'] * 6})


def test_g_contrast_measures_priors_per_group(two_groups):
    rule = DecisionRule('a', [('x', '>', 0.5)], 2, 4.0, 0.75)
    contrast, = g_contrast([rule], two_groups, 'g')
    assert contrast.sizes == OrderedDict([('a', 4.0), ('b', 4.0)])
    assert contrast.priors['a'] == pytest.approx(0.75)
    assert contrast.priors['b'] == pytest.approx(0.25)
    assert contrast.delta == pytest.approx(0.5)
    report = evaluate_worldview([contrast], threshold=0.05, min_size=1)
    assert report.entries[0][1] == WAE
    assert report.summary[0] == 'the evidence suggests following only WAE'


def test_rule_admitting_no_row_of_a_group_is_undefined(two_groups):
    rule = DecisionRule('a', [('x', '>', 5)], 3, 0.0, 1.0)
    contrast, = g_contrast([rule], two_groups, 'g')
    assert contrast.delta is None
    assert contrast.undefined_groups == ['a', 'b']
    report = evaluate_worldview([contrast], min_size=1)
    assert report.entries[0][1] == UNDEFINED
    assert report.summary == [
        'no evidence: every rule is undefined or too small']


def test_small_admitted_groups_are_undefined(two_groups):
    rule = DecisionRule('a', [('x', '>', 0.5)], 2, 4.0, 0.75)
    contrasts = g_contrast([rule], two_groups, 'g')
    report = evaluate_worldview(contrasts, threshold=0.05, min_size=10)
    assert report.entries[0][1] == UNDEFINED


def test_mixed_evidence_names_the_counter_example(two_groups):
    wae = DecisionRule('a', [('x', '>', 0.5)], 2, 4.0, 0.75)
    everything = DecisionRule('b', [], 1, 12.0, 0.5)
    contrasts = g_contrast([wae, everything], two_groups, 'g')
    assert contrasts[1].delta == pytest.approx(0.0)
    report = evaluate_worldview(contrasts, threshold=0.05, min_size=1)
    assert [k for _, k in report.entries] == [WAE, WYSIWYG]
    assert report.shares[WYSIWYG] == pytest.approx(12.0 / 20)
    assert report.summary[0].startswith(
        'the evidence leans towards WYSIWYG')
    assert 'x > 0.5' in report.summary[1]
    assert 'IF TRUE' in render_rules(contrasts)


def test_rules_need_their_columns(two_groups):
    rule = DecisionRule('a', [('income', '<=', 3)], 1, 1.0, 1.0)
    with pytest.raises(UnknownColumn):
        g_contrast([rule], two_groups, 'g')


def test_threshold_must_be_a_share():
    with pytest.raises(ConfigurationException):
        evaluate_worldview([], threshold=0.0)
    assert evaluate_worldview([]).summary == [
        'no evidence: there are no rules to contrast']


def test_trace_needs_enough_rows_per_group(two_groups):
    with pytest.raises(GroupTooSmall):
        trace(two_groups, 'g', {'min_rows': 50})


def test_fairview_on_a_shared_rule(make_dataset):
    rng = np.random.default_rng(4)
    n = 120
    g = np.repeat([0, 1], n // 2)
    x = (rng.random(n) < np.where(g == 1, 0.3, 0.7)).astype(int)
    noise = rng.integers(0, 2, n)
    ds = make_dataset(OrderedDict([('x', x), ('noise', noise)]), x,
                      {'g': g})
    surrogates = trace(ds, 'g', SURROGATE)
    assert list(surrogates) == ['0', '1']
    for surrogate in surrogates.values():
        assert surrogate.quality['accuracy'] == pytest.approx(1.0)
        assert [r.conditions for r in surrogate.rules] == [[('x', '==', 1)]]
    report = fairview(ds, 'g', SURROGATE, threshold=0.05, min_size=5)
    assert set(k for _, k in report.entries) == {WYSIWYG}
    assert report.summary[0] == \
        'the evidence suggests following only WYSIWYG'
    data = report.as_dict()
    assert data['rules'][0]['classification'] == WYSIWYG
    assert set(data['surrogate_quality']) == {'0', '1'}
    assert 'surrogate 0: accuracy 1.000' in report.render()


def test_surrogate_leaves_scale_with_the_class():
    config = SurrogateConfig({'min_samples_leaf': 20,
                              'min_leaf_fraction': 0.05})
    assert config.growth(100).min_samples_leaf == 20
    growth = config.growth(10000)
    assert growth.min_samples_leaf == 500
    assert growth.min_samples_split == 1000
    with pytest.raises(ConfigurationException):
        SurrogateConfig({'min_leaf_fraction': 0.5})


def test_traced_leaves_hold_their_share_of_the_class(make_dataset):
    rng = np.random.default_rng(9)
    n = 800
    g = np.repeat([0, 1], n // 2)
    x = rng.normal(size=n) - 0.5 * g
    y = (x + rng.normal(0.0, 0.5, n) > 0).astype(int)
    ds = make_dataset({'x': x}, y, {'g': g})
    surrogates = trace(ds, 'g', {'min_samples_leaf': 2,
                                 'min_leaf_fraction': 0.1},
                       positive_only=False)
    for surrogate in surrogates.values():
        assert surrogate.rules
        assert all(rule.support >= 40 for rule in surrogate.rules)
