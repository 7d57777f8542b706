# -*- coding: utf-8 -*-
import numpy as np
import pytest

from fairness_manager.biasgen import inject_score_bias
from fairness_manager.constants import DP
from fairness_manager.exceptions import (ConfigurationException,
                                         EmptyBackground, NonNumericColumn,
                                         NotIndividuallyFair,
                                         TooManyFeatures, UnknownClass,
                                         ViewMismatch)
from fairness_manager.mitigate import ThresholdPolicy, fit_linear_score
from fairness_manager.monitor import (DriftReport, GroupPolicyModel,
                                      ShockSpec, apply_shock,
                                      evaluate_over_slices, fit_group_model,
                                      group_delta_shapley,
                                      most_important_feature,
                                      retrain_on_surrogate, ScoreBiasModel,
                                      shapley_exact, surrogate_targets)


def test_shock_spec_parsing():
    spec = ShockSpec.parse('R:+1.5sd')
    assert (spec.column, spec.magnitude, spec.sign, spec.scope) == \
        ('R', 1.5, 'positive', 'overall')
    assert spec.label == 'R+1.5sd'
    conditioned = ShockSpec.parse('R:-0.5sd:1', sensitive='A')
    assert conditioned.scope == 'conditioned'
    assert conditioned.group == '1'
    assert conditioned.label == 'R-0.5sd|A=1'
    for text in ('R:+1.5', 'R:*1sd', 'R'):
        with pytest.raises(ConfigurationException):
            ShockSpec.parse(text)
    with pytest.raises(ConfigurationException):
        ShockSpec('R', 0.0)


def test_apply_shock(make_dataset):
    ds = make_dataset({'r': [1.0, 2.0, 3.0, 4.0]}, [0, 1, 0, 1],
                      {'a': ['0', '0', '1', '1']},
                      categorical={'c': ['u', 'v', 'u', 'v']})
    sigma = np.std([1.0, 2.0, 3.0, 4.0])
    up = apply_shock(ds, ShockSpec('r', 1.0))
    assert np.allclose(up.column('r'), ds.column('r') + sigma)
    down = apply_shock(ds, ShockSpec('r', 2.0, 'negative', 'conditioned',
                                     '1', 'a'))
    assert np.allclose(down.column('r'),
                       [1.0, 2.0, 3.0 - 2 * sigma, 4.0 - 2 * sigma])
    with pytest.raises(NonNumericColumn):
        apply_shock(ds, ShockSpec('c', 1.0))
    with pytest.raises(UnknownClass):
        apply_shock(ds, ShockSpec('r', 1.0, scope='conditioned', group='9',
                                  sensitive='a'))


def test_drift_report_flags():
    report = DriftReport()
    report.add('m', '2020', 0.005, 0.8)
    report.add('m', '2021', -0.2, 0.7)
    report.add('m', '2022', 0.05, 0.75)
    report.add('m', '2023', None)
    assert [r['flag'] for r in report.rows] == \
        ['fair', 'unfair', '', 'undefined']
    assert report.value('m', '2021') == -0.2
    rows = report.table_rows()
    assert rows[0][2] == '*0.0050*'
    assert rows[1][2] == '_-0.2000_'
    assert rows[3][2] == '-'
    with pytest.raises(ConfigurationException):
        report.add('m', '2020', 0.0)


def test_evaluate_over_slices(biased_pair):
    model = fit_linear_score(biased_pair)
    half = biased_pair.n_rows // 2
    slices = {'early': biased_pair.select_rows(np.arange(half)),
              'late': biased_pair.select_rows(np.arange(half,
                                                        biased_pair.n_rows))}
    report = evaluate_over_slices(model, slices, 'a', model_id='lin')
    assert [r['context'] for r in report.rows] == ['early', 'late']
    for row in report.rows:
        assert row['accuracy'] > 0.7
        assert row['dp'] is not None
    assert 'lin' in report.render()


def test_shapley_of_an_additive_function():
    def f(X):
        return X[:, 0] + X[:, 1]

    background = np.array([[1.0, -1.0], [-1.0, 1.0]])
    attribution = shapley_exact(f, [2.0, 3.0], background)
    assert attribution.values.tolist() == pytest.approx([2.0, 3.0])
    assert attribution.features == ['x0', 'x1']


def test_shapley_dummy_feature_and_efficiency():
    def f(X):
        return X[:, 0] * X[:, 1] + X[:, 0] ** 2

    rng = np.random.default_rng(0)
    background = rng.normal(size=(20, 3))
    attribution = shapley_exact(f, [0.5, -1.2, 7.0], background,
                                ['a', 'b', 'dummy'])
    assert attribution.value('dummy') == pytest.approx(0.0, abs=1e-12)
    assert attribution.efficiency_gap < 1e-9


def test_shapley_limits():
    with pytest.raises(TooManyFeatures):
        shapley_exact(lambda X: X.sum(axis=1), np.zeros(13),
                      np.zeros((2, 13)))
    with pytest.raises(EmptyBackground):
        shapley_exact(lambda X: X.sum(axis=1), [1.0, 2.0],
                      np.zeros((0, 2)))


def test_most_important_feature(biased_pair):
    model = fit_linear_score(biased_pair)
    assert most_important_feature(model, biased_pair, background_n=16,
                                  sample_n=20, seed=1) == 'x1'


def test_group_policy_model_scores_match_decisions(biased_pair):
    model = fit_group_model(biased_pair, 'a', DP, epsilon=0.01)
    assert model.features[-1] == 'a'
    scores = model.predict_score(biased_pair)
    labels = model.predict_label(biased_pair)
    assert np.mean((scores > 0.5) == (labels == 1)) > 0.999
    s = biased_pair.labels('a')
    rates = [labels[s == g].mean() for g in ('0', '1')]
    assert abs(rates[0] - rates[1]) <= 0.01 + 1e-9
    assert model.as_dict()['kind'] == 'group-policy'


def test_surrogate_targets_need_an_individually_fair_model(biased_pair):
    blind = fit_linear_score(biased_pair)
    aware = _policy_model(blind, 0.3)
    with pytest.raises(NotIndividuallyFair):
        surrogate_targets(aware, biased_pair, 'a')
    targets = surrogate_targets(blind, biased_pair, 'a')
    assert np.array_equal(targets, blind.predict_label(biased_pair))
    retrained = retrain_on_surrogate(blind, biased_pair, 'a', epsilon=0.02)
    assert retrained.policy.achieved_gap <= 0.02 + 1e-12


def _policy_model(score_model, deprived_threshold):
    policy = ThresholdPolicy(DP, {'0': 0.5, '1': deprived_threshold},
                             sensitive='a')
    return GroupPolicyModel(score_model, policy, 'a')


@pytest.mark.parametrize('threshold,status', [
    (0.5, 'stagnation'),
    (0.3, 'decline'),
    (0.7, 'long-term improvement'),
])
def test_group_delta_shapley_status(biased_pair, threshold, status):
    score_model = fit_linear_score(biased_pair)
    first = _policy_model(score_model, 0.5)
    second = _policy_model(score_model, threshold)
    report = group_delta_shapley(first, second, biased_pair, 'a',
                                 background_n=16, sample_n=20, seed=3,
                                 deprived='1')
    assert report.status == status
    assert report.delta('x1') == pytest.approx(0.0, abs=1e-12)
    if threshold == 0.5:
        assert report.delta_sensitive == pytest.approx(0.0, abs=1e-12)
    assert 'deprived class a=1' in report.render()


def test_group_delta_shapley_view_checks(biased_pair):
    score_model = fit_linear_score(biased_pair)
    policy_model = _policy_model(score_model, 0.5)
    with pytest.raises(ViewMismatch):
        group_delta_shapley(policy_model, score_model, biased_pair, 'a')
    with pytest.raises(ViewMismatch):
        group_delta_shapley(score_model, score_model, biased_pair, 'a')


@pytest.mark.parametrize('seed', range(100))
def test_shapley_efficiency_on_random_models(seed):
    rng = np.random.default_rng(6000 + seed)
    d = int(rng.integers(1, 9))
    linear = rng.normal(size=d)
    pairs = rng.normal(size=(d, d))

    def f(X):
        return X.dot(linear) + np.einsum('ij,jk,ik->i', X, pairs, X) + \
            np.tanh(X[:, 0] * X[:, -1])

    background = rng.normal(size=(int(rng.integers(1, 12)), d))
    attribution = shapley_exact(f, rng.normal(size=d), background)
    assert attribution.efficiency_gap < 1e-9


def test_group_delta_shapley_is_antisymmetric(biased_pair):
    score_model = fit_linear_score(biased_pair)
    first = _policy_model(score_model, 0.45)
    second = _policy_model(score_model, 0.6)
    forward = group_delta_shapley(first, second, biased_pair, 'a',
                                  background_n=16, sample_n=20, seed=2,
                                  deprived='1')
    backward = group_delta_shapley(second, first, biased_pair, 'a',
                                   background_n=16, sample_n=20, seed=2,
                                   deprived='1')
    for row in forward.rows:
        assert backward.delta(row['feature']) == \
            pytest.approx(-row['delta'], abs=1e-12)
        assert backward.delta(row['feature'], 'deprived') == \
            pytest.approx(-row['delta_deprived'], abs=1e-12)
    assert forward.status == 'long-term improvement'
    assert backward.status == 'decline'


def test_injected_score_bias_moves_only_the_sensitive_attribution(
        biased_pair):
    beta = 0.2
    score_model = fit_linear_score(biased_pair)
    first = _policy_model(score_model, 0.5)
    # thresholds raised by beta for a=1 read as scores lowered by beta
    second = _policy_model(score_model, 0.5 + beta)
    a = biased_pair.labels('a').astype(np.float64)
    assert np.allclose(second.predict_score(biased_pair),
                       inject_score_bias(first.predict_score(biased_pair),
                                         a, beta))
    # the whole data as background, so phi_a of a=1 rows is
    # -beta * (1 - mean(a))
    report = group_delta_shapley(first, second, biased_pair, 'a',
                                 background_n=biased_pair.n_rows,
                                 sample_n=20, seed=1, deprived='1')
    assert report.delta_sensitive == \
        pytest.approx(-beta * (1.0 - a.mean()), abs=1e-9)
    for feature in ('x1', 'x2'):
        assert report.delta(feature) == pytest.approx(0.0, abs=1e-12)
    assert report.status == 'long-term improvement'


def test_score_bias_model_lowers_one_class(biased_pair):
    score_model = fit_linear_score(biased_pair)
    biased = ScoreBiasModel(score_model, 0.2, 'a')
    members = biased_pair.labels('a') == '1'
    raw = score_model.predict_score(biased_pair)
    scores = biased.predict_score(biased_pair)
    assert np.allclose(scores[~members], raw[~members])
    assert np.allclose(scores[members], np.clip(raw[members] - 0.2, 0, 1))
    assert np.array_equal(biased.predict_label(biased_pair),
                          (scores > 0.5).astype(int))

    policy = _policy_model(score_model, 0.4)
    deployed = ScoreBiasModel(policy, 0.2, 'a')
    labels = deployed.predict_label(biased_pair)
    expected = np.where(members, np.clip(raw - 0.2, 0, 1) > 0.4, raw > 0.5)
    assert np.array_equal(labels, expected.astype(int))
