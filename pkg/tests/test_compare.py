# -*- coding: utf-8 -*-
import pytest

from fairness_manager.compare import (EvaluatedModel, compare,
                                      constrained_best, pareto_frontier,
                                      render, tradeoff_score)
from fairness_manager.exceptions import (BadBeta, ComparisonException,
                                         MissingMetric)
from fairness_manager.metrics import MetricsReport


def _model(model_id, phi, pi, family='none', key='dp_diff'):
    report = MetricsReport({key: phi}, performance={'f1': pi,
                                                    'accuracy': pi})
    return EvaluatedModel(model_id, report, family)


def test_tradeoff_score():
    assert tradeoff_score(0.8, 0.0) == pytest.approx(0.8889, abs=1e-4)
    assert tradeoff_score(0.8, 1.0) == 0.0
    assert tradeoff_score(0.8, -1.0) == 0.0
    assert tradeoff_score(0.875, 0.2) == pytest.approx(0.8358, abs=1e-4)
    assert tradeoff_score(0.0, 1.0) == 0.0
    assert tradeoff_score(0.875, 0.2, beta=2.0) != \
        tradeoff_score(0.875, 0.2, beta=0.5)


def test_tradeoff_score_rejects_bad_inputs():
    with pytest.raises(BadBeta):
        tradeoff_score(0.5, 0.1, beta=0)
    with pytest.raises(ComparisonException):
        tradeoff_score(1.5, 0.1)
    with pytest.raises(ComparisonException):
        tradeoff_score(0.5, 1.1)


def test_constrained_best_picks_top_performance_within_bound():
    models = [_model('a', 0.03, 0.85), _model('b', 0.07, 0.90)]
    winner, rows = constrained_best(models, 'dp_diff', 'f1', 0.05)
    assert winner == 'a'
    assert [r['feasible'] for r in rows] == [True, False]
    winner, _ = constrained_best(models, 'dp_diff', 'f1', 0.01)
    assert winner is None


def test_constrained_best_uses_absolute_gap_and_id_ties():
    models = [_model('b', -0.02, 0.8), _model('a', 0.01, 0.8)]
    winner, _ = constrained_best(models, 'dp_diff', 'f1', 0.05)
    assert winner == 'a'


def test_ratio_metrics_measure_distance_from_one():
    model = _model('r', 0.75, 0.8, key='dp_ratio')
    assert model.phi('dp_ratio') == pytest.approx(0.25)


def test_pareto_frontier():
    models = [_model('a', 0.01, 0.7), _model('b', 0.02, 0.9),
              _model('c', 0.03, 0.8)]
    frontier = pareto_frontier(models, 'dp_diff', 'f1')
    assert [m.model_id for m in frontier] == ['a', 'b']


def test_missing_metric_and_family():
    model = _model('a', None, 0.7)
    with pytest.raises(MissingMetric):
        model.phi('dp_diff')
    with pytest.raises(MissingMetric):
        _model('b', 0.1, 0.7).pi('auc')
    with pytest.raises(ComparisonException):
        _model('c', 0.1, 0.7, family='magic')


def test_compare_report():
    models = [_model('base', 0.20, 0.88), _model('fair', 0.02, 0.84, 'post'),
              _model('pre', 0.04, 0.80, 'pre')]
    report = compare(models, Phi=0.05, extra_keys=['accuracy'])
    assert report.winner == 'fair'
    assert report.frontier == ['fair', 'base']
    data = report.as_dict()
    assert data['empty_feasible_set'] is False
    assert [row['family'] for row in data['models']] == \
        ['none', 'post', 'pre']
    rows = report.table_rows()
    # best |phi| and worst |phi| are marked
    assert rows[1][2] == '*0.0200*'
    assert rows[0][2] == '_0.2000_'
    assert rows[0][-1] == pytest.approx(0.88)
    text = render(report)
    assert 'best f1 with |dp_diff| <= 0.05: fair' in text
    assert 'pareto frontier: fair, base' in text


def test_compare_without_feasible_models():
    report = compare([_model('a', 0.3, 0.9), _model('b', 0.2, 0.7)],
                     Phi=0.1)
    assert report.winner is None
    assert report.as_dict()['empty_feasible_set'] is True
    assert 'no model satisfies' in report.render()
