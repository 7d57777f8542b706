# -*- coding: utf-8 -*-
"""Ranking of models on a fairness metric and a performance metric."""
from collections import OrderedDict

from .constants import FAMILIES, RATIO_KEYS
from .exceptions import BadBeta, ComparisonException, MissingMetric
from .log import get_logger
from .mixins import ReportMixin, SerializableMixin
from .utils import render_table

logger = get_logger(__name__)


class EvaluatedModel(SerializableMixin):
    def __init__(self, model_id, report, family='none'):
        if family not in FAMILIES:
            raise ComparisonException(
                "family must be one of {}".format(list(FAMILIES)))
        self.model_id = model_id
        self.report = report
        self.family = family

    def metric(self, key):
        value = self.report.get(key) if self.report.has(key) else None
        if value is None:
            raise MissingMetric(self.model_id, key)
        return float(value)

    def phi(self, key):
        """Fairness metric as a distance from parity in [0,1]."""
        value = self.metric(key)
        if key in RATIO_KEYS:
            return abs(1.0 - value)
        return abs(value)

    def pi(self, key):
        return self.metric(key)

    def as_dict(self):
        return {'model_id': self.model_id, 'family': self.family,
                'report': self.report.as_dict()}


def tradeoff_score(pi, phi, beta=1.0):
    """F-beta shape with (1 - |phi|) in the place of precision."""
    if not beta > 0:
        raise BadBeta("beta must be > 0, got {}".format(beta))
    if not 0 <= pi <= 1 or not -1 <= phi <= 1:
        raise ComparisonException(
            "pi must be in [0,1] and phi in [-1,1], got {} and {}".format(
                pi, phi))
    fair = 1.0 - abs(phi)
    b2 = beta * beta
    denominator = b2 * fair + pi
    if denominator == 0:
        return 0.0
    return (1.0 + b2) * fair * pi / denominator


def _points(models, fairness_key, performance_key):
    return [(m.model_id, m.phi(fairness_key), m.pi(performance_key))
            for m in models]


def constrained_best(models, fairness_key, performance_key, Phi):
    """Best performance among models with |phi| <= Phi.

    Returns (winner id or None when nothing qualifies, feasibility rows).
    """
    rows = []
    for model_id, phi, pi in _points(models, fairness_key, performance_key):
        rows.append(OrderedDict([('model_id', model_id), ('phi', phi),
                                 ('pi', pi), ('feasible', phi <= Phi)]))
    feasible = [r for r in rows if r['feasible']]
    if not feasible:
        logger.info("no model reaches |{}| <= {}".format(fairness_key, Phi))
        return None, rows
    winner = min(feasible, key=lambda r: (-r['pi'], r['model_id']))
    return winner['model_id'], rows


def pareto_frontier(models, fairness_key, performance_key):
    """Models not dominated in (smaller |phi|, larger pi), by |phi|."""
    points = _points(models, fairness_key, performance_key)
    by_id = OrderedDict((m.model_id, m) for m in models)
    frontier, seen = [], set()
    for model_id, phi, pi in sorted(points, key=lambda p: (p[1], p[0])):
        if (phi, pi) in seen:
            continue
        dominated = any(
            o_phi <= phi and o_pi >= pi and (o_phi < phi or o_pi > pi)
            for _, o_phi, o_pi in points)
        if not dominated:
            frontier.append(by_id[model_id])
            seen.add((phi, pi))
    return frontier


class ComparisonReport(ReportMixin):
    def __init__(self, fairness_key, performance_key, Phi, beta, rows,
                 winner, frontier, extra_keys=()):
        self.fairness_key = fairness_key
        self.performance_key = performance_key
        self.Phi = Phi
        self.beta = beta
        self.rows = rows
        self.winner = winner
        self.frontier = frontier
        self.extra_keys = list(extra_keys)

    def as_dict(self):
        return {'inputs': {'fairness_key': self.fairness_key,
                           'performance_key': self.performance_key},
                'Phi': self.Phi, 'beta': self.beta, 'models': self.rows,
                'winner': self.winner, 'frontier': self.frontier,
                'empty_feasible_set': self.winner is None}

    def table_headers(self):
        return ['model', 'family', '|{}|'.format(self.fairness_key),
                self.performance_key, 'tradeoff'] + self.extra_keys

    def _column_marks(self):
        """Best and worst row index per marked column."""
        columns = OrderedDict([('phi', min), ('pi', max),
                               ('tradeoff', max)])
        marks = {}
        for key, better in columns.items():
            values = [(r[key], i) for i, r in enumerate(self.rows)]
            if len(values) < 2:
                continue
            worse = max if better is min else min
            marks[key] = (better(values)[1], worse(values)[1])
        return marks

    def table_rows(self):
        marks = self._column_marks()
        out = []
        for i, row in enumerate(self.rows):
            cells = [row['model_id'], row['family']]
            for key in ('phi', 'pi', 'tradeoff'):
                text = '{:.4f}'.format(row[key])
                if key in marks and marks[key][0] == i:
                    text = '*{}*'.format(text)
                elif key in marks and marks[key][1] == i:
                    text = '_{}_'.format(text)
                cells.append(text)
            cells.extend(row['extra'].get(k) for k in self.extra_keys)
            out.append(cells)
        return out

    def footer_lines(self):
        if self.winner is None:
            best = 'no model satisfies |{}| <= {}'.format(
                self.fairness_key, self.Phi)
        else:
            best = 'best {} with |{}| <= {}: {}'.format(
                self.performance_key, self.fairness_key, self.Phi,
                self.winner)
        return [best, 'pareto frontier: {}'.format(
            ', '.join(self.frontier) or '-')]


def compare(models, fairness_key='dp_diff', performance_key='f1', Phi=0.05,
            beta=1.0, extra_keys=()):
    winner, feasibility = constrained_best(models, fairness_key,
                                           performance_key, Phi)
    rows = []
    for model, check in zip(models, feasibility):
        extra = OrderedDict(
            (key, model.report.get(key) if model.report.has(key) else None)
            for key in extra_keys)
        rows.append(OrderedDict([
            ('model_id', model.model_id), ('family', model.family),
            ('phi', check['phi']), ('pi', check['pi']),
            ('tradeoff', tradeoff_score(check['pi'], check['phi'], beta)),
            ('feasible', check['feasible']), ('extra', extra)]))
    frontier = [m.model_id for m in pareto_frontier(
        models, fairness_key, performance_key)]
    return ComparisonReport(fairness_key, performance_key, Phi, beta, rows,
                            winner, frontier, extra_keys)


def render(report):
    return render_table(report.table_headers(), report.table_rows()) + \
        '\n\n' + '\n'.join(report.footer_lines())
