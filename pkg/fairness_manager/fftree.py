# -*- coding: utf-8 -*-
"""Fairness-constrained decision tree.

Greedy entropy tree whose split search only accepts questions that keep
every configured fairness constraint within its tolerance at the node.
The local prediction of a split gives the positive decision to the branch
with the higher positive rate; the constraint is measured on that local
decision. Sensitive columns are never questioned.
"""
import heapq
import math

import numpy as np

from .config import GrowthConfig
from .constants import (AUDIT_TOLERANCE, CATEGORICAL, DP, EOPP, PE,
                        TREE_CRITERIA)
from .dataset import EncodingMap
from .decorators import time_it, validate_config
from .exceptions import (BadNodeId, ConfigurationException, CountMismatch,
                         EncodingMismatch, NoSensitiveColumn, UnencodedData)
from .log import get_logger
from .mixins import ReportMixin, SerializableMixin
from .utils import config_hash, read_json

logger = get_logger(__name__)

# gains closer than this are equal; the name/threshold order decides
IG_TIE = 1e-12


class FairnessConstraint(SerializableMixin):
    def __init__(self, criterion, sensitive, delta):
        if criterion not in TREE_CRITERIA:
            raise ConfigurationException(
                "criterion must be one of {}, got '{}'".format(
                    list(TREE_CRITERIA), criterion))
        delta = float(delta)
        if not 0 <= delta <= 1:
            raise ConfigurationException("delta must be in [0,1]")
        self.criterion = criterion
        self.sensitive = sensitive
        self.delta = delta

    @property
    def key(self):
        return '{}:{}'.format(self.criterion, self.sensitive)

    @classmethod
    def parse(cls, text):
        """`KIND:DELTA:COLUMN`, e.g. `DP:0.05:gender`."""
        parts = text.split(':', 2)
        if len(parts) != 3:
            raise ConfigurationException(
                "constraint '{}' is not KIND:DELTA:COLUMN".format(text))
        try:
            delta = float(parts[1])
        except ValueError:
            raise ConfigurationException(
                "constraint '{}' has a bad delta".format(text))
        return cls(parts[0].upper(), parts[2], delta)

    def as_dict(self):
        return {'criterion': self.criterion, 'sensitive': self.sensitive,
                'delta': self.delta}

    @classmethod
    def from_dict(cls, data):
        return cls(data['criterion'], data['sensitive'], data['delta'])

    def __eq__(self, other):
        return isinstance(other, FairnessConstraint) and \
            self.as_dict() == other.as_dict()

    def __repr__(self):
        return "FairnessConstraint({criterion!r}, {sensitive!r}, " \
               "{delta!r})".format(**self.as_dict())


def entropy(pos, neg):
    total = pos + neg
    if total <= 0:
        return 0.0
    h = 0.0
    for count in (pos, neg):
        if count > 0:
            p = count / total
            h -= p * math.log2(p)
    return h


def information_gain(parent_counts, left_counts, right_counts):
    """Entropy of the parent minus the size-weighted branch entropies."""
    parent = tuple(float(c) for c in parent_counts)
    left = tuple(float(c) for c in left_counts)
    right = tuple(float(c) for c in right_counts)
    if any(abs(p - (l + r)) > 1e-9 * max(1.0, p)
           for p, l, r in zip(parent, left, right)):
        raise CountMismatch(
            "branches {} + {} do not add up to {}".format(left, right,
                                                          parent))
    total = sum(parent)
    if total <= 0:
        raise CountMismatch("parent has no rows")
    return entropy(*parent) - sum(left) / total * entropy(*left) - \
        sum(right) / total * entropy(*right)


def _entropy_vector(pos, neg):
    total = pos + neg
    h = np.zeros_like(total)
    for count in (pos, neg):
        ok = (count > 0) & (total > 0)
        p = np.where(ok, count / np.where(total > 0, total, 1.0), 1.0)
        h -= np.where(ok, p * np.log2(p), 0.0)
    return h


def _gain_vector(pos, neg, pos_l, neg_l):
    pos_r, neg_r = pos - pos_l, neg - neg_l
    total = pos + neg
    left, right = pos_l + neg_l, pos_r + neg_r
    return entropy(pos, neg) - left / total * _entropy_vector(pos_l, neg_l) \
        - right / total * _entropy_vector(pos_r, neg_r)


def _left_positive(pos_l, neg_l, pos_r, neg_r):
    """Which branch takes the local positive decision: the higher positive
    rate, then more positives, then left."""
    w_l, w_r = pos_l + neg_l, pos_r + neg_r
    rate_l = np.where(w_l > 0, pos_l / np.where(w_l > 0, w_l, 1.0), 0.0)
    rate_r = np.where(w_r > 0, pos_r / np.where(w_r > 0, w_r, 1.0), 0.0)
    return (rate_l > rate_r) | ((rate_l == rate_r) & (pos_l >= pos_r))


def _criterion_values(criterion, left_positive, pg_l, ng_l, pg, ng,
                      eligible):
    """Max minus min of the per-group rate over eligible groups, NaN when
    fewer than two groups have a defined rate.

    pg_l/ng_l: (candidates, groups) weighted positives/negatives going
    left; pg/ng: (groups,) node totals.
    """
    lp = left_positive[:, None]
    tp = np.where(lp, pg_l, pg - pg_l)
    fp = np.where(lp, ng_l, ng - ng_l)
    fn = pg - tp
    if criterion == DP:
        num, den = tp + fp, np.broadcast_to(pg + ng, tp.shape)
    elif criterion == PE:
        num, den = fp, np.broadcast_to(ng, tp.shape)
    elif criterion == EOPP:
        num, den = fn, np.broadcast_to(pg, tp.shape)
    else:
        num, den = tp, tp + fp
    defined = (den > 0) & eligible[None, :]
    rate = np.where(defined, num / np.where(den > 0, den, 1.0), np.nan)
    count = defined.sum(axis=1)
    hi = np.where(defined, rate, -np.inf).max(axis=1)
    lo = np.where(defined, rate, np.inf).min(axis=1)
    return np.where(count >= 2, hi - lo, np.nan)


class SplitCandidate(SerializableMixin):
    def __init__(self, feature, threshold, ig, constraint_values,
                 local_positive_branch, indicator=False, n_left=0,
                 n_right=0):
        self.feature = feature
        self.threshold = float(threshold)
        self.ig = float(ig)
        # constraint key -> value, None when undefined (satisfied)
        self.constraint_values = constraint_values
        self.local_positive_branch = local_positive_branch
        self.indicator = indicator
        self.n_left = int(n_left)
        self.n_right = int(n_right)

    @property
    def predicate(self):
        if self.indicator:
            return '{} == 1'.format(self.feature)
        return '{} > {:g}'.format(self.feature, self.threshold)

    def as_dict(self):
        return {'feature': self.feature, 'threshold': self.threshold,
                'predicate': self.predicate, 'ig': self.ig,
                'constraint_values': self.constraint_values,
                'local_positive_branch': self.local_positive_branch}


class _TrainingData(object):
    """Column views shared by every node of one fit."""

    def __init__(self, ds, constraints):
        self.features = [n for n in ds.feature_names
                         if not ds.is_sensitive(n)]
        for name in self.features:
            if ds.column_schema(name).kind == CATEGORICAL and \
                    len(ds.classes(name)) > 2:
                raise UnencodedData(
                    "feature '{}' is categorical; one-hot encode it "
                    "first".format(name))
        self.X = ds.feature_matrix(self.features)
        self.binary = np.array([
            bool(np.all((self.X[:, j] == 0) | (self.X[:, j] == 1)))
            for j in range(len(self.features))], dtype=bool)
        self.y = ds.y.astype(np.float64)
        self.w = ds.weights.astype(np.float64)
        self.constraints = list(constraints)
        self.groups = {}
        for constraint in self.constraints:
            name = constraint.sensitive
            if not ds.has_column(name) or not ds.is_sensitive(name):
                raise NoSensitiveColumn(
                    "constraint {} needs sensitive column '{}'".format(
                        constraint.key, name))
            if name not in self.groups:
                self.groups[name] = (ds.group_codes(name),
                                     len(ds.classes(name)))


def _node_group_stats(data, rows, sensitive, min_group_count):
    codes, n_groups = data.groups[sensitive]
    onehot = np.zeros((rows.size, n_groups))
    onehot[np.arange(rows.size), codes[rows]] = 1.0
    yw = data.y[rows] * data.w[rows]
    nw = (1.0 - data.y[rows]) * data.w[rows]
    eligible = onehot.sum(axis=0) >= max(min_group_count, 1)
    return onehot, yw, nw, eligible


def _candidates(data, rows, config):
    """All admissible questions at a node with their left-branch counts."""
    X = data.X[rows]
    y, w = data.y[rows], data.w[rows]
    yw, nw = y * w, (1.0 - y) * w
    n = rows.size
    out = {'feature': [], 'threshold': [], 'n_left': [],
           'pos_l': [], 'neg_l': []}
    for j, name in enumerate(data.features):
        x = X[:, j]
        if data.binary[j]:
            zero = x == 0
            n_left = int(np.count_nonzero(zero))
            if n_left == 0 or n_left == n:
                continue
            out['feature'].append(j)
            out['threshold'].append(0.5)
            out['n_left'].append(n_left)
            out['pos_l'].append(yw[zero].sum())
            out['neg_l'].append(nw[zero].sum())
            continue
        order = np.argsort(x, kind='stable')
        xs = x[order]
        cut = np.flatnonzero(xs[:-1] != xs[1:])
        if cut.size == 0:
            continue
        out['feature'].extend([j] * cut.size)
        out['threshold'].extend(((xs[cut] + xs[cut + 1]) / 2.0).tolist())
        out['n_left'].extend((cut + 1).tolist())
        out['pos_l'].extend(np.cumsum(yw[order])[cut].tolist())
        out['neg_l'].extend(np.cumsum(nw[order])[cut].tolist())
    arrays = {k: np.asarray(v) for k, v in out.items()}
    if arrays['feature'].size == 0:
        return None
    keep = (arrays['n_left'] >= config.min_samples_leaf) & \
        (n - arrays['n_left'] >= config.min_samples_leaf)
    return {k: v[keep] for k, v in arrays.items()}


def _group_left_counts(data, rows, features, thresholds, onehot, yw, nw):
    """Per-group positive and negative weight left of each candidate,
    read off one sorted pass per feature."""
    gy, gn = onehot * yw[:, None], onehot * nw[:, None]
    shape = (features.size, onehot.shape[1])
    pg_l, ng_l = np.zeros(shape), np.zeros(shape)
    zero = np.zeros((1, onehot.shape[1]))
    for j in np.unique(features):
        at = np.flatnonzero(features == j)
        x = data.X[rows, j]
        order = np.argsort(x, kind='stable')
        k = np.searchsorted(x[order], thresholds[at], side='right')
        pg_l[at] = np.vstack([zero, np.cumsum(gy[order], axis=0)])[k]
        ng_l[at] = np.vstack([zero, np.cumsum(gn[order], axis=0)])[k]
    return pg_l, ng_l


def _evaluate_constraints(data, rows, candidates, config):
    """Constraint value per (candidate, constraint), NaN when undefined."""
    pos = (data.y[rows] * data.w[rows]).sum()
    neg = ((1.0 - data.y[rows]) * data.w[rows]).sum()
    left_positive = _left_positive(candidates['pos_l'], candidates['neg_l'],
                                   pos - candidates['pos_l'],
                                   neg - candidates['neg_l'])
    values = np.full((candidates['feature'].size, len(data.constraints)),
                     np.nan)
    cache = {}
    for k, constraint in enumerate(data.constraints):
        if constraint.sensitive not in cache:
            onehot, yw, nw, eligible = _node_group_stats(
                data, rows, constraint.sensitive, config.min_group_count)
            pg_l, ng_l = _group_left_counts(
                data, rows, candidates['feature'], candidates['threshold'],
                onehot, yw, nw)
            pg = (onehot * yw[:, None]).sum(axis=0)
            ng = (onehot * nw[:, None]).sum(axis=0)
            cache[constraint.sensitive] = (pg_l, ng_l, pg, ng, eligible)
        pg_l, ng_l, pg, ng, eligible = cache[constraint.sensitive]
        values[:, k] = _criterion_values(constraint.criterion, left_positive,
                                         pg_l, ng_l, pg, ng, eligible)
    return values, left_positive


def _best(data, rows, config):
    y = data.y[rows]
    if rows.size < config.min_samples_split or y.min() == y.max():
        return None
    candidates = _candidates(data, rows, config)
    if candidates is None or candidates['feature'].size == 0:
        return None
    pos = (y * data.w[rows]).sum()
    neg = ((1.0 - y) * data.w[rows]).sum()
    ig = _gain_vector(pos, neg, candidates['pos_l'], candidates['neg_l'])
    values, left_positive = _evaluate_constraints(data, rows, candidates,
                                                  config)
    deltas = np.array([c.delta for c in data.constraints])
    if deltas.size:
        violated = np.any(np.where(np.isnan(values), False,
                                   values > deltas[None, :]), axis=1)
        ig = np.where(violated, 0.0, ig)
    best = ig.max()
    if best <= IG_TIE:
        return None
    tied = np.flatnonzero(ig >= best - IG_TIE)
    names = [data.features[candidates['feature'][i]] for i in tied]
    i = tied[min(range(tied.size),
                 key=lambda t: (names[t], candidates['threshold'][tied[t]]))]
    j = candidates['feature'][i]
    return SplitCandidate(
        feature=data.features[j],
        threshold=candidates['threshold'][i],
        ig=ig[i],
        constraint_values={
            c.key: (None if np.isnan(values[i, k]) else float(values[i, k]))
            for k, c in enumerate(data.constraints)},
        local_positive_branch='left' if left_positive[i] else 'right',
        indicator=bool(data.binary[j]),
        n_left=candidates['n_left'][i],
        n_right=rows.size - candidates['n_left'][i])


def find_best_split(rows, constraints, config, ds):
    """Best admissible question for the rows of one node, or None."""
    config = validate_config(config, GrowthConfig)
    data = _TrainingData(ds, constraints)
    return _best(data, np.asarray(rows), config)


def local_constraint_value(rows, split, constraint, ds, min_group_count=1):
    """Constraint value of `split` on `rows`; None means undefined, which
    counts as satisfied."""
    data = _TrainingData(ds, [constraint])
    rows = np.asarray(rows)
    j = data.features.index(split.feature)
    x = data.X[rows, j]
    left = x <= split.threshold
    yw = data.y[rows] * data.w[rows]
    nw = (1.0 - data.y[rows]) * data.w[rows]
    candidates = {'feature': np.array([j]),
                  'threshold': np.array([split.threshold]),
                  'pos_l': np.array([yw[left].sum()]),
                  'neg_l': np.array([nw[left].sum()])}
    config = GrowthConfig(min_group_count=min_group_count)
    values, _ = _evaluate_constraints(data, rows, candidates, config)
    return None if np.isnan(values[0, 0]) else float(values[0, 0])


class FFTreeModel(SerializableMixin):
    def __init__(self, nodes, constraints=(), config=None, encoding=None,
                 features=(), sensitive=()):
        # id -> node dict; children of a split are `left` (x <= threshold)
        # and `right` (x > threshold)
        self.nodes = {node['id']: dict(node) for node in nodes}
        self.constraints = list(constraints)
        self.config = validate_config(config, GrowthConfig)
        self.encoding = encoding
        self.features = list(features)
        self.sensitive = list(sensitive)
        self.root = min(self.nodes)

    # structure

    def node(self, node_id):
        return self.nodes[node_id]

    @property
    def leaf_ids(self):
        return sorted(i for i, n in self.nodes.items() if n['kind'] == 'leaf')

    @property
    def internal_ids(self):
        return sorted(i for i, n in self.nodes.items()
                      if n['kind'] == 'split')

    @property
    def n_leaves(self):
        return len(self.leaf_ids)

    def _depth(self, node_id):
        node = self.nodes[node_id]
        if node['kind'] == 'leaf':
            return 0
        return 1 + max(self._depth(node['left']),
                       self._depth(node['right']))

    @property
    def depth(self):
        return self._depth(self.root)

    def split_features(self):
        return sorted(set(self.nodes[i]['feature']
                          for i in self.internal_ids))

    def tests_sensitive(self):
        return any(f in self.sensitive for f in self.split_features())

    def subtree(self, node_id):
        stack, ids = [node_id], []
        while stack:
            current = stack.pop()
            ids.append(current)
            node = self.nodes[current]
            if node['kind'] == 'split':
                stack.extend([node['right'], node['left']])
        return ids

    # prediction

    def prepare(self, ds):
        """Encode raw data through the model's map when needed."""
        missing = [f for f in self.features if not ds.has_column(f)]
        if missing and self.encoding is not None:
            ds = self.encoding.apply(ds)
            missing = [f for f in self.features if not ds.has_column(f)]
        if missing:
            raise EncodingMismatch(
                "dataset lacks model features {}".format(missing[:5]))
        return ds

    def leaf_index(self, ds):
        ds = self.prepare(ds)
        X = {}
        leaves = np.empty(ds.n_rows, dtype=np.int64)
        stack = [(self.root, np.arange(ds.n_rows))]
        while stack:
            node_id, rows = stack.pop()
            node = self.nodes[node_id]
            if node['kind'] == 'leaf':
                leaves[rows] = node_id
                continue
            feature = node['feature']
            if feature not in X:
                X[feature] = ds.feature_matrix([feature])[:, 0]
            right = X[feature][rows] > node['threshold']
            stack.append((node['left'], rows[~right]))
            stack.append((node['right'], rows[right]))
        return leaves

    def predict_score(self, ds):
        leaves = self.leaf_index(ds)
        rates = np.array([self.nodes[i]['pos_rate'] for i in leaves])
        return rates.astype(np.float64) if rates.size else np.zeros(0)

    def predict_label(self, ds, tau=0.5):
        return (self.predict_score(ds) > tau).astype(np.int64)

    def rows_per_node(self, ds):
        ds = self.prepare(ds)
        reached = {}
        stack = [(self.root, np.arange(ds.n_rows))]
        while stack:
            node_id, rows = stack.pop()
            reached[node_id] = rows
            node = self.nodes[node_id]
            if node['kind'] == 'split':
                x = ds.feature_matrix([node['feature']])[rows, 0]
                right = x > node['threshold']
                stack.append((node['left'], rows[~right]))
                stack.append((node['right'], rows[right]))
        return reached

    # rules

    def rules(self):
        """Root-to-leaf conjunctions as (leaf id, conditions, leaf node).

        A condition is (feature, op, threshold) with op one of
        '<=' / '>' for numeric features and '==' for indicators
        (threshold 0 or 1).
        """
        out = []
        stack = [(self.root, [])]
        while stack:
            node_id, conditions = stack.pop()
            node = self.nodes[node_id]
            if node['kind'] == 'leaf':
                out.append((node_id, conditions, node))
                continue
            if node.get('indicator'):
                left = (node['feature'], '==', 0)
                right = (node['feature'], '==', 1)
            else:
                left = (node['feature'], '<=', node['threshold'])
                right = (node['feature'], '>', node['threshold'])
            stack.append((node['right'], conditions + [right]))
            stack.append((node['left'], conditions + [left]))
        return sorted(out, key=lambda rule: rule[0])

    # serialization

    def as_dict(self):
        meta = {'constraints': [c.as_dict() for c in self.constraints],
                'config': self.config.as_dict(),
                'features': self.features,
                'sensitive': self.sensitive,
                'encoding_ref': None, 'encoding': None}
        if self.encoding is not None:
            meta['encoding'] = self.encoding.as_dict()
            meta['encoding_ref'] = config_hash(meta['encoding'])
        return {'meta': meta,
                'nodes': [self.nodes[i] for i in sorted(self.nodes)]}

    @classmethod
    def from_dict(cls, data):
        meta = data['meta']
        encoding = meta.get('encoding')
        return cls(data['nodes'],
                   [FairnessConstraint.from_dict(c)
                    for c in meta.get('constraints', [])],
                   GrowthConfig(meta.get('config', {})),
                   EncodingMap.from_dict(encoding) if encoding else None,
                   meta.get('features', []), meta.get('sensitive', []))

    @classmethod
    def from_json(cls, path):
        return cls.from_dict(read_json(path))

    def __eq__(self, other):
        return isinstance(other, FFTreeModel) and \
            self.as_dict() == other.as_dict()

    def with_constraints(self, constraints):
        return FFTreeModel(list(self.nodes.values()), constraints,
                           self.config, self.encoding, self.features,
                           self.sensitive)


def _leaf(node_id, rows, data, depth):
    weight = float(data.w[rows].sum())
    positives = float((data.y[rows] * data.w[rows]).sum())
    return {'id': node_id, 'kind': 'leaf', 'depth': depth,
            'n': int(rows.size), 'weight': weight, 'pos_weight': positives,
            'pos_rate': positives / weight if weight > 0 else 0.0}


@time_it
def fit(ds_train, constraints=(), config=None, encoding=None):
    """Grow a tree on an encoded dataset.

    Without `max_leaves` every admissible split is taken (depth-first
    order does not matter). With it, the open leaf whose best split has
    the highest gain is expanded first until the leaf budget is spent.
    """
    config = validate_config(config, GrowthConfig)
    constraints = list(constraints)
    data = _TrainingData(ds_train, constraints)
    rows = np.arange(ds_train.n_rows)
    nodes = {0: _leaf(0, rows, data, 0)}
    members = {0: rows}
    next_id = 1
    frontier = []

    def push(node_id):
        node = nodes[node_id]
        if node['depth'] >= config.max_depth:
            return
        split = _best(data, members[node_id], config)
        if split is not None:
            heapq.heappush(frontier, (-split.ig, node_id, split))

    push(0)
    while frontier:
        if config.max_leaves is not None and \
                sum(1 for n in nodes.values() if n['kind'] == 'leaf') >= \
                config.max_leaves:
            break
        _, node_id, split = heapq.heappop(frontier)
        node_rows = members[node_id]
        j = data.features.index(split.feature)
        right = data.X[node_rows, j] > split.threshold
        left_id, right_id = next_id, next_id + 1
        next_id += 2
        depth = nodes[node_id]['depth'] + 1
        for child, child_rows in ((left_id, node_rows[~right]),
                                  (right_id, node_rows[right])):
            nodes[child] = _leaf(child, child_rows, data, depth)
            members[child] = child_rows
        nodes[node_id].update(
            kind='split', feature=split.feature, threshold=split.threshold,
            indicator=split.indicator, left=left_id, right=right_id,
            ig=split.ig, constraint_values=split.constraint_values,
            local_positive_branch=split.local_positive_branch)
        push(left_id)
        push(right_id)
    model = FFTreeModel(
        list(nodes.values()), constraints, config, encoding, data.features,
        list(ds_train.sensitive_names))
    logger.info("fitted tree: {} leaves, depth {}, constraints {}".format(
        model.n_leaves, model.depth, [c.key for c in constraints]))
    return model


class AuditReport(ReportMixin):
    def __init__(self, rows):
        self.rows = rows

    @property
    def passed(self):
        return all(row['ok'] for row in self.rows)

    @property
    def failing_nodes(self):
        return sorted(set(row['node'] for row in self.rows if not row['ok']))

    def as_dict(self):
        return {'passed': self.passed, 'failing_nodes': self.failing_nodes,
                'rows': self.rows}

    def table_headers(self):
        return ['node', 'question', 'constraint', 'value', 'delta', 'ok']

    def table_rows(self):
        return [(r['node'], r['question'], r['constraint'], r['value'],
                 r['delta'], 'yes' if r['ok'] else 'NO') for r in self.rows]


def audit_compliance(model, ds_train, tolerance=AUDIT_TOLERANCE):
    """Recompute every constraint at every split on the training rows."""
    ds_train = model.prepare(ds_train)
    reached = model.rows_per_node(ds_train)
    rows = []
    for node_id in model.internal_ids:
        node = model.node(node_id)
        split = SplitCandidate(node['feature'], node['threshold'], 0.0, {},
                               None, node.get('indicator', False))
        question = split.predicate
        for constraint in model.constraints:
            value = local_constraint_value(
                reached[node_id], split, constraint, ds_train,
                model.config.min_group_count)
            ok = value is None or value <= constraint.delta + tolerance
            rows.append({'node': node_id, 'question': question,
                         'constraint': constraint.key, 'value': value,
                         'delta': constraint.delta, 'ok': ok})
    return AuditReport(rows)


def prune(model, node_id):
    """Collapse the subtree under `node_id` into one leaf."""
    if node_id not in model.nodes or \
            model.node(node_id)['kind'] != 'split':
        raise BadNodeId(node_id)
    removed = set(model.subtree(node_id)) - {node_id}
    nodes = [dict(n) for i, n in model.nodes.items() if i not in removed]
    for node in nodes:
        if node['id'] == node_id:
            for key in ('feature', 'threshold', 'indicator', 'left', 'right',
                        'ig', 'constraint_values', 'local_positive_branch'):
                node.pop(key, None)
            node['kind'] = 'leaf'
            node['pos_rate'] = node['pos_weight'] / node['weight'] \
                if node['weight'] > 0 else 0.0
    return FFTreeModel(nodes, model.constraints, model.config,
                       model.encoding, model.features, model.sensitive)


def render_rules(model):
    lines = []
    for leaf_id, conditions, node in model.rules():
        text = ' AND '.join('{} {} {:g}'.format(*c) for c in conditions)
        lines.append('leaf {}: IF {} THEN score {:.4f} (weight {:g})'.format(
            leaf_id, text or 'TRUE', node['pos_rate'], node['weight']))
    return '\n'.join(lines)

