# -*- coding: utf-8 -*-
"""Observational fairness and performance measures.

Every rate is computed from weighted counts. A zero denominator never
becomes a number: it is reported as a `RateFlag` next to the value and
excluded from gaps.
"""
import itertools
from collections import OrderedDict, namedtuple

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import rankdata
from sklearn.metrics import (accuracy_score, f1_score, precision_score,
                             recall_score)

from .constants import (ACC, BASE_RATE_TOLERANCE, CALIBRATION_BINS, DP,
                        EODDS, EOPP, GROUP_KINDS, KNN_DEFAULT, PE, PP,
                        RULE_80, SUFF_NEG)
from .decorators import ensure_supported_kind
from .exceptions import (ConfigurationException, EmptyGroup, LengthMismatch,
                         NonBinarySensitive, TooFewRows)
from .log import get_logger
from .mixins import ReportMixin, SerializableMixin
from .utils import config_hash, fsum

logger = get_logger(__name__)

RateFlag = namedtuple('RateFlag', ['group', 'kind', 'reason'])

# numerator and denominator cells of each per-group rate
RATE_CELLS = {
    DP: (('tp', 'fp'), ('tp', 'fp', 'tn', 'fn')),
    'TPR': (('tp',), ('tp', 'fn')),
    EOPP: (('fn',), ('tp', 'fn')),
    PE: (('fp',), ('fp', 'tn')),
    PP: (('tp',), ('tp', 'fp')),
    SUFF_NEG: (('fn',), ('fn', 'tn')),
    ACC: (('tp', 'tn'), ('tp', 'fp', 'tn', 'fn')),
}


def _check_lengths(*vectors):
    lengths = [len(v) for v in vectors if v is not None]
    if len(set(lengths)) > 1:
        raise LengthMismatch(*lengths)


def _weights(w, n):
    if w is None:
        return np.ones(n)
    return np.asarray(w, dtype=np.float64)


def _groups(s, groups=None):
    s = np.asarray(s)
    present = np.unique(s).tolist()
    if groups is None:
        return present
    for group in groups:
        if group not in present:
            raise EmptyGroup(group)
    return list(groups)


def clamp_scores(scores):
    scores = np.asarray(scores, dtype=np.float64)
    outside = np.count_nonzero((scores < 0) | (scores > 1))
    if outside:
        logger.warning("{} scores outside [0,1] clamped".format(outside))
        scores = np.clip(scores, 0.0, 1.0)
    return scores


class GroupConfusion(SerializableMixin):
    def __init__(self, groups, tp, fp, tn, fn, labels=None):
        self.groups = list(groups)
        self.labels = list(labels) if labels is not None else \
            [str(g) for g in self.groups]
        self.cells = {'tp': np.asarray(tp, dtype=np.float64),
                      'fp': np.asarray(fp, dtype=np.float64),
                      'tn': np.asarray(tn, dtype=np.float64),
                      'fn': np.asarray(fn, dtype=np.float64)}

    def __len__(self):
        return len(self.groups)

    def count(self, cell, index):
        return float(self.cells[cell][index])

    def total(self, index):
        return sum(self.count(c, index) for c in ('tp', 'fp', 'tn', 'fn'))

    def rate(self, index, kind):
        """Per-group rate, or None when its denominator is zero."""
        numerator, denominator = RATE_CELLS[kind]
        den = sum(self.count(c, index) for c in denominator)
        if den <= 0:
            return None
        return sum(self.count(c, index) for c in numerator) / den

    def rates(self, kind):
        return OrderedDict((label, self.rate(i, kind))
                           for i, label in enumerate(self.labels))

    def scaled(self, factor):
        return GroupConfusion(self.groups,
                              *[self.cells[c] * factor
                                for c in ('tp', 'fp', 'tn', 'fn')],
                              labels=self.labels)

    def as_dict(self):
        return OrderedDict(
            (label, {c: self.count(c, i) for c in ('tp', 'fp', 'tn', 'fn')})
            for i, label in enumerate(self.labels))


def group_confusion(y, yhat, s, w=None, groups=None, labels=None):
    y = np.asarray(y)
    yhat = np.asarray(yhat)
    s = np.asarray(s)
    _check_lengths(y, yhat, s, w)
    w = _weights(w, len(y))
    groups = _groups(s, groups)
    cells = {'tp': [], 'fp': [], 'tn': [], 'fn': []}
    for group in groups:
        rows = s == group
        yg, pg, wg = y[rows], yhat[rows], w[rows]
        cells['tp'].append(fsum(wg[(yg == 1) & (pg == 1)]))
        cells['fp'].append(fsum(wg[(yg == 0) & (pg == 1)]))
        cells['tn'].append(fsum(wg[(yg == 0) & (pg == 0)]))
        cells['fn'].append(fsum(wg[(yg == 1) & (pg == 0)]))
    return GroupConfusion(groups, cells['tp'], cells['fp'], cells['tn'],
                          cells['fn'], labels=labels)


class GroupDifference(SerializableMixin):
    def __init__(self, kind, value, rates, flags, signed):
        self.kind = kind
        self.value = value
        self.rates = rates
        self.flags = flags
        self.signed = signed

    @property
    def absolute(self):
        return None if self.value is None else abs(self.value)

    @property
    def defined(self):
        return self.value is not None

    def as_dict(self):
        return {'kind': self.kind, 'value': self.value, 'rates': self.rates,
                'signed': self.signed,
                'flags': [f._asdict() for f in self.flags]}


def _gap(rates, kind):
    """Signed first-minus-second gap for two groups, else the max pairwise
    absolute gap over groups with a defined rate."""
    flags = [RateFlag(label, kind, 'zero denominator')
             for label, value in rates.items() if value is None]
    values = [v for v in rates.values() if v is not None]
    if len(rates) == 2:
        if flags:
            return None, flags, True
        first, second = list(rates.values())
        return first - second, flags, True
    if len(values) < 2:
        return None, flags, False
    gap = max(abs(a - b) for a, b in itertools.combinations(values, 2))
    return gap, flags, False


@ensure_supported_kind(GROUP_KINDS)
def group_metric_difference(kind, confusion):
    if kind == EODDS:
        pe = group_metric_difference(PE, confusion)
        eopp = group_metric_difference(EOPP, confusion)
        flags = pe.flags + eopp.flags
        rates = OrderedDict(
            (label, {'fpr': pe.rates[label], 'fnr': eopp.rates[label]})
            for label in confusion.labels)
        if pe.value is None or eopp.value is None:
            return GroupDifference(kind, None, rates, flags, False)
        return GroupDifference(kind, max(pe.absolute, eopp.absolute), rates,
                               flags, False)
    rates = confusion.rates(kind)
    value, flags, signed = _gap(rates, kind)
    return GroupDifference(kind, value, rates, flags, signed)


def dp_ratio(confusion):
    """Smallest acceptance-rate ratio over ordered pairs of groups."""
    pprs = [v for v in confusion.rates(DP).values() if v is not None]
    if len(pprs) < 2 or min(pprs) <= 0:
        return None
    return min(pprs) / max(pprs)


def eighty_percent_check(confusion):
    ratio = dp_ratio(confusion)
    if ratio is None:
        return {'ratio': None, 'passed': None,
                'flag': 'undefined: a group has zero acceptance'}
    return {'ratio': ratio, 'passed': ratio >= RULE_80, 'flag': None}


def cdp_difference(yhat, s, stratum, w=None):
    """Demographic parity within every stratum of a legitimate variable.

    Returns the stratum-weighted mean of |gap|, the largest |gap| and the
    per-stratum table; strata with fewer than two groups are flagged and
    left out of both aggregates.
    """
    yhat = np.asarray(yhat)
    s = np.asarray(s)
    stratum = np.asarray(stratum)
    _check_lengths(yhat, s, stratum, w)
    w = _weights(w, len(yhat))
    table = OrderedDict()
    for value in np.unique(stratum).tolist():
        rows = stratum == value
        present = np.unique(s[rows]).tolist()
        entry = {'weight': fsum(w[rows]), 'groups': [str(g)
                                                     for g in present]}
        if len(present) < 2:
            entry.update(gap=None, flag='fewer than two groups present')
        else:
            confusion = group_confusion(yhat[rows], yhat[rows], s[rows],
                                        w[rows])
            diff = group_metric_difference(DP, confusion)
            entry.update(gap=diff.value, rates=diff.rates,
                         flag=None if diff.defined else 'undefined rate')
        table[str(value)] = entry
    defined = [e for e in table.values() if e['gap'] is not None]
    if not defined:
        return {'mean': None, 'max': None, 'strata': table}
    total = fsum([e['weight'] for e in defined])
    mean = fsum([e['weight'] / total * abs(e['gap']) for e in defined])
    return {'mean': mean, 'max': max(abs(e['gap']) for e in defined),
            'strata': table}


def standardize(X):
    """Per-column z-scores; constant columns are dropped."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    std = X.std(axis=0)
    keep = std > 0
    return (X[:, keep] - X[:, keep].mean(axis=0)) / std[keep]


def _row_chunks(n, size=512):
    for start in range(0, n, size):
        yield start, min(start + size, n)


def consistency(X, yhat, k=KNN_DEFAULT, scale=True):
    """1 - mean |yhat_i - mean yhat over the k nearest neighbours of i|.

    Euclidean distance, self excluded, ties at the k-th distance broken
    by lowest row index.
    """
    yhat = np.asarray(yhat, dtype=np.float64)
    X = standardize(X) if scale else np.asarray(X, dtype=np.float64)
    n = yhat.shape[0]
    _check_lengths(X, yhat)
    if n <= k:
        raise TooFewRows("consistency needs more than k={} rows".format(k))
    gaps = np.empty(n)
    for start, stop in _row_chunks(n):
        if X.shape[1]:
            distances = cdist(X[start:stop], X)
        else:
            distances = np.zeros((stop - start, n))
        distances[np.arange(stop - start), np.arange(start, stop)] = np.inf
        kth = np.partition(distances, k - 1, axis=1)[:, k - 1:k]
        closer = distances < kth
        ties = distances == kth
        room = k - closer.sum(axis=1, keepdims=True)
        chosen = closer | (ties & (np.cumsum(ties, axis=1) <= room))
        gaps[start:stop] = np.abs(yhat[start:stop] -
                                  chosen.dot(yhat) / k)
    return 1.0 - fsum(gaps) / n


def _binary_groups(s):
    groups = np.unique(s).tolist()
    if len(groups) > 2:
        raise NonBinarySensitive(
            "expected a binary sensitive attribute, found {}".format(groups))
    if len(groups) < 2:
        raise EmptyGroup("second group")
    return groups


def similarity_disparity(X, yhat, s, scale=True):
    """Mean over cross-group pairs of exp(-distance) * |yhat_i - yhat_j|."""
    yhat = np.asarray(yhat, dtype=np.float64)
    s = np.asarray(s)
    X = standardize(X) if scale else np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    _check_lengths(X, yhat, s)
    g0, g1 = _binary_groups(s)
    X0, y0 = X[s == g0], yhat[s == g0]
    X1, y1 = X[s == g1], yhat[s == g1]
    partial = []
    for start, stop in _row_chunks(X1.shape[0]):
        if X.shape[1]:
            similarity = np.exp(-cdist(X1[start:stop], X0))
        else:
            similarity = np.ones((stop - start, X0.shape[0]))
        partial.append(fsum(similarity *
                            np.abs(y1[start:stop, None] - y0[None, :])))
    return fsum(partial) / (X1.shape[0] * X0.shape[0])


def _pairwise_gap(values):
    defined = [v for v in values.values() if v is not None]
    if len(defined) < 2:
        return None
    return max(abs(a - b) for a, b in itertools.combinations(defined, 2))


def score_balance(scores, y, s, cls='positive', w=None, labels=None):
    scores = clamp_scores(scores)
    y = np.asarray(y)
    s = np.asarray(s)
    _check_lengths(scores, y, s, w)
    w = _weights(w, len(y))
    target = 1 if cls == 'positive' else 0
    means, flags = OrderedDict(), []
    for i, group in enumerate(_groups(s)):
        label = labels[i] if labels else str(group)
        rows = (s == group) & (y == target)
        weight = fsum(w[rows])
        if weight <= 0:
            means[label] = None
            flags.append(RateFlag(label, 'balance_' + cls, 'no Y={} rows'
                                  .format(target)))
        else:
            means[label] = fsum(w[rows] * scores[rows]) / weight
    return {'means': means, 'gap': _pairwise_gap(means), 'flags': flags}


class CalibrationCurve(SerializableMixin):
    def __init__(self, edges, groups):
        self.edges = list(edges)
        # label -> list of per-bin dicts (None for empty bins)
        self.groups = groups

    def within_gaps(self):
        gaps = OrderedDict()
        for label, bins in self.groups.items():
            filled = [abs(b['positive_rate'] - b['mean_score'])
                      for b in bins if b is not None]
            gaps[label] = max(filled) if filled else None
        return gaps

    def cross_group_gap(self):
        best = None
        for index in range(len(self.edges) - 1):
            rates = [bins[index]['positive_rate']
                     for bins in self.groups.values()
                     if bins[index] is not None]
            if len(rates) >= 2:
                gap = max(rates) - min(rates)
                best = gap if best is None else max(best, gap)
        return best

    def as_dict(self):
        return {'edges': self.edges, 'groups': self.groups,
                'within_gaps': self.within_gaps(),
                'cross_group_gap': self.cross_group_gap()}


def calibration_within_groups(scores, y, s, bins=CALIBRATION_BINS, w=None,
                              labels=None):
    if bins < 2:
        raise ConfigurationException("calibration needs at least two bins")
    scores = clamp_scores(scores)
    y = np.asarray(y, dtype=np.float64)
    s = np.asarray(s)
    _check_lengths(scores, y, s, w)
    w = _weights(w, len(y))
    edges = np.linspace(0.0, 1.0, bins + 1)
    index = np.minimum((scores * bins).astype(np.int64), bins - 1)
    groups = OrderedDict()
    for i, group in enumerate(_groups(s)):
        label = labels[i] if labels else str(group)
        per_bin = []
        for b in range(bins):
            rows = (s == group) & (index == b)
            weight = fsum(w[rows])
            if weight <= 0:
                per_bin.append(None)
                continue
            per_bin.append({
                'weight': weight,
                'mean_score': fsum(w[rows] * scores[rows]) / weight,
                'positive_rate': fsum(w[rows] * y[rows]) / weight})
        groups[label] = per_bin
    return CalibrationCurve(edges.tolist(), groups)


def rank_auc(scores, y):
    """Mann-Whitney AUC with average ranks for ties; None if one class is
    missing."""
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(y)
    n_pos = int(np.count_nonzero(y == 1))
    n_neg = int(np.count_nonzero(y == 0))
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores, method='average')
    return (fsum(ranks[y == 1]) - n_pos * (n_pos + 1) / 2.0) / \
        (n_pos * n_neg)


def auc_by_group(scores, y, s, labels=None):
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(y)
    s = np.asarray(s)
    _check_lengths(scores, y, s)
    aucs, flags = OrderedDict(), []
    for i, group in enumerate(_groups(s)):
        label = labels[i] if labels else str(group)
        rows = s == group
        aucs[label] = rank_auc(scores[rows], y[rows])
        if aucs[label] is None:
            flags.append(RateFlag(label, 'AUC', 'needs both classes'))
    return {'aucs': aucs, 'gap': _pairwise_gap(aucs), 'flags': flags}


def flip_sensitivity(model, ds, s_column, tau=0.5):
    """Share of rows whose decision changes when only `s_column` flips."""
    if len(ds.classes(s_column)) != 2:
        raise NonBinarySensitive(
            "'{}' must have exactly two classes".format(s_column))
    codes = ds.group_codes(s_column)
    flipped = ds.with_values(s_column, 1 - codes)
    original = np.asarray(model.predict_score(ds)) > tau
    changed = np.asarray(model.predict_score(flipped)) > tau
    return float(np.count_nonzero(original != changed)) / ds.n_rows


def threshold_grid_dp(scores, s, w=None, grid=None):
    """|DP| of thresholded scores at every threshold of a grid (99
    centiles by default)."""
    scores = np.asarray(scores, dtype=np.float64)
    grid = np.arange(1, 100) / 100.0 if grid is None else grid
    rows = []
    for tau in grid:
        yhat = (scores > tau).astype(np.int64)
        confusion = group_confusion(yhat, yhat, s, w)
        diff = group_metric_difference(DP, confusion)
        rows.append((float(tau), diff.absolute))
    return rows


class IncompatibilityReport(ReportMixin):
    PROPOSITIONS = (
        (('independence', 'separation'),
         "separation and independence are incompatible when Y is binary, "
         "A and Y are dependent and the decision is not independent of Y"),
        (('independence', 'sufficiency'),
         "sufficiency and independence cannot hold simultaneously when A "
         "and Y are dependent"),
        (('separation', 'sufficiency'),
         "separation and sufficiency are incompatible when A and Y are "
         "dependent, assuming every event of the joint distribution of "
         "(A, score, Y) has positive probability (not verified here)"),
    )

    def __init__(self, base_rates, findings):
        self.base_rates = base_rates
        self.findings = findings

    @property
    def base_rate_gap(self):
        return _pairwise_gap(self.base_rates)

    def as_dict(self):
        return {'base_rates': self.base_rates,
                'base_rate_gap': self.base_rate_gap,
                'perfect_predictor_dp': self.base_rate_gap,
                'findings': self.findings}

    def table_headers(self):
        return ['criteria', 'jointly satisfiable', 'reason']

    def table_rows(self):
        return [(' / '.join(f['pair']), 'yes' if f['satisfiable'] else 'no',
                 f['reason']) for f in self.findings]


def incompatibility_report(y, s, w=None, tolerance=BASE_RATE_TOLERANCE,
                           labels=None):
    y = np.asarray(y, dtype=np.float64)
    s = np.asarray(s)
    _check_lengths(y, s, w)
    w = _weights(w, len(y))
    base_rates = OrderedDict()
    for i, group in enumerate(_groups(s)):
        rows = s == group
        label = labels[i] if labels else str(group)
        base_rates[label] = fsum(w[rows] * y[rows]) / fsum(w[rows])
    gap = _pairwise_gap(base_rates) or 0.0
    dependent = gap > tolerance
    findings = []
    for pair, text in IncompatibilityReport.PROPOSITIONS:
        if dependent:
            reason = "base rates differ by {:.4f}: {}".format(gap, text)
        else:
            reason = "equal base rates: no proposition applies"
        findings.append({'pair': list(pair), 'satisfiable': not dependent,
                         'reason': reason})
    return IncompatibilityReport(base_rates, findings)


def performance_summary(y, yhat, scores=None, w=None):
    y = np.asarray(y).astype(np.int64)
    yhat = np.asarray(yhat).astype(np.int64)
    w = _weights(w, len(y))
    summary = OrderedDict([
        ('accuracy', accuracy_score(y, yhat, sample_weight=w)),
        ('f1', f1_score(y, yhat, sample_weight=w, zero_division=0)),
        ('precision', precision_score(y, yhat, sample_weight=w,
                                      zero_division=0)),
        ('recall', recall_score(y, yhat, sample_weight=w,
                                zero_division=0)),
        ('auc', rank_auc(scores, y) if scores is not None else None),
    ])
    return OrderedDict((k, None if v is None else float(v))
                       for k, v in summary.items())


class MetricsReport(ReportMixin):
    def __init__(self, values, groups=None, flags=None, metadata=None,
                 performance=None):
        self.values = OrderedDict(values)
        self.groups = groups or OrderedDict()
        self.flags = flags or []
        self.metadata = metadata or {}
        self.performance = performance or OrderedDict()

    def get(self, key):
        if key in self.values:
            return self.values[key]
        return self.performance.get(key)

    def has(self, key):
        return key in self.values or key in self.performance

    def as_dict(self):
        return {'metrics': self.values, 'performance': self.performance,
                'groups': self.groups,
                'flags': [f._asdict() if hasattr(f, '_asdict') else f
                          for f in self.flags],
                'metadata': self.metadata}

    @classmethod
    def from_dict(cls, data):
        flags = [RateFlag(**f) if set(f) == set(RateFlag._fields) else f
                 for f in data.get('flags', [])]
        return cls(data.get('metrics', {}), data.get('groups'), flags,
                   data.get('metadata'), data.get('performance'))

    def table_headers(self):
        return ['metric', 'value']

    def table_rows(self):
        rows = [(key, value) for key, value in self.values.items()]
        rows += [(key, value) for key, value in self.performance.items()]
        return rows

    def footer_lines(self):
        lines = []
        for key, per_group in self.groups.items():
            parts = ', '.join('{}={}'.format(
                label, '-' if v is None else
                ('{:.4f}'.format(v) if isinstance(v, float) else v))
                for label, v in per_group.items())
            lines.append('{}: {}'.format(key, parts))
        for flag in self.flags:
            lines.append('flag: {}'.format(flag))
        return lines


def evaluate(ds, yhat, scores=None, sensitive=None, stratum=None, y=None,
             model=None, tau=0.5, k=KNN_DEFAULT, individual=True,
             dataset_id=None, model_id=None, config=None):
    """Full metric suite of decisions `yhat` (and optional scores) on ds.

    `y` defaults to the dataset target; pass a latent column to measure
    against the true label instead of the observed one.
    """
    sensitive = sensitive or ds.sensitive_names[0]
    y = ds.y if y is None else np.asarray(y).astype(np.int64)
    yhat = np.asarray(yhat).astype(np.int64)
    w = ds.weights
    s = ds.group_codes(sensitive)
    labels = [str(c) for c in ds.classes(sensitive)]
    labels = [labels[g] for g in np.unique(s)]
    values, groups, flags = OrderedDict(), OrderedDict(), []

    confusion = group_confusion(y, yhat, s, w, labels=labels)
    for kind, key in ((DP, 'dp_diff'), (EOPP, 'eopp_diff'), (PE, 'pe_diff'),
                      (EODDS, 'eodds_diff'), (PP, 'pp_diff'),
                      (SUFF_NEG, 'suff_neg_diff'), (ACC, 'acc_diff')):
        diff = group_metric_difference(kind, confusion)
        values[key] = diff.value
        groups[key] = diff.rates
        flags.extend(diff.flags)
    values['dp_ratio'] = dp_ratio(confusion)
    rule = eighty_percent_check(confusion)
    values['rule_80_ratio'] = rule['ratio']

    if stratum is not None:
        cdp = cdp_difference(yhat, s, ds.group_codes(stratum), w)
        values['cdp_mean'], values['cdp_max'] = cdp['mean'], cdp['max']
        groups['cdp_strata'] = OrderedDict(
            (key, entry['gap']) for key, entry in cdp['strata'].items())

    features = [n for n in ds.feature_names if not ds.is_sensitive(n)]
    if individual and features:
        X = ds.feature_matrix(features)
        values['consistency'] = consistency(X, yhat, k)
        if len(labels) == 2:
            values['similarity_disparity'] = similarity_disparity(X, yhat, s)

    if scores is not None:
        scores = clamp_scores(scores)
        for cls, key in (('positive', 'balance_pos_gap'),
                         ('negative', 'balance_neg_gap')):
            balance = score_balance(scores, y, s, cls, w, labels)
            values[key] = balance['gap']
            groups[key] = balance['means']
            flags.extend(balance['flags'])
        curve = calibration_within_groups(scores, y, s, w=w, labels=labels)
        gaps = [g for g in curve.within_gaps().values() if g is not None]
        values['calibration_gap'] = max(gaps) if gaps else None
        groups['calibration_gap'] = curve.within_gaps()
        values['auc'] = rank_auc(scores, y)
        aucs = auc_by_group(scores, y, s, labels)
        values['auc_gap'] = aucs['gap']
        groups['auc'] = aucs['aucs']
        flags.extend(aucs['flags'])

    if model is not None and len(labels) == 2:
        values['flip_sensitivity'] = flip_sensitivity(model, ds, sensitive,
                                                      tau)

    metadata = {'dataset_id': dataset_id or ds.name,
                'model_id': model_id, 'sensitive': sensitive,
                'stratum': stratum, 'tau': tau, 'n_rows': ds.n_rows,
                'distance': 'euclidean on per-column z-scores', 'k': k}
    if config is not None:
        metadata['config_hash'] = config_hash(config)
    performance = performance_summary(y, yhat, scores, w)
    return MetricsReport(values, groups, flags, metadata, performance)
