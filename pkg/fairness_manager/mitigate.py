# -*- coding: utf-8 -*-
"""Bias mitigation.

Pre-processing transforms return a new dataset (suppression, fairness
through unawareness, massaging, reweighing, resampling). A logistic score
model gives the scores that post-processing turns into per-group
threshold policies.
"""
from collections import OrderedDict

import numpy as np

from .config import LinearConfig
from .constants import (CDP, DP, EODDS, EOPP, LATENT, POLICY_KINDS,
                        SUPPRESSION_THRESHOLD, THRESHOLD_GRID_CAP)
from .dataset import EncodingMap, save_csv
from .decorators import ensure_supported_kind, time_it, validate_config
from .exceptions import (AllFeaturesDropped, ConfigurationException,
                         EmptyCell, EncodingMismatch,
                         NonBinarySensitive, NonFiniteLoss,
                         ScoreLengthMismatch, UnachievableEpsilon,
                         UndefinedRate, UnknownGroup)
from .log import get_logger
from .mixins import SerializableMixin
from .utils import (config_hash, keyed_uniforms, read_json, sigmoid,
                    write_json)

logger = get_logger(__name__)

SCORE_EPS = 1e-12
# pairs of ROC vertices searched per group for equalized odds
EODDS_GRID_CAP = 128
EODDS_TARGET_CAP = 256


def _binary_codes(ds, sensitive):
    codes = ds.group_codes(sensitive)
    present = np.unique(codes)
    if present.size != 2:
        raise NonBinarySensitive(
            "'{}' must have exactly two groups present, found {}".format(
                sensitive, present.size))
    return codes, present


def _round_half_up(value):
    return int(np.floor(value + 0.5))


# pre-processing


def ftu(ds, sensitive):
    """Hide `sensitive` from the feature view; it stays for evaluation."""
    ds.column_schema(sensitive)
    return ds.with_exposed(sensitive, False)


def _abs_correlation(x, indicator):
    if np.std(x) == 0 or np.std(indicator) == 0:
        return 0.0
    value = np.corrcoef(x, indicator)[0, 1]
    return 0.0 if not np.isfinite(value) else abs(float(value))


def suppress(ds, sensitive, corr_threshold=SUPPRESSION_THRESHOLD,
             fit_rows=None):
    """Drop the sensitive column and every feature whose |Pearson
    correlation| with it exceeds `corr_threshold` on the fitting rows.

    More than two groups are handled one-vs-rest, taking the largest
    correlation over the groups.
    """
    codes = ds.group_codes(sensitive)
    rows = np.arange(ds.n_rows) if fit_rows is None else np.asarray(fit_rows)
    present = np.unique(codes[rows])
    indicators = [(codes[rows] == present[1]).astype(np.float64)] \
        if present.size == 2 else \
        [(codes[rows] == g).astype(np.float64) for g in present]
    features = [n for n in ds.feature_names if not ds.is_sensitive(n)]
    dropped = []
    for name in features:
        x = ds.feature_matrix([name])[rows, 0]
        corr = max(_abs_correlation(x, ind) for ind in indicators)
        if corr > corr_threshold:
            dropped.append(name)
    result = ftu(ds, sensitive)
    if dropped:
        result = result.with_roles(**{name: LATENT for name in dropped})
    logger.info("suppression at {:.2f} dropped {}".format(
        corr_threshold, dropped or 'no features'))
    if len(dropped) == len(features):
        logger.warning(str(AllFeaturesDropped(
            "suppression at {} removed every feature".format(
                corr_threshold))))
    return result, [sensitive] + dropped


def massage(ds, sensitive, ranker_scores):
    """Flip labels until both groups share the overall positive rate.

    The M best-ranked negatives of the deprived group are promoted and the
    M worst-ranked positives of the favoured group demoted, with
    M = round(n_dep * rate - pos_dep).
    """
    codes, present = _binary_codes(ds, sensitive)
    scores = np.asarray(ranker_scores, dtype=np.float64)
    if scores.shape != (ds.n_rows,):
        raise ScoreLengthMismatch(
            "{} ranker scores for {} rows".format(scores.shape[0],
                                                  ds.n_rows))
    y = ds.y.copy()
    rate = float(y.sum()) / y.size
    sizes = [np.count_nonzero(codes == g) for g in present]
    positives = [int(y[codes == g].sum()) for g in present]
    ppr = [p / float(n) for p, n in zip(positives, sizes)]
    dep = 0 if ppr[0] <= ppr[1] else 1
    fav = 1 - dep
    dep_group, fav_group = present[dep], present[fav]
    m = max(_round_half_up(sizes[dep] * rate - positives[dep]), 0)
    index = np.arange(ds.n_rows)
    candidates_up = index[(codes == dep_group) & (y == 0)]
    candidates_down = index[(codes == fav_group) & (y == 1)]
    m = min(m, candidates_up.size, candidates_down.size)
    # highest score first, then lowest row index
    up = candidates_up[np.lexsort((candidates_up,
                                   -scores[candidates_up]))][:m]
    down = candidates_down[np.lexsort((candidates_down,
                                       scores[candidates_down]))][:m]
    y[up] = 1
    y[down] = 0
    labels = ds.classes(sensitive)
    flips = OrderedDict([('promoted', int(m)), ('demoted', int(m)),
                         ('deprived', str(labels[dep_group])),
                         ('favoured', str(labels[fav_group]))])
    logger.info("massaging flipped {} labels each way".format(m))
    return ds.with_target(y), flips


class SampleWeightTable(SerializableMixin):
    def __init__(self, sensitive, weights, classes=()):
        self.sensitive = sensitive
        # (group label, y) -> weight
        self.weights = OrderedDict(weights)
        self.classes = tuple(classes)

    def weight(self, group, label):
        return self.weights[(str(group), int(label))]

    def row_weights(self, ds):
        labels = ds.labels(self.sensitive)
        y = ds.y
        out = np.empty(ds.n_rows)
        for i in range(ds.n_rows):
            key = (str(labels[i]), int(y[i]))
            if key not in self.weights:
                raise UnknownGroup(key)
            out[i] = self.weights[key]
        return out

    def apply(self, ds):
        return ds.with_weights(self.row_weights(ds))

    def as_dict(self):
        return {'sensitive': self.sensitive,
                'weights': [{'group': g, 'label': y, 'weight': w}
                            for (g, y), w in self.weights.items()]}

    @classmethod
    def from_dict(cls, data):
        return cls(data['sensitive'],
                   [((e['group'], int(e['label'])), float(e['weight']))
                    for e in data['weights']])


def _cell_counts(ds, sensitive):
    codes = ds.group_codes(sensitive)
    y = ds.y
    labels = ds.classes(sensitive)
    cells = OrderedDict()
    for g in np.unique(codes):
        for label in (0, 1):
            rows = np.flatnonzero((codes == g) & (y == label))
            if rows.size == 0:
                raise EmptyCell(labels[g], label)
            cells[(g, label)] = rows
    return cells, codes, y


def reweigh(ds, sensitive):
    """w(s,y) = P(s) P(y) / P(s,y) from row counts; the weighted joint of
    group and label then factorizes exactly."""
    cells, codes, y = _cell_counts(ds, sensitive)
    n = float(ds.n_rows)
    labels = ds.classes(sensitive)
    weights = OrderedDict()
    row_weights = np.empty(ds.n_rows)
    for (g, label), rows in cells.items():
        n_s = np.count_nonzero(codes == g)
        n_y = np.count_nonzero(y == label)
        weight = n_s * n_y / (n * rows.size)
        weights[(str(labels[g]), label)] = weight
        row_weights[rows] = weight
    table = SampleWeightTable(sensitive, weights, labels)
    return table, ds.with_weights(row_weights)


def resample(ds, sensitive, seed):
    """Resize every (group, label) cell to round(n P(s) P(y)) rows,
    drawing with replacement only for the extra rows of growing cells."""
    cells, codes, y = _cell_counts(ds, sensitive)
    rng = np.random.default_rng(seed)
    n = float(ds.n_rows)
    kept = []
    for (g, label), rows in cells.items():
        expected = _round_half_up(np.count_nonzero(codes == g) *
                                  np.count_nonzero(y == label) / n)
        if expected <= rows.size:
            kept.append(np.sort(rng.choice(rows, size=expected,
                                           replace=False)))
        else:
            extra = rng.choice(rows, size=expected - rows.size, replace=True)
            kept.append(np.sort(np.concatenate([rows, extra])))
    rows = np.concatenate(kept)
    logger.debug("resampled {} rows into {}".format(ds.n_rows, rows.size))
    return ds.select_rows(rows).with_weights(np.ones(rows.size))


def mitigated_dataset(ds, path, method, params=None, parent=None):
    """Write a transformed dataset with a provenance sidecar."""
    save_csv(ds, path)
    provenance = {'method': method, 'params': params or {},
                  'parent': parent, 'n_rows': ds.n_rows,
                  'weights_sum': float(ds.weights.sum())}
    provenance['hash'] = config_hash(provenance)
    write_json(path + '.json', provenance)
    return path


# score model


class LinearScoreModel(SerializableMixin):
    def __init__(self, coef, intercept, features, mean, scale, config=None,
                 encoding=None, loss_history=()):
        self.coef = np.asarray(coef, dtype=np.float64)
        self.intercept = float(intercept)
        self.features = list(features)
        self.mean = np.asarray(mean, dtype=np.float64)
        self.scale = np.asarray(scale, dtype=np.float64)
        self.config = validate_config(config, LinearConfig)
        self.encoding = encoding
        self.loss_history = list(loss_history)

    def prepare(self, ds):
        missing = [f for f in self.features if not ds.has_column(f)]
        if missing and self.encoding is not None:
            ds = self.encoding.apply(ds)
            missing = [f for f in self.features if not ds.has_column(f)]
        if missing:
            raise EncodingMismatch(
                "dataset lacks model features {}".format(missing[:5]))
        return ds

    def decision_function(self, ds):
        ds = self.prepare(ds)
        Z = (ds.feature_matrix(self.features) - self.mean) / self.scale
        return Z.dot(self.coef) + self.intercept

    def predict_score(self, ds):
        return np.clip(sigmoid(self.decision_function(ds)), SCORE_EPS,
                       1.0 - SCORE_EPS)

    def predict_label(self, ds, tau=0.5):
        return (self.predict_score(ds) > tau).astype(np.int64)

    def as_dict(self):
        return {'kind': 'linear', 'features': self.features,
                'coef': self.coef.tolist(), 'intercept': self.intercept,
                'mean': self.mean.tolist(), 'scale': self.scale.tolist(),
                'config': self.config.as_dict(),
                'encoding': self.encoding.as_dict() if self.encoding
                else None}

    @classmethod
    def from_dict(cls, data):
        encoding = data.get('encoding')
        return cls(data['coef'], data['intercept'], data['features'],
                   data['mean'], data['scale'], LinearConfig(data['config']),
                   EncodingMap.from_dict(encoding) if encoding else None)

    @classmethod
    def from_json(cls, path):
        return cls.from_dict(read_json(path))


def _log_loss(z, y, w):
    # log(1 + e^z) - y z, stable for large |z|
    return float(np.sum(w * (np.logaddexp(0.0, z) - y * z)))


@time_it
def fit_linear_score(ds_train, config=None, features=None, encoding=None):
    """Weighted logistic regression by full-batch gradient descent from
    zero on standardized features."""
    config = validate_config(config, LinearConfig)
    features = list(ds_train.feature_names if features is None
                    else features)
    X = ds_train.feature_matrix(features)
    mean = X.mean(axis=0) if X.size else np.zeros(len(features))
    scale = X.std(axis=0) if X.size else np.ones(len(features))
    scale = np.where(scale > 0, scale, 1.0)
    Z = (X - mean) / scale
    y = ds_train.y.astype(np.float64)
    w = ds_train.weights / ds_train.weights.sum()
    coef = np.zeros(len(features))
    intercept = 0.0
    history = []
    for _ in range(config.iterations):
        z = Z.dot(coef) + intercept
        loss = _log_loss(z, y, w) + 0.5 * config.l2 * coef.dot(coef)
        if not np.isfinite(loss):
            raise NonFiniteLoss(
                "loss diverged after {} iterations".format(len(history)))
        history.append(loss)
        residual = w * (sigmoid(z) - y)
        coef = coef - config.learning_rate * (Z.T.dot(residual) +
                                              config.l2 * coef)
        intercept -= config.learning_rate * residual.sum()
    z = Z.dot(coef) + intercept
    history.append(_log_loss(z, y, w) + 0.5 * config.l2 * coef.dot(coef))
    if not np.isfinite(history[-1]):
        raise NonFiniteLoss("loss diverged")
    logger.info("linear score model on {} features, final loss {:.4f}"
                .format(len(features), history[-1]))
    return LinearScoreModel(coef, intercept, features, mean, scale, config,
                            encoding, history)


# post-processing


class ThresholdPolicy(SerializableMixin):
    """Per-key thresholds; a key is a group label, or `group|stratum` for
    conditional parity. Equalized-odds keys carry a mixture
    (t_lo, t_hi, p): with probability p the lenient t_lo applies."""

    def __init__(self, kind, thresholds=None, mixtures=None, epsilon=0.0,
                 achieved_gap=None, achievable=True, sensitive=None,
                 stratum=None):
        self.kind = kind
        self.thresholds = OrderedDict(thresholds or {})
        self.mixtures = OrderedDict(mixtures or {})
        self.epsilon = float(epsilon)
        self.achieved_gap = achieved_gap
        self.achievable = achievable
        self.sensitive = sensitive
        self.stratum = stratum

    @property
    def keys(self):
        return list(self.mixtures if self.kind == EODDS else self.thresholds)

    def threshold(self, key):
        if key not in self.thresholds:
            raise UnknownGroup(key)
        return self.thresholds[key]

    def as_dict(self):
        return {'kind': self.kind, 'thresholds': self.thresholds,
                'mixtures': OrderedDict(
                    (k, {'t_lo': m[0], 't_hi': m[1], 'p': m[2]})
                    for k, m in self.mixtures.items()),
                'epsilon': self.epsilon, 'achieved_gap': self.achieved_gap,
                'achievable': self.achievable,
                'sensitive': self.sensitive, 'stratum': self.stratum}

    @classmethod
    def from_dict(cls, data):
        mixtures = OrderedDict(
            (k, (m['t_lo'], m['t_hi'], m['p']))
            for k, m in data.get('mixtures', {}).items())
        return cls(data['kind'], data.get('thresholds'), mixtures,
                   data.get('epsilon', 0.0), data.get('achieved_gap'),
                   data.get('achievable', True), data.get('sensitive'),
                   data.get('stratum'))

    @classmethod
    def from_json(cls, path):
        return cls.from_dict(read_json(path))


def _policy_keys(s, stratum=None):
    s = np.asarray([str(v) for v in s], dtype=object)
    if stratum is None:
        return s
    stratum = np.asarray([str(v) for v in stratum], dtype=object)
    return np.asarray(['{}|{}'.format(a, b) for a, b in zip(s, stratum)],
                      dtype=object)


def threshold_grid(scores, cap=THRESHOLD_GRID_CAP):
    """0, the midpoints between distinct scores, and the top score; the
    interior is thinned evenly when it exceeds `cap` points."""
    values = np.unique(np.asarray(scores, dtype=np.float64))
    interior = (values[:-1] + values[1:]) / 2.0
    if interior.size > cap - 2 > 0:
        pick = np.unique(np.linspace(0, interior.size - 1,
                                     cap - 2).round().astype(int))
        interior = interior[pick]
    grid = np.concatenate([[0.0], interior, values[-1:]])
    return np.unique(np.clip(grid, 0.0, 1.0))


def _rates_on_grid(scores, w, grid):
    """Weighted share of rows with score > t for every t of the grid."""
    order = np.argsort(scores, kind='stable')
    sorted_scores = scores[order]
    tail = np.concatenate([np.cumsum(w[order][::-1])[::-1], [0.0]])
    first_above = np.searchsorted(sorted_scores, grid, side='right')
    total = w.sum()
    return tail[first_above] / total if total > 0 else \
        np.zeros(grid.size)


def _accept_rate(scores, w, t):
    total = w.sum()
    return float(w[scores > t].sum() / total) if total > 0 else 0.0


def _group_search(groups, target, epsilon, accuracy=None):
    """Pick one grid index per group.

    groups: list of (grid, rates). Candidate levels are every achievable
    rate; each group takes its closest rate to the level. Gap first: the
    feasible pick (gap <= epsilon) with the best secondary score wins,
    otherwise the smallest gap.
    """
    levels = np.unique(np.concatenate([rates for _, rates in groups]))
    best = None
    for level in levels:
        picks = []
        for grid, rates in groups:
            distance = np.abs(rates - level)
            # closest rate, then the higher threshold
            closest = np.flatnonzero(distance == distance.min())
            picks.append(int(closest[-1]))
        achieved = [groups[g][1][i] for g, i in enumerate(picks)]
        gap = max(achieved) - min(achieved)
        if accuracy is not None:
            secondary = -accuracy(picks)
        else:
            secondary = abs(np.mean(achieved) - target)
        feasible = gap <= epsilon + 1e-12
        key = (not feasible, gap if not feasible else 0.0, secondary)
        if best is None or key < best[0]:
            best = (key, picks)
    return best[1]


def _fit_rate_policy(kind, scores, y, keys, w, epsilon, target_rate):
    present = sorted(set(keys.tolist()))
    groups, members = [], []
    for key in present:
        rows = np.flatnonzero(keys == key)
        if kind == EOPP:
            rows = rows[y[rows] == 1]
            if rows.size == 0:
                raise UndefinedRate(key, 'TPR')
        grid = threshold_grid(scores[rows])
        groups.append((grid, _rates_on_grid(scores[rows], w[rows], grid)))
        members.append(np.flatnonzero(keys == key))
    if target_rate is None:
        base = np.ones(scores.size, dtype=bool) if kind != EOPP else y == 1
        target_rate = _accept_rate(scores[base], w[base], 0.5)

    accuracy = None
    if y is not None:
        def accuracy(picks):
            correct = 0.0
            for (grid, _), rows, i in zip(groups, members, picks):
                yhat = scores[rows] > grid[i]
                correct += w[rows][yhat == (y[rows] == 1)].sum()
            return correct / w.sum()

    picks = _group_search(groups, target_rate, epsilon, accuracy)
    return OrderedDict((key, float(groups[g][0][i]))
                       for g, (key, i) in enumerate(zip(present, picks)))


def _roc_vertices(scores, y, w, key):
    positives, negatives = y == 1, y == 0
    if not positives.any():
        raise UndefinedRate(key, 'TPR')
    if not negatives.any():
        raise UndefinedRate(key, 'FPR')
    grid = threshold_grid(scores, EODDS_GRID_CAP)
    tpr = _rates_on_grid(scores[positives], w[positives], grid)
    fpr = _rates_on_grid(scores[negatives], w[negatives], grid)
    return grid, fpr, tpr, w[positives].sum(), w[negatives].sum()


def _upper_curve(fpr, tpr):
    order = np.lexsort((tpr, fpr))
    f, t = fpr[order], tpr[order]
    keep = np.append(f[1:] != f[:-1], True)
    return f[keep], np.maximum.accumulate(t[keep])


def _closest_mixture(grid, fpr, tpr, f, tau):
    """Two thresholds and a mixing probability whose expected ROC point has
    FPR f and TPR closest to tau."""
    left = fpr <= f
    right = fpr >= f
    i_idx, j_idx = np.flatnonzero(left), np.flatnonzero(right)
    span = fpr[j_idx][None, :] - fpr[i_idx][:, None]
    p = np.where(span > 0, (f - fpr[i_idx][:, None]) /
                 np.where(span > 0, span, 1.0), 0.0)
    chord = tpr[i_idx][:, None] + p * (tpr[j_idx][None, :] -
                                        tpr[i_idx][:, None])
    error = np.abs(chord - tau)
    a, b = np.unravel_index(np.argmin(error), error.shape)
    i, j = i_idx[a], j_idx[b]
    # vertex j is the more lenient rule (lower threshold)
    return (float(grid[j]), float(grid[i]), float(p[a, b])), \
        float(chord[a, b])


def _fit_eodds_policy(scores, y, keys, w, epsilon):
    present = sorted(set(keys.tolist()))
    rocs = OrderedDict()
    for key in present:
        rows = keys == key
        rocs[key] = _roc_vertices(scores[rows], y[rows], w[rows], key)
    targets = np.unique(np.concatenate([r[1] for r in rocs.values()]))
    # every group must reach the target false positive rate
    reach = min(r[1].max() for r in rocs.values())
    targets = targets[targets <= reach]
    if targets.size > EODDS_TARGET_CAP:
        targets = targets[np.unique(np.linspace(
            0, targets.size - 1, EODDS_TARGET_CAP).round().astype(int))]
    curves = {k: _upper_curve(r[1], r[2]) for k, r in rocs.items()}
    total = w.sum()
    best = None
    for f in targets:
        # lower envelope of the group curves at this false positive rate
        tau = min(np.interp(f, *curves[k]) for k in present)
        mixtures, achieved = OrderedDict(), []
        for key in present:
            grid, fpr, tpr, _, _ = rocs[key]
            mixtures[key], hit = _closest_mixture(grid, fpr, tpr, f, tau)
            achieved.append(hit)
        gap = max(achieved) - min(achieved)
        accuracy = sum(p_w * t + n_w * (1.0 - f)
                       for (_, _, _, p_w, n_w), t in
                       zip(rocs.values(), achieved)) / total
        feasible = gap <= epsilon + 1e-12
        key = (not feasible, gap if not feasible else 0.0, -accuracy)
        if best is None or key < best[0]:
            best = (key, mixtures, gap)
    return best[1], best[2]


def _measured_gap(kind, decisions, y, keys, w):
    rates = []
    for key in sorted(set(keys.tolist())):
        rows = keys == key
        if kind == EOPP:
            rows = rows & (y == 1)
        rates.append(_accept_rate(decisions[rows].astype(np.float64),
                                  w[rows], 0.5))
    return max(rates) - min(rates) if len(rates) > 1 else 0.0


@ensure_supported_kind(kinds=POLICY_KINDS)
def fit_threshold_policy(kind, scores, y=None, s=None, stratum=None,
                         epsilon=0.0, w=None, target_rate=None,
                         sensitive=None, stratum_name=None):
    """Group-wise thresholds on `scores` for DP, EOPP, EODDS or CDP.

    `s` and `stratum` are label arrays; policy keys are their string
    forms. The gap is minimized first; among policies within `epsilon`,
    accuracy decides when `y` is given, else closeness to `target_rate`
    (by default the overall acceptance at 0.5).
    """
    scores = np.asarray(scores, dtype=np.float64)
    if np.any((scores < 0) | (scores > 1)):
        raise ConfigurationException("scores must lie in [0,1]")
    n = scores.size
    if s is None or len(s) != n:
        raise ScoreLengthMismatch("one group label per score is required")
    if kind in (EOPP, EODDS) and y is None:
        raise UndefinedRate('*', 'TPR')
    if kind == CDP and stratum is None:
        raise ConfigurationException(
            "conditional parity needs a stratum column")
    y = None if y is None else np.asarray(y).astype(np.int64)
    w = np.ones(n) if w is None else np.asarray(w, dtype=np.float64)
    keys = _policy_keys(s)
    mixtures, thresholds = OrderedDict(), OrderedDict()

    if kind == EODDS:
        mixtures, gap = _fit_eodds_policy(scores, y, keys, w, epsilon)
    elif kind == CDP:
        strata = np.asarray([str(v) for v in stratum], dtype=object)
        gaps = []
        for value in sorted(set(strata.tolist())):
            rows = strata == value
            fitted = _fit_rate_policy(DP, scores[rows],
                                      None if y is None else y[rows],
                                      keys[rows], w[rows], epsilon,
                                      target_rate)
            for group, t in fitted.items():
                thresholds['{}|{}'.format(group, value)] = t
            decisions = scores[rows] > np.array(
                [fitted[k] for k in keys[rows]])
            gaps.append(_measured_gap(DP, decisions, None, keys[rows],
                                      w[rows]))
        gap = max(gaps)
    else:
        thresholds = _fit_rate_policy(kind, scores, y, keys, w, epsilon,
                                      target_rate)
        decisions = scores > np.array([thresholds[k] for k in keys])
        gap = _measured_gap(kind, decisions, y, keys, w)

    achievable = gap <= epsilon + 1e-12
    policy = ThresholdPolicy(kind, thresholds, mixtures, epsilon, float(gap),
                             achievable, sensitive, stratum_name)
    if not achievable:
        logger.warning(str(UnachievableEpsilon(
            "{} policy reaches gap {:.4f} > epsilon {}".format(
                kind, gap, epsilon))))
    else:
        logger.info("{} policy gap {:.4f}".format(kind, gap))
    return policy


def apply_policy(policy, scores, s, stratum=None, seed=None):
    """0/1 decisions 1{score > t_key}; equalized-odds rows draw their rule
    from a seeded uniform keyed on the row's group and score, so the
    decisions follow the rows under any reordering."""
    scores = np.asarray(scores, dtype=np.float64)
    keys = _policy_keys(s, stratum if policy.kind == CDP else None)
    if policy.kind == EODDS:
        for key in set(keys.tolist()):
            if key not in policy.mixtures:
                raise UnknownGroup(key)
        t_lo = np.array([policy.mixtures[k][0] for k in keys])
        t_hi = np.array([policy.mixtures[k][1] for k in keys])
        p = np.array([policy.mixtures[k][2] for k in keys])
        u = keyed_uniforms(scores, keys.tolist(), 0 if seed is None else seed)
        thresholds = np.where(u < p, t_lo, t_hi)
    else:
        thresholds = np.array([policy.threshold(k) for k in keys])
    return (scores > thresholds).astype(np.int64)


def policy_inputs(ds, policy):
    """Group (and stratum) labels of `ds` in the form a policy keys on."""
    s = ds.labels(policy.sensitive)
    stratum = ds.labels(policy.stratum) if policy.stratum else None
    return s, stratum


PREPROCESSORS = ('suppression', 'ftu', 'massaging', 'reweighing',
                 'sampling')
POSTPROCESSORS = OrderedDict([('thresh-dp', DP), ('thresh-eopp', EOPP),
                              ('thresh-eodds', EODDS), ('thresh-cdp', CDP)])


def preprocess(method, ds, sensitive, seed=None, ranker_scores=None,
               corr_threshold=SUPPRESSION_THRESHOLD):
    """Run a pre-processing method by name; returns (dataset, details)."""
    if method == 'suppression':
        result, dropped = suppress(ds, sensitive, corr_threshold)
        return result, {'dropped': dropped}
    if method == 'ftu':
        return ftu(ds, sensitive), {}
    if method == 'massaging':
        return massage(ds, sensitive, ranker_scores)
    if method == 'reweighing':
        table, result = reweigh(ds, sensitive)
        return result, table.as_dict()
    if method == 'sampling':
        return resample(ds, sensitive, seed), {'seed': seed}
    raise ConfigurationException(
        "unknown pre-processing method '{}'".format(method))
