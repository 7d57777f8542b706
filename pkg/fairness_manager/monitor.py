# -*- coding: utf-8 -*-
"""Fairness over time.

Evaluate a model across temporal slices and shocked copies of a slice,
retrain a group-mitigated model on the labels of an individually fair
one, and attribute scores to features with exact interventional Shapley
values to see how the weight of the sensitive feature moves between
model generations.
"""
import re
from collections import OrderedDict
from math import factorial

import numpy as np

from .biasgen import inject_score_bias
from .constants import DP, MONITOR_DEFAULTS, NUMERIC, SHAPLEY_TOLERANCE
from .exceptions import (ConfigurationException, EmptyBackground,
                         NonNumericColumn, NotIndividuallyFair,
                         TooManyFeatures, UnknownClass, ViewMismatch)
from .log import get_logger
from .metrics import (flip_sensitivity, group_confusion,
                      group_metric_difference, performance_summary)
from .mitigate import (apply_policy, fit_linear_score, fit_threshold_policy,
                       policy_inputs)
from .mixins import ReportMixin, SerializableMixin

logger = get_logger(__name__)

_SHOCK = re.compile(r'^(?P<column>[^:]+):(?P<sign>[+-])(?P<magnitude>[0-9.]+)'
                    r'sd(?::(?P<group>.+))?$')


class ShockSpec(SerializableMixin):
    def __init__(self, column, magnitude, sign='positive', scope='overall',
                 group=None, sensitive=None):
        if not magnitude > 0:
            raise ConfigurationException("shock magnitude must be > 0")
        if sign not in ('positive', 'negative'):
            raise ConfigurationException(
                "shock sign must be positive or negative")
        if scope not in ('overall', 'conditioned'):
            raise ConfigurationException(
                "shock scope must be overall or conditioned")
        if scope == 'conditioned' and group is None:
            raise ConfigurationException("a conditioned shock names a class")
        self.column = column
        self.magnitude = float(magnitude)
        self.sign = sign
        self.scope = scope
        self.group = group
        self.sensitive = sensitive

    @classmethod
    def parse(cls, text, sensitive=None):
        """`column:+1.0sd` or `column:-0.5sd:class`."""
        match = _SHOCK.match(text)
        if not match:
            raise ConfigurationException(
                "shock '{}' is not column:+Xsd[:class]".format(text))
        group = match.group('group')
        return cls(match.group('column'), float(match.group('magnitude')),
                   'positive' if match.group('sign') == '+' else 'negative',
                   'conditioned' if group else 'overall', group, sensitive)

    @property
    def label(self):
        text = '{}{}{:g}sd'.format(self.column,
                                   '+' if self.sign == 'positive' else '-',
                                   self.magnitude)
        if self.scope == 'conditioned':
            text += '|{}={}'.format(self.sensitive or 'group', self.group)
        return text

    def as_dict(self):
        return {'column': self.column, 'magnitude': self.magnitude,
                'sign': self.sign, 'scope': self.scope, 'group': self.group,
                'sensitive': self.sensitive}


def apply_shock(ds, spec, reference=None):
    """Shift a raw numeric column by sign * magnitude standard deviations
    of the reference slice; conditioned shocks touch one class only."""
    column = ds.column_schema(spec.column)
    if column.kind != NUMERIC:
        raise NonNumericColumn(
            "cannot shock categorical column '{}'".format(spec.column))
    reference = ds if reference is None else reference
    sigma = float(np.std(reference.column(spec.column)))
    shift = (1.0 if spec.sign == 'positive' else -1.0) * spec.magnitude * \
        sigma
    values = ds.column(spec.column)
    if spec.scope == 'overall':
        affected = np.ones(ds.n_rows, dtype=bool)
    else:
        sensitive = spec.sensitive or ds.sensitive_names[0]
        classes = [str(c) for c in ds.classes(sensitive)]
        if str(spec.group) not in classes:
            raise UnknownClass(
                "'{}' is not a class of '{}'".format(spec.group, sensitive))
        affected = ds.group_codes(sensitive) == classes.index(str(spec.group))
    shocked = np.where(affected, values + shift, values)
    logger.debug("shock {} moved {} rows by {:.4f}".format(
        spec.label, int(affected.sum()), shift))
    return ds.with_values(spec.column, shocked)


class DriftReport(ReportMixin):
    def __init__(self, rows=None, fair_dp=MONITOR_DEFAULTS.fair_dp,
                 unfair_dp=MONITOR_DEFAULTS.unfair_dp):
        self.rows = list(rows or [])
        self.fair_dp = fair_dp
        self.unfair_dp = unfair_dp

    def _flag(self, dp):
        if dp is None:
            return 'undefined'
        if abs(dp) < self.fair_dp:
            return 'fair'
        if abs(dp) > self.unfair_dp:
            return 'unfair'
        return ''

    def add(self, model_id, context, dp, accuracy=None, auc=None):
        if any(r['model_id'] == model_id and r['context'] == context
               for r in self.rows):
            raise ConfigurationException(
                "model '{}' already has context '{}'".format(model_id,
                                                             context))
        self.rows.append(OrderedDict([
            ('model_id', model_id), ('context', context), ('dp', dp),
            ('accuracy', accuracy), ('auc', auc),
            ('flag', self._flag(dp))]))

    def extend(self, other):
        for row in other.rows:
            self.add(row['model_id'], row['context'], row['dp'],
                     row['accuracy'], row['auc'])
        return self

    def value(self, model_id, context, key='dp'):
        for row in self.rows:
            if row['model_id'] == model_id and row['context'] == context:
                return row[key]
        raise KeyError((model_id, context))

    def as_dict(self):
        return {'fair_dp': self.fair_dp, 'unfair_dp': self.unfair_dp,
                'rows': self.rows}

    def table_headers(self):
        return ['model', 'context', 'dp', 'accuracy', 'auc', 'flag']

    def table_rows(self):
        out = []
        for r in self.rows:
            dp = '-' if r['dp'] is None else '{:.4f}'.format(r['dp'])
            if r['flag'] == 'fair':
                dp = '*{}*'.format(dp)
            elif r['flag'] == 'unfair':
                dp = '_{}_'.format(dp)
            out.append((r['model_id'], r['context'], dp, r['accuracy'],
                        r['auc'], r['flag']))
        return out


def _slice_items(slices):
    if isinstance(slices, dict):
        return list(slices.items())
    return [(getattr(ds, 'name', None) or 'slice-{}'.format(i), ds)
            for i, ds in enumerate(slices)]


def evaluate_over_slices(model, slices, sensitive, tau=0.5, model_id='model',
                         y_column=None, report=None):
    """Signed DP, accuracy and AUC of `model` on each slice.

    `y_column` measures performance against another column (e.g. a latent
    true label) instead of the target.
    """
    report = DriftReport() if report is None else report
    for context, ds in _slice_items(slices):
        yhat = model.predict_label(ds, tau)
        scores = model.predict_score(ds)
        y = ds.y if y_column is None else \
            ds.column(y_column).astype(np.int64)
        s = ds.group_codes(sensitive)
        confusion = group_confusion(y, yhat, s, ds.weights)
        dp = group_metric_difference(DP, confusion).value
        summary = performance_summary(y, yhat, scores, ds.weights)
        report.add(model_id, context, dp, summary['accuracy'],
                   summary['auc'])
    return report


class GroupPolicyModel(SerializableMixin):
    """A score model followed by per-group thresholds, seen as one score.

    score = base score - (t_group - 0.5), so thresholding at 0.5 gives the
    policy's decisions and the group threshold becomes an attribution of
    the sensitive feature.
    """

    def __init__(self, score_model, policy, sensitive):
        self.score_model = score_model
        self.policy = policy
        self.sensitive = sensitive
        self.features = list(score_model.features)
        if sensitive not in self.features:
            self.features.append(sensitive)

    def _thresholds(self, ds):
        s, stratum = policy_inputs(ds, self.policy)
        keys = [str(v) for v in s] if stratum is None else \
            ['{}|{}'.format(a, b) for a, b in zip(s, stratum)]
        if self.policy.mixtures:
            return np.array([self.policy.mixtures[k][2] *
                             self.policy.mixtures[k][0] +
                             (1 - self.policy.mixtures[k][2]) *
                             self.policy.mixtures[k][1] for k in keys])
        return np.array([self.policy.threshold(k) for k in keys])

    def predict_score(self, ds):
        return self.score_model.predict_score(ds) - \
            (self._thresholds(ds) - 0.5)

    def predict_label(self, ds, tau=0.5, seed=None):
        """Policy decisions; `tau` is unused since the policy carries its
        own thresholds."""
        s, stratum = policy_inputs(ds, self.policy)
        return apply_policy(self.policy, self.score_model.predict_score(ds),
                            s, stratum, seed)

    def as_dict(self):
        return {'kind': 'group-policy', 'sensitive': self.sensitive,
                'score_model': self.score_model.as_dict(),
                'policy': self.policy.as_dict()}


class ScoreBiasModel(SerializableMixin):
    """A model whose scores for members of `group` drop by `beta`.

    Stands for algorithmic bias when the learner itself is wrapped and
    for deployment bias when a finished model is. A wrapped threshold
    policy keeps its own thresholds and sees the lowered scores.
    """

    def __init__(self, model, beta, sensitive, group='1'):
        self.model = model
        self.beta = float(beta)
        self.sensitive = sensitive
        self.group = str(group)
        self.features = list(model.features)

    def _members(self, ds):
        return (np.asarray([str(v) for v in ds.labels(self.sensitive)]) ==
                self.group).astype(np.float64)

    def _lowered(self, scores, ds):
        return inject_score_bias(scores, self._members(ds), self.beta)

    def predict_score(self, ds):
        return np.clip(self._lowered(self.model.predict_score(ds), ds),
                       0.0, 1.0)

    def predict_label(self, ds, tau=0.5, seed=None):
        policy = getattr(self.model, 'policy', None)
        if policy is None:
            return (self.predict_score(ds) > tau).astype(np.int64)
        s, stratum = policy_inputs(ds, policy)
        scores = np.clip(self._lowered(
            self.model.score_model.predict_score(ds), ds), 0.0, 1.0)
        return apply_policy(policy, scores, s, stratum, seed)

    def as_dict(self):
        return {'kind': 'score-bias', 'beta': self.beta,
                'sensitive': self.sensitive, 'group': self.group,
                'model': self.model.as_dict()}


def fit_group_model(ds, sensitive, kind=DP, epsilon=0.0, linear=None,
                    expose=True):
    """Score model on `ds` (sensitive exposed) plus a group threshold
    policy fitted against the dataset's own target."""
    view = ds.with_exposed(sensitive, expose)
    score_model = fit_linear_score(view, linear)
    scores = score_model.predict_score(view)
    policy = fit_threshold_policy(kind, scores, view.y,
                                  view.labels(sensitive), epsilon=epsilon,
                                  w=view.weights, sensitive=sensitive)
    return GroupPolicyModel(score_model, policy, sensitive)


def surrogate_targets(individual_model, new_slice, sensitive, tau=0.5):
    """Decisions of an individually fair model on a new slice."""
    flips = flip_sensitivity(individual_model, new_slice, sensitive, tau)
    if flips > 0:
        raise NotIndividuallyFair(
            "the model changes {:.2%} of decisions when '{}' flips".format(
                flips, sensitive))
    return individual_model.predict_label(new_slice, tau)


def retrain_on_surrogate(individual_model, new_slice, sensitive, tau=0.5,
                         kind=DP, epsilon=0.0, linear=None):
    """Next-period group model trained on surrogate targets."""
    targets = surrogate_targets(individual_model, new_slice, sensitive, tau)
    logger.info("surrogate targets: {:.3f} positive".format(
        float(np.mean(targets))))
    return fit_group_model(new_slice.with_target(targets), sensitive, kind,
                           epsilon, linear)


class ShapleyAttribution(SerializableMixin):
    def __init__(self, features, values, baseline, score):
        self.features = list(features)
        self.values = np.asarray(values, dtype=np.float64)
        self.baseline = float(baseline)
        self.score = float(score)

    @property
    def efficiency_gap(self):
        return abs(float(self.values.sum()) - (self.score - self.baseline))

    def value(self, feature):
        return float(self.values[self.features.index(feature)])

    def as_dict(self):
        return {'features': self.features, 'values': self.values.tolist(),
                'baseline': self.baseline, 'score': self.score}


def _coalition_values(f, instance, background, d):
    n_masks = 1 << d
    bits = (np.arange(n_masks)[:, None] >> np.arange(d)[None, :]) & 1
    values = np.empty(n_masks)
    m = background.shape[0]
    # bound the hybrid block to about a million cells per call
    chunk = max(1, 1000000 // max(1, m * d))
    for start in range(0, n_masks, chunk):
        masks = bits[start:start + chunk].astype(bool)
        hybrid = np.where(masks[:, None, :], instance[None, None, :],
                          background[None, :, :])
        scores = np.asarray(f(hybrid.reshape(-1, d)), dtype=np.float64)
        values[start:start + masks.shape[0]] = scores.reshape(
            masks.shape[0], m).mean(axis=1)
    return values, bits


def shapley_exact(f, instance, background, features=None,
                  max_features=MONITOR_DEFAULTS.max_features):
    """Interventional Shapley values by enumerating every coalition.

    `f` maps an (rows, d) array to scores. The value of a coalition is the
    mean score over background rows with the coalition's columns taken
    from the instance.
    """
    instance = np.asarray(instance, dtype=np.float64).ravel()
    background = np.atleast_2d(np.asarray(background, dtype=np.float64))
    d = instance.size
    features = features or ['x{}'.format(i) for i in range(d)]
    if d > max_features:
        raise TooManyFeatures(
            "{} features, exact enumeration stops at {}".format(
                d, max_features))
    if background.shape[0] == 0:
        raise EmptyBackground("background has no rows")
    values, bits = _coalition_values(f, instance, background, d)
    size = bits.sum(axis=1)
    weights = np.array([factorial(k) * factorial(d - k - 1)
                        for k in range(d)], dtype=np.float64) / factorial(d)
    phi = np.zeros(d)
    masks = np.arange(1 << d)
    for i in range(d):
        without = masks[bits[:, i] == 0]
        phi[i] = np.sum(weights[size[without]] *
                        (values[without | (1 << i)] - values[without]))
    attribution = ShapleyAttribution(features, phi, values[0], values[-1])
    if attribution.efficiency_gap > SHAPLEY_TOLERANCE * max(
            1.0, abs(attribution.score)):
        logger.warning("shapley efficiency gap {:.2e}".format(
            attribution.efficiency_gap))
    return attribution


def score_function(model, ds, features):
    """Wrap `model.predict_score` as a function of feature arrays, with
    every other column taken from the first row of `ds`."""
    def f(X):
        X = np.atleast_2d(X)
        rows = ds.select_rows(np.zeros(X.shape[0], dtype=np.int64))
        for j, name in enumerate(features):
            rows = rows.with_values(name, X[:, j])
        return model.predict_score(rows)
    return f


def _sample_rows(n_rows, size, rng):
    return np.sort(rng.choice(n_rows, size=min(size, n_rows), replace=False))


def _rngs(seed):
    children = np.random.SeedSequence(seed).spawn(2)
    return [np.random.default_rng(c) for c in children]


def mean_attributions(model, ds, features, background_n, sample_n, seed):
    """Per-row Shapley values over a seeded sample of `ds`."""
    bg_rng, sample_rng = _rngs(seed)
    X = ds.feature_matrix(features)
    background = X[_sample_rows(ds.n_rows, background_n, bg_rng)]
    rows = _sample_rows(ds.n_rows, sample_n, sample_rng)
    f = score_function(model, ds, features)
    phis = np.array([shapley_exact(f, X[r], background, features).values
                     for r in rows])
    return rows, phis


def most_important_feature(model, ds, background_n=None, sample_n=None,
                           seed=0, features=None):
    """Feature with the largest mean |phi|, ties by name."""
    features = list(features or model.features)
    background_n = background_n or MONITOR_DEFAULTS.background_n
    sample_n = sample_n or MONITOR_DEFAULTS.sample_n
    _, phis = mean_attributions(model, ds, features, background_n, sample_n,
                                seed)
    importance = np.abs(phis).mean(axis=0)
    return min(zip(features, importance), key=lambda p: (-p[1], p[0]))[0]


class ShapleyDeltaReport(ReportMixin):
    def __init__(self, sensitive, deprived, rows, status, delta_sensitive):
        self.sensitive = sensitive
        self.deprived = deprived
        self.rows = rows
        self.status = status
        self.delta_sensitive = delta_sensitive

    def delta(self, feature, scope='all'):
        for row in self.rows:
            if row['feature'] == feature:
                return row['delta'] if scope == 'all' else \
                    row['delta_deprived']
        raise KeyError(feature)

    def as_dict(self):
        return {'sensitive': self.sensitive, 'deprived': self.deprived,
                'status': self.status,
                'delta_sensitive_deprived': self.delta_sensitive,
                'rows': self.rows}

    def table_headers(self):
        return ['feature', 'phi_1', 'phi_2', 'delta', 'delta_deprived']

    def table_rows(self):
        return [('*{}*'.format(r['feature'])
                 if r['feature'] == self.sensitive else r['feature'],
                 r['mean_1'], r['mean_2'], r['delta'], r['delta_deprived'])
                for r in self.rows]

    def footer_lines(self):
        return ['deprived class {}={}: {} (delta {:.4f})'.format(
            self.sensitive, self.deprived, self.status,
            self.delta_sensitive)]


def _deprived_class(ds, sensitive):
    """Class with the lowest weighted positive rate of the target."""
    y, w = ds.y, ds.weights
    codes = ds.group_codes(sensitive)
    rates = []
    for g in np.unique(codes):
        members = codes == g
        rates.append((float((y * w)[members].sum() / w[members].sum()),
                      int(g)))
    return str(ds.classes(sensitive)[min(rates)[1]])


def group_delta_shapley(model_1, model_2, ds, sensitive, background_n=None,
                        sample_n=None, seed=0, deprived=None,
                        stagnation=MONITOR_DEFAULTS.stagnation):
    """Mean Shapley values of two models on the same rows and their
    difference; the move of the sensitive feature on the deprived class
    reads as decline (up), long-term improvement (down) or stagnation."""
    features = list(model_1.features)
    if sorted(features) != sorted(model_2.features):
        raise ViewMismatch("the models read different features")
    if sensitive not in features:
        raise ViewMismatch(
            "the models do not read '{}'; nothing to monitor".format(
                sensitive))
    background_n = background_n or MONITOR_DEFAULTS.background_n
    sample_n = sample_n or MONITOR_DEFAULTS.sample_n
    rows, phi_1 = mean_attributions(model_1, ds, features, background_n,
                                    sample_n, seed)
    _, phi_2 = mean_attributions(model_2, ds, features, background_n,
                                 sample_n, seed)
    deprived = str(deprived) if deprived is not None else \
        _deprived_class(ds, sensitive)
    labels = np.asarray([str(v) for v in ds.labels(sensitive)[rows]])
    on_deprived = labels == deprived
    out = []
    for j, feature in enumerate(features):
        mean_1, mean_2 = float(phi_1[:, j].mean()), float(phi_2[:, j].mean())
        dep = float(phi_2[on_deprived, j].mean() - phi_1[on_deprived, j]
                    .mean()) if on_deprived.any() else None
        out.append(OrderedDict([('feature', feature), ('mean_1', mean_1),
                                ('mean_2', mean_2),
                                ('delta', mean_2 - mean_1),
                                ('delta_deprived', dep)]))
    delta = [r['delta_deprived'] for r in out
             if r['feature'] == sensitive][0]
    if delta is None or abs(delta) <= stagnation:
        status = 'stagnation'
    elif delta > 0:
        status = 'decline'
    else:
        status = 'long-term improvement'
    logger.info("sensitive attribution on {}={} moved {}: {}".format(
        sensitive, deprived, delta, status))
    return ShapleyDeltaReport(sensitive, deprived, out, status,
                              0.0 if delta is None else delta)
