# -*- coding: utf-8 -*-
"""Worldview evidence from per-group decision rules.

One surrogate tree is grown inside each sensitive class; its positive
leaves become rules. Every rule is then applied to every class: when the
positive rate among the rows a rule admits barely moves across classes,
the data looks like what you see is what you get (WYSIWYG); a large move
points at a world where groups are equal but were measured differently
(WAE).
"""
from collections import OrderedDict

import numpy as np

from . import fftree
from .config import SurrogateConfig
from .constants import WORLDVIEW_DEFAULTS
from .decorators import validate_config
from .exceptions import (ConfigurationException, GroupTooSmall,
                         UnknownColumn)
from .log import get_logger
from .metrics import performance_summary
from .mixins import ReportMixin, SerializableMixin

logger = get_logger(__name__)

WYSIWYG = 'WYSIWYG'
WAE = 'WAE'
UNDEFINED = 'undefined'

_OPS = {
    '==': lambda x, v: x == v,
    '<=': lambda x, v: x <= v,
    '>': lambda x, v: x > v,
}


class DecisionRule(SerializableMixin):
    def __init__(self, origin, conditions, leaf_id, support, pos_rate):
        self.origin = origin
        # (column, op, value)
        self.conditions = [tuple(c) for c in conditions]
        self.leaf_id = leaf_id
        self.support = float(support)
        self.pos_rate = float(pos_rate)

    @property
    def rule_id(self):
        return '{}#{}'.format(self.origin, self.leaf_id)

    def mask(self, ds):
        keep = np.ones(ds.n_rows, dtype=bool)
        for column, op, value in self.conditions:
            if not ds.has_column(column):
                raise UnknownColumn(
                    "rule {} tests '{}' which the dataset lacks".format(
                        self.rule_id, column))
            keep &= _OPS[op](ds.feature_matrix([column])[:, 0], value)
        return keep

    def text(self):
        if not self.conditions:
            return 'TRUE'
        return ' AND '.join('{} {} {:g}'.format(*c) for c in self.conditions)

    def as_dict(self):
        return {'origin': self.origin, 'leaf_id': self.leaf_id,
                'conditions': [list(c) for c in self.conditions],
                'support': self.support, 'pos_rate': self.pos_rate}


class GroupSurrogate(SerializableMixin):
    def __init__(self, group, model, rules, quality):
        self.group = group
        self.model = model
        self.rules = rules
        self.quality = quality

    def as_dict(self):
        return {'group': self.group, 'n_leaves': self.model.n_leaves,
                'rules': [r.as_dict() for r in self.rules],
                'quality': self.quality}


def trace(ds, sensitive, surrogate_config=None, positive_only=True):
    """Fit an unconstrained surrogate tree inside each sensitive class.

    Returns a label -> GroupSurrogate map. With `positive_only` off every
    leaf becomes a rule, not only those deciding positively.
    """
    config = validate_config(surrogate_config, SurrogateConfig)
    codes = ds.group_codes(sensitive)
    labels = ds.classes(sensitive)
    surrogates = OrderedDict()
    for g in np.unique(codes):
        label = str(labels[g])
        rows = np.flatnonzero(codes == g)
        if rows.size < config.min_rows:
            raise GroupTooSmall(
                "class '{}' of '{}' has {} rows, {} needed".format(
                    label, sensitive, rows.size, config.min_rows))
        subset = ds.select_rows(rows)
        model = fftree.fit(subset, (), config.growth(rows.size))
        rules = [DecisionRule(label, conditions, leaf_id, node['weight'],
                              node['pos_rate'])
                 for leaf_id, conditions, node in model.rules()
                 if not positive_only or node['pos_rate'] > 0.5]
        yhat = model.predict_label(subset)
        summary = performance_summary(subset.y, yhat, w=subset.weights)
        quality = OrderedDict([('accuracy', summary['accuracy']),
                               ('f1', summary['f1']),
                               ('n_rows', int(rows.size))])
        if quality['accuracy'] < WORLDVIEW_DEFAULTS.weak_accuracy:
            logger.warning(
                "surrogate of class '{}' is weak (accuracy {:.3f})".format(
                    label, quality['accuracy']))
        surrogates[label] = GroupSurrogate(label, model, rules, quality)
        logger.info("class '{}': {} rules, accuracy {:.3f}".format(
            label, len(rules), quality['accuracy']))
    return surrogates


class RuleContrast(SerializableMixin):
    def __init__(self, rule, sizes, priors):
        self.rule = rule
        self.sizes = sizes
        # None where no row of the group satisfies the rule
        self.priors = priors

    @property
    def undefined_groups(self):
        return [g for g, p in self.priors.items() if p is None]

    @property
    def delta(self):
        defined = [p for p in self.priors.values() if p is not None]
        if len(defined) < 2:
            return None
        return max(defined) - min(defined)

    @property
    def total_size(self):
        return sum(self.sizes.values())

    def as_dict(self):
        return {'rule': self.rule.as_dict(), 'sizes': self.sizes,
                'priors': self.priors, 'delta_prior': self.delta,
                'undefined': self.undefined_groups}


def g_contrast(rules, ds, sensitive):
    """Apply every rule to every class of `sensitive`."""
    codes = ds.group_codes(sensitive)
    labels = ds.classes(sensitive)
    y, w = ds.y.astype(np.float64), ds.weights
    groups = [(str(labels[g]), codes == g) for g in np.unique(codes)]
    contrasts = []
    for rule in rules:
        admitted = rule.mask(ds)
        sizes, priors = OrderedDict(), OrderedDict()
        for label, members in groups:
            rows = admitted & members
            size = float(w[rows].sum())
            sizes[label] = size
            priors[label] = float((y * w)[rows].sum()) / size \
                if size > 0 else None
        contrasts.append(RuleContrast(rule, sizes, priors))
    return contrasts


class WorldviewReport(ReportMixin):
    def __init__(self, threshold, min_size, entries, shares, summary,
                 quality=None):
        self.threshold = threshold
        self.min_size = min_size
        # (RuleContrast, classification)
        self.entries = entries
        self.shares = shares
        self.summary = summary
        self.quality = quality or OrderedDict()

    def as_dict(self):
        return {'threshold': self.threshold, 'min_size': self.min_size,
                'rules': [dict(c.as_dict(), classification=k)
                          for c, k in self.entries],
                'shares': self.shares, 'summary': self.summary,
                'surrogate_quality': self.quality}

    def table_headers(self):
        return ['rule', 'origin', 'delta_prior', 'evidence']

    def table_rows(self):
        return [(c.rule.text(), c.rule.origin, c.delta, k)
                for c, k in self.entries]

    def footer_lines(self):
        lines = list(self.summary)
        for group, quality in self.quality.items():
            lines.append('surrogate {}: accuracy {:.3f}, f1 {:.3f}'.format(
                group, quality['accuracy'], quality['f1']))
        return lines


def _classify(contrast, threshold, min_size):
    delta = contrast.delta
    if delta is None:
        return UNDEFINED
    compared = [contrast.sizes[g] for g, p in contrast.priors.items()
                if p is not None]
    if min(compared) < min_size:
        return UNDEFINED
    return WYSIWYG if delta <= threshold else WAE


def _summary(entries, shares, n_groups):
    if not entries:
        return ['no evidence: there are no rules to contrast']
    if n_groups < 2:
        return ['insufficient groups: every rule was seen in a single class']
    defined = [(c, k) for c, k in entries if k != UNDEFINED]
    if not defined:
        return ['no evidence: every rule is undefined or too small']
    lines = []
    kinds = set(k for _, k in defined)
    if kinds == set([WYSIWYG]):
        lines.append('the evidence suggests following only WYSIWYG')
    elif kinds == set([WAE]):
        lines.append('the evidence suggests following only WAE')
    else:
        dominant = WYSIWYG if shares[WYSIWYG] >= shares[WAE] else WAE
        lines.append('the evidence leans towards {} ({:.0%} vs {:.0%} of '
                     'admitted weight)'.format(
                         dominant, shares[dominant],
                         shares[WAE if dominant == WYSIWYG else WYSIWYG]))
        counter = [(c, k) for c, k in defined if k != dominant]
        pick = max if dominant == WYSIWYG else min
        contrast, kind = pick(counter, key=lambda e: e[0].delta)
        lines.append('strongest counter-evidence: IF {} (from {}), '
                     'delta prior {:.3f}'.format(
                         contrast.rule.text(), contrast.rule.origin,
                         contrast.delta))
    largest = max(defined, key=lambda e: e[0].delta)[0]
    lines.append('largest prior difference {:.3f} for IF {}'.format(
        largest.delta, largest.rule.text()))
    return lines


def evaluate_worldview(contrasts, threshold=WORLDVIEW_DEFAULTS.threshold,
                       min_size=WORLDVIEW_DEFAULTS.min_size, quality=None):
    if not 0 < threshold < 1:
        raise ConfigurationException("threshold must be in (0,1)")
    entries = [(c, _classify(c, threshold, min_size)) for c in contrasts]
    total = sum(c.total_size for c in contrasts)
    shares = OrderedDict()
    for kind in (WYSIWYG, WAE):
        mass = sum(c.total_size for c, k in entries if k == kind)
        shares[kind] = mass / total if total > 0 else 0.0
    n_groups = max([len(c.priors) for c in contrasts] or [0])
    summary = _summary(entries, shares, n_groups)
    return WorldviewReport(threshold, min_size, entries, shares, summary,
                           quality)


def fairview(ds, sensitive, surrogate_config=None,
             threshold=WORLDVIEW_DEFAULTS.threshold,
             min_size=WORLDVIEW_DEFAULTS.min_size, positive_only=True):
    """trace, g_contrast and evaluate_worldview in one call."""
    surrogates = trace(ds, sensitive, surrogate_config, positive_only)
    rules = [rule for s in surrogates.values() for rule in s.rules]
    contrasts = g_contrast(rules, ds, sensitive)
    quality = OrderedDict((g, s.quality) for g, s in surrogates.items())
    return evaluate_worldview(contrasts, threshold, min_size, quality)


def render_rules(contrasts):
    lines = []
    for contrast in contrasts:
        groups = ', '.join(
            '{}: {:g}/{}'.format(g, contrast.sizes[g],
                                 '-' if p is None else '{:.3f}'.format(p))
            for g, p in contrast.priors.items())
        lines.append('IF {} THEN positive ({})'.format(
            contrast.rule.text(), groups))
    return '\n'.join(lines)
