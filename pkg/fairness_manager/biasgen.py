# -*- coding: utf-8 -*-
"""Synthetic credit-style data with bias switched on by parameter.

A sensitive group A, a resource R (e.g. income) and a discrete zone Q
drive a latent score S whose mean-threshold gives the true label Y. The
observed proxies P_R and P_S (and label P_Y) can be skewed against A=1.
Historical bias (beta_h_*) moves the world itself, measurement bias
(beta_m_*) only what is recorded.
"""
import numpy as np

from .config import BiasSpec
from .constants import CATEGORICAL, FEATURE, LABELS, LATENT, NUMERIC, \
    SENSITIVE, TARGET
from .dataset import ColumnSchema, TabularDataset, save_csv
from .decorators import validate_config
from .exceptions import BadSpec, LengthMismatch, TooFewRows
from .log import get_logger
from .mixins import SerializableMixin
from .utils import fsum, sigmoid, write_json

logger = get_logger(__name__)

COLUMNS = ('A', 'R', 'Q', 'S', 'P_R', 'P_S', 'Y', 'P_Y')
# one independent stream per source of variability
STREAMS = ('A', 'R', 'Q', 'S', 'P_R', 'P_S', 'undersample')


class GeneratedSample(SerializableMixin):
    def __init__(self, dataset, threshold_used, spec):
        self.dataset = dataset
        self.threshold_used = float(threshold_used)
        self.spec = spec

    def column(self, name):
        return self.dataset.column(name)

    @property
    def a(self):
        return self.dataset.group_codes('A')

    def as_dict(self):
        return {'spec': self.spec.as_dict(),
                'threshold_used': self.threshold_used,
                'n_rows': self.dataset.n_rows}


def sample_schema():
    return [
        ColumnSchema('A', CATEGORICAL, SENSITIVE),
        ColumnSchema('R', NUMERIC, FEATURE),
        ColumnSchema('Q', NUMERIC, FEATURE),
        ColumnSchema('S', NUMERIC, LATENT),
        ColumnSchema('P_R', NUMERIC, LATENT),
        ColumnSchema('P_S', NUMERIC, LATENT),
        ColumnSchema('Y', NUMERIC, TARGET),
        ColumnSchema('P_Y', NUMERIC, LATENT),
    ]


def _streams(seed):
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.default_rng(child)
            for name, child in zip(STREAMS, children)}


def generate(spec=None):
    spec = validate_config(spec, BiasSpec)
    rng = _streams(spec.seed)
    n = spec.n
    a = rng['A'].binomial(1, spec.p_A, size=n)
    r = -spec.beta_h_R * a + rng['R'].gamma(spec.k_R, spec.theta_R, size=n)
    p_q = sigmoid(-(spec.alpha_RQ * r - spec.beta_h_Q * a))
    q = rng['Q'].binomial(spec.K, p_q).astype(np.float64)
    s = spec.alpha_R * r - spec.alpha_Q * q - spec.beta_h_Y * a + \
        rng['S'].normal(0.0, spec.sigma_S, size=n)
    p_r = r - spec.beta_m_R * a + rng['P_R'].normal(0.0, spec.sigma_PR,
                                                    size=n)
    p_s = s - spec.beta_m_Y * a + rng['P_S'].normal(0.0, spec.sigma_PS,
                                                    size=n)
    threshold = fsum(p_s) / n
    y = (s > threshold).astype(np.float64)
    p_y = (p_s > threshold).astype(np.float64)
    columns = {'A': a, 'R': r, 'Q': q, 'S': s, 'P_R': p_r, 'P_S': p_s,
               'Y': y, 'P_Y': p_y}
    dataset = TabularDataset(sample_schema(), columns, {'A': ('0', '1')},
                             name='biasgen-{}'.format(spec.seed))
    sample = GeneratedSample(dataset, threshold, spec)
    logger.debug("generated {} rows, threshold {:.4f}".format(n, threshold))
    if spec.undersample_mode != 'none':
        sample = apply_representation_bias(
            sample, spec.p_u, spec.undersample_mode, rng['undersample'])
    return sample


def apply_representation_bias(sample, p_u, mode, seed):
    """Undersample A=1 down to round(p_u * count(A=0)) rows.

    `low_R` keeps the A=1 rows with the smallest R (ties by row index).
    """
    if not 0 < p_u <= 1:
        raise BadSpec("p_u must be in (0,1]")
    if mode not in ('random', 'low_R'):
        raise BadSpec("undersampling mode must be 'random' or 'low_R'")
    a = sample.a
    minority = np.flatnonzero(a == 1)
    target = min(int(round(p_u * np.count_nonzero(a == 0))), minority.size)
    if target == 0:
        raise TooFewRows("undersampling would leave no A=1 rows")
    if mode == 'random':
        rng = seed if isinstance(seed, np.random.Generator) \
            else np.random.default_rng(seed)
        kept = rng.choice(minority, size=target, replace=False)
    else:
        r = sample.column('R')[minority]
        kept = minority[np.lexsort((minority, r))[:target]]
    mask = a == 0
    mask[kept] = True
    logger.debug("kept {} of {} A=1 rows ({})".format(
        target, minority.size, mode))
    return GeneratedSample(sample.dataset.select_rows(mask),
                           sample.threshold_used, sample.spec)


def project_view(sample, use_proxy_R=False, omit_R=None, label='true_Y',
                 expose_A=True):
    """Choose what a downstream model may see; the rest stays latent.

    `omit_R` left as None follows the omit_R switch of the sample's spec.
    """
    if omit_R is None:
        omit_R = sample.spec.omit_R
    if use_proxy_R and omit_R:
        raise BadSpec("cannot both use the proxy of R and omit R")
    if label not in LABELS:
        raise BadSpec("label must be 'true_Y' or 'proxy_Y'")
    features = set(['Q'])
    if use_proxy_R:
        features.add('P_R')
    elif not omit_R:
        features.add('R')
    target = 'Y' if label == 'true_Y' else 'P_Y'
    if features == set(['Q']) and not expose_A:
        logger.warning("the view leaves Q as the only feature")
    roles = {}
    for name in COLUMNS[1:]:
        if name == target:
            roles[name] = TARGET
        elif name in features:
            roles[name] = FEATURE
        else:
            roles[name] = LATENT
    ds = sample.dataset
    schema = []
    for column in ds.schema:
        if column.name == 'A':
            schema.append(column.replace(exposed=expose_A))
        else:
            schema.append(column.replace(role=roles[column.name]))
    columns = {name: ds.column(name) for name in ds.names}
    return TabularDataset(schema, columns, {'A': ds.classes('A')},
                          ds.weights, ds.name)


def inject_score_bias(scores, a, beta):
    """Shift the scores of A=1 rows down by beta (algorithmic or
    deployment bias)."""
    scores = np.asarray(scores, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    if scores.shape != a.shape:
        raise LengthMismatch(scores.shape[0], a.shape[0])
    return scores - beta * a


def write_sample(sample, path):
    save_csv(sample.dataset, path)
    write_json(path + '.json', sample.as_dict())
    return path
