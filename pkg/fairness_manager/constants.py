# -*- coding: utf-8 -*-
import os
from collections import namedtuple

from slugify import slugify

NUMERIC = 'numeric'
CATEGORICAL = 'categorical'
COLUMN_KINDS = (NUMERIC, CATEGORICAL)

FEATURE = 'feature'
TARGET = 'target'
SENSITIVE = 'sensitive'
STRATUM = 'stratum'
SLICE = 'slice'
LATENT = 'latent'
COLUMN_ROLES = (FEATURE, TARGET, SENSITIVE, STRATUM, SLICE, LATENT)

# group criteria understood by metrics.group_metric_difference
DP = 'DP'
EOPP = 'EOPP'
PE = 'PE'
EODDS = 'EODDS'
PP = 'PP'
SUFF_NEG = 'SUFF_NEG'
ACC = 'ACC'
CDP = 'CDP'
GROUP_KINDS = (DP, EOPP, PE, EODDS, PP, SUFF_NEG, ACC)
TREE_CRITERIA = (DP, PP, EOPP, PE)
POLICY_KINDS = (DP, EOPP, EODDS, CDP)

UNDERSAMPLE_MODES = ('none', 'random', 'low_R')
LABELS = ('true_Y', 'proxy_Y')
RATIO_KEYS = ('dp_ratio', 'rule_80_ratio')

MITIGATION_METHODS = (
    'suppression', 'ftu', 'massaging', 'reweighing', 'sampling',
    'thresh-dp', 'thresh-eopp', 'thresh-eodds', 'thresh-cdp')
FAMILIES = ('none', 'pre', 'in', 'post')

BiasDefaults = namedtuple('BiasDefaults', [
    'n', 'seed', 'p_A', 'k_R', 'theta_R', 'K', 'alpha_RQ', 'alpha_R',
    'alpha_Q', 'sigma_S', 'beta_h_R', 'beta_h_Q', 'beta_h_Y', 'beta_m_R',
    'beta_m_Y', 'sigma_PR', 'sigma_PS', 'p_u', 'undersample_mode', 'omit_R',
    'beta_alg', 'beta_dep'])
BIAS_DEFAULTS = BiasDefaults(
    n=10000, seed=0, p_A=0.5, k_R=3.0, theta_R=1.0, K=3, alpha_RQ=1.0,
    alpha_R=1.0, alpha_Q=1.0, sigma_S=0.5, beta_h_R=0.0, beta_h_Q=0.0,
    beta_h_Y=0.0, beta_m_R=0.0, beta_m_Y=0.0, sigma_PR=0.1, sigma_PS=0.1,
    p_u=1.0, undersample_mode='none', omit_R=False, beta_alg=0.0,
    beta_dep=0.0)

GrowthDefaults = namedtuple('GrowthDefaults', [
    'max_depth', 'min_samples_leaf', 'min_samples_split', 'min_group_count',
    'max_leaves', 'tie_break'])
GROWTH_DEFAULTS = GrowthDefaults(
    max_depth=8, min_samples_leaf=50, min_samples_split=100,
    min_group_count=1, max_leaves=None, tie_break='ig-name-threshold')

LinearDefaults = namedtuple('LinearDefaults', [
    'iterations', 'learning_rate', 'l2'])
LINEAR_DEFAULTS = LinearDefaults(iterations=500, learning_rate=0.5, l2=0.0)

SurrogateDefaults = namedtuple('SurrogateDefaults', [
    'max_leaves', 'max_depth', 'min_rows', 'min_samples_leaf',
    'min_leaf_fraction'])
# leaves hold at least max(min_samples_leaf, min_leaf_fraction * rows)
SURROGATE_DEFAULTS = SurrogateDefaults(
    max_leaves=8, max_depth=4, min_rows=50, min_samples_leaf=20,
    min_leaf_fraction=0.05)

WorldviewDefaults = namedtuple('WorldviewDefaults', [
    'threshold', 'min_size', 'weak_accuracy'])
WORLDVIEW_DEFAULTS = WorldviewDefaults(
    threshold=0.05, min_size=10, weak_accuracy=0.7)

MonitorDefaults = namedtuple('MonitorDefaults', [
    'background_n', 'sample_n', 'max_features', 'stagnation', 'fair_dp',
    'unfair_dp'])
MONITOR_DEFAULTS = MonitorDefaults(
    background_n=128, sample_n=200, max_features=12, stagnation=0.005,
    fair_dp=0.01, unfair_dp=0.1)

KNN_DEFAULT = 5
CALIBRATION_BINS = 10
RULE_80 = 0.8
SUPPRESSION_THRESHOLD = 0.15
THRESHOLD_GRID_CAP = 512
AUDIT_TOLERANCE = 1e-12
BASE_RATE_TOLERANCE = 1e-9
SHAPLEY_TOLERANCE = 1e-9

ADULT_URL = ('https://archive.ics.uci.edu/ml/machine-learning-databases/'
             'adult/')
ADULT_FILES = ('adult.data', 'adult.test')
ADULT_DIR_ENV = 'FAIRNESS_ADULT_DIR'

DATA_DIR_PATH = os.path.join(
    os.path.expanduser('~'), '.fairness_manager')


def SLUGIFIER(text):
    return slugify(str(text), separator='_')
