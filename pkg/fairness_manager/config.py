# -*- coding: utf-8 -*-
import json
import math
import os

from .constants import (BIAS_DEFAULTS, GROWTH_DEFAULTS, LINEAR_DEFAULTS,
                        MITIGATION_METHODS, SURROGATE_DEFAULTS,
                        UNDERSAMPLE_MODES)
from .exceptions import BadSpec, ConfigurationException


class BaseConfig(object):
    defaults = None
    exception = ConfigurationException

    def __init__(self, config=None, **overrides):
        config = {} if config is None else config
        if not isinstance(config, dict):
            raise self.exception("config should be dict")
        merged = dict(config)
        merged.update(overrides)
        known = self.defaults._fields
        unknown = sorted(set(merged) - set(known))
        if unknown:
            raise self.exception(
                "unknown {} fields: {}".format(type(self).__name__, unknown))
        for field in known:
            setattr(self, field, merged.get(field,
                                            getattr(self.defaults, field)))
        self.validate()

    def validate(self):
        pass

    def as_dict(self):
        return {field: getattr(self, field)
                for field in self.defaults._fields}

    def replace(self, **changes):
        data = self.as_dict()
        data.update(changes)
        return type(self)(data)

    @classmethod
    def from_json(cls, path):
        with open(path) as f:
            return cls(json.load(f))

    def __eq__(self, other):
        return type(self) is type(other) and self.as_dict() == other.as_dict()

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return "{}({!r})".format(type(self).__name__, self.as_dict())


def _check(condition, message, exception):
    if not condition:
        raise exception(message)


class BiasSpec(BaseConfig):
    defaults = BIAS_DEFAULTS
    exception = BadSpec

    def validate(self):
        for name in self.defaults._fields:
            value = getattr(self, name)
            if isinstance(value, float) and not math.isfinite(value):
                raise BadSpec("{} must be finite".format(name))
        _check(isinstance(self.n, int) and self.n >= 2,
               "n must be an integer >= 2", BadSpec)
        _check(isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64,
               "seed must be a 64-bit unsigned integer", BadSpec)
        _check(0 < self.p_A < 1, "p_A must be in (0,1)", BadSpec)
        _check(self.k_R > 0 and self.theta_R > 0,
               "Gamma shape and scale must be > 0", BadSpec)
        _check(isinstance(self.K, int) and self.K >= 1,
               "K must be an integer >= 1", BadSpec)
        _check(self.sigma_S > 0, "sigma_S must be > 0", BadSpec)
        for name in ('sigma_PR', 'sigma_PS', 'beta_h_R', 'beta_h_Q',
                     'beta_h_Y', 'beta_m_R', 'beta_m_Y', 'beta_alg',
                     'beta_dep'):
            _check(getattr(self, name) >= 0,
                   "{} must be >= 0".format(name), BadSpec)
        _check(0 < self.p_u <= 1, "p_u must be in (0,1]", BadSpec)
        _check(self.undersample_mode in UNDERSAMPLE_MODES,
               "undersample_mode must be one of {}".format(
                   UNDERSAMPLE_MODES), BadSpec)
        _check(isinstance(self.omit_R, bool), "omit_R must be boolean",
               BadSpec)


class GrowthConfig(BaseConfig):
    defaults = GROWTH_DEFAULTS

    def validate(self):
        for name in ('max_depth', 'min_samples_leaf', 'min_samples_split',
                     'min_group_count'):
            value = getattr(self, name)
            _check(isinstance(value, int) and value >= 0,
                   "{} must be a non-negative integer".format(name),
                   ConfigurationException)
        _check(self.min_samples_leaf >= 1, "min_samples_leaf must be >= 1",
               ConfigurationException)
        _check(self.min_samples_split >= 2 * self.min_samples_leaf,
               "min_samples_split must be >= 2 * min_samples_leaf",
               ConfigurationException)
        _check(self.max_leaves is None or (
            isinstance(self.max_leaves, int) and self.max_leaves >= 1),
            "max_leaves must be None or an integer >= 1",
            ConfigurationException)


class LinearConfig(BaseConfig):
    defaults = LINEAR_DEFAULTS

    def validate(self):
        _check(isinstance(self.iterations, int) and self.iterations >= 1,
               "iterations must be >= 1", ConfigurationException)
        _check(self.learning_rate > 0, "learning_rate must be > 0",
               ConfigurationException)
        _check(self.l2 >= 0, "l2 must be >= 0", ConfigurationException)


class SurrogateConfig(BaseConfig):
    defaults = SURROGATE_DEFAULTS

    def validate(self):
        _check(self.max_leaves >= 1 and self.max_depth >= 1,
               "surrogate complexity must be >= 1", ConfigurationException)
        _check(self.min_rows >= 1, "min_rows must be >= 1",
               ConfigurationException)
        _check(0 <= self.min_leaf_fraction < 0.5,
               "min_leaf_fraction must be in [0, 0.5)",
               ConfigurationException)

    def growth(self, n_rows=0):
        """Growth limits for a class of `n_rows` rows."""
        leaf = max(self.min_samples_leaf,
                   int(math.ceil(self.min_leaf_fraction * n_rows)))
        return GrowthConfig(max_depth=self.max_depth, min_samples_leaf=leaf,
                            min_samples_split=2 * leaf,
                            max_leaves=self.max_leaves)


class ExperimentConfig(object):
    """Named pipeline read by the `run` sub-command.

    Keys: name, seed, source ({"csv": path, "schema": path} or
    {"bias_spec": {...}}), view (biasgen view flags), encoding
    ("quartile" | "none"), test_fraction or kfold, model
    ("fftree" | "linear"), constraints (["DP:0.05:gender", ...]),
    growth, linear, mitigations, sensitive, stratum, tau, truth (column
    the reports measure against), epsilon (threshold policies), Phi
    (comparison bound), output_dir.
    """

    required = ('name', 'seed', 'source', 'output_dir')

    def __init__(self, config={}):
        if not isinstance(config, dict):
            raise ConfigurationException("config_dict should be dict")
        self.config_dict = config
        missing = [key for key in self.required if key not in config]
        if missing:
            raise ConfigurationException(
                "experiment config misses {}".format(missing))
        self.name = config['name']
        self.seed = config['seed']
        if not isinstance(self.seed, int):
            raise ConfigurationException("seed is mandatory and integer")
        self.source = config['source']
        self.view = config.get('view', {})
        self.encoding = config.get('encoding', 'quartile')
        self.test_fraction = config.get('test_fraction', 0.3)
        self.kfold = config.get('kfold', None)
        self.model = config.get('model', 'fftree')
        self.constraints = config.get('constraints', [])
        self.growth = GrowthConfig(config.get('growth', {}))
        self.linear = LinearConfig(config.get('linear', {}))
        self.mitigations = config.get('mitigations', [])
        self.sensitive = config.get('sensitive', None)
        self.stratum = config.get('stratum', None)
        self.tau = config.get('tau', 0.5)
        self.truth = config.get('truth', None)
        self.epsilon = config.get('epsilon', 0.01)
        self.Phi = config.get('Phi', 0.05)
        self.output_dir = config['output_dir']
        self.validate()

    def validate(self):
        if self.model not in ('fftree', 'linear'):
            raise ConfigurationException(
                "unknown model '{}'".format(self.model))
        if self.encoding not in ('quartile', 'none'):
            raise ConfigurationException(
                "unknown encoding '{}'".format(self.encoding))
        bad = [m for m in self.mitigations if m not in MITIGATION_METHODS]
        if bad:
            raise ConfigurationException(
                "unknown mitigations {}".format(bad))
        if 'csv' in self.source:
            for key in ('csv', 'schema'):
                if not os.path.exists(self.source.get(key, '')):
                    raise ConfigurationException(
                        "source {} '{}' does not exist".format(
                            key, self.source.get(key)))
        elif 'bias_spec' in self.source:
            BiasSpec(self.source['bias_spec'])
        else:
            raise ConfigurationException(
                "source needs either csv+schema or bias_spec")

    def as_dict(self):
        d = dict(vars(self))
        d.pop('config_dict', None)
        d['growth'] = self.growth.as_dict()
        d['linear'] = self.linear.as_dict()
        return d

    @classmethod
    def from_json(cls, path):
        with open(path) as f:
            return cls(json.load(f))
