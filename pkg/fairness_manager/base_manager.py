# -*- coding: utf-8 -*-
import os
from collections import OrderedDict

import numpy as np

from . import biasgen, contrast, fftree, mitigate, monitor
from .adult import load_adult
from .compare import EvaluatedModel, compare
from .config import BiasSpec, ExperimentConfig, GrowthConfig
from .constants import CDP, DP, EOPP, SLUGIFIER
from .dataset import encode, kfold, load_csv, load_schema, split
from .decorators import time_it
from .exceptions import ConfigurationException
from .fftree import FairnessConstraint, FFTreeModel
from .log import get_logger
from .metrics import evaluate, group_confusion, group_metric_difference
from .mitigate import LinearScoreModel, ThresholdPolicy
from .monitor import GroupPolicyModel, ScoreBiasModel
from .os_utils import create_directory
from .utils import config_hash, read_json, write_json, write_text

logger = get_logger(__name__)

FAMILY = {'none': 'none', 'suppression': 'pre', 'ftu': 'pre',
          'massaging': 'pre', 'reweighing': 'pre', 'sampling': 'pre',
          'thresh-dp': 'post', 'thresh-eopp': 'post', 'thresh-eodds': 'post',
          'thresh-cdp': 'post'}


class FairnessManager(object):
    def __init__(self, config):
        if isinstance(config, dict):
            config = ExperimentConfig(config)
        if not isinstance(config, ExperimentConfig):
            raise ConfigurationException(
                "Configuration object should be instance of "
                "ExperimentConfig")
        self.config = config
        self.config_hash = config_hash(config.as_dict())
        self.constraints = [FairnessConstraint.parse(c)
                            for c in config.constraints]

    # data

    def load(self):
        source = self.config.source
        if 'csv' in source:
            return load_csv(source['csv'], load_schema(source['schema']),
                            name=self.config.name)
        return self.synthetic_view(source['bias_spec'], self.config.view)

    def sensitive_of(self, ds):
        return self.config.sensitive or ds.sensitive_names[0]

    def prepare(self, train, test):
        if self.config.encoding == 'none':
            return train, test, None
        train_enc, encoding = encode(train)
        return train_enc, encoding.apply(test), encoding

    # models

    @staticmethod
    def fit_model(train, kind='linear', constraints=(), growth=None,
                  linear=None, encoding=None):
        if kind == 'fftree':
            return fftree.fit(train, constraints, growth, encoding)
        return mitigate.fit_linear_score(train, linear, encoding=encoding)

    @staticmethod
    def load_model(path):
        return FairnessManager.model_from_dict(read_json(path))

    @staticmethod
    def model_from_dict(data):
        if 'meta' in data:
            return FFTreeModel.from_dict(data)
        if data.get('kind') == 'group-policy':
            return GroupPolicyModel(
                FairnessManager.model_from_dict(data['score_model']),
                ThresholdPolicy.from_dict(data['policy']),
                data['sensitive'])
        if data.get('kind') == 'score-bias':
            return ScoreBiasModel(
                FairnessManager.model_from_dict(data['model']),
                data['beta'], data['sensitive'], data['group'])
        return LinearScoreModel.from_dict(data)

    @staticmethod
    def run_method(method, train, sensitive, kind='linear', seed=0,
                   epsilon=0.01, growth=None, linear=None, stratum=None,
                   encoding=None, score_bias=0.0):
        """Fit the model a mitigation method yields on `train`.

        A positive `score_bias` lowers every learned score of the A=1
        class before any post-processing sees it.
        """
        if method not in FAMILY:
            raise ConfigurationException(
                "unknown mitigation '{}'".format(method))

        def fit(*args):
            model = FairnessManager.fit_model(*args)
            if score_bias:
                model = ScoreBiasModel(model, score_bias, sensitive)
            return model

        if method == 'none':
            return fit(train, kind, (), growth, linear, encoding)
        if method in mitigate.PREPROCESSORS:
            ranker = None
            if method == 'massaging':
                ranker = fit(train, kind, (), growth, linear,
                             encoding).predict_score(train)
            transformed, details = mitigate.preprocess(
                method, train, sensitive, seed, ranker)
            logger.debug("{}: {}".format(method, details))
            return fit(transformed, kind, (), growth, linear, encoding)
        base = fit(train, kind, (), growth, linear, encoding)
        policy_kind = mitigate.POSTPROCESSORS[method]
        if policy_kind == CDP and stratum is None:
            raise ConfigurationException("thresh-cdp needs a stratum column")
        policy = mitigate.fit_threshold_policy(
            policy_kind, base.predict_score(train), train.y,
            train.labels(sensitive),
            train.labels(stratum) if policy_kind == CDP else None,
            epsilon, train.weights, sensitive=sensitive,
            stratum_name=stratum if policy_kind == CDP else None)
        return GroupPolicyModel(base, policy, sensitive)

    @staticmethod
    def score_biases(source):
        """Algorithmic and deployment bias of a synthetic source."""
        if 'bias_spec' not in source:
            return 0.0, 0.0
        spec = BiasSpec(source['bias_spec'])
        return spec.beta_alg, spec.beta_dep

    @staticmethod
    def deploy(model, beta, sensitive):
        if not beta:
            return model
        return ScoreBiasModel(model, beta, sensitive)

    # experiments

    def evaluate_fold(self, train, test, fold=None):
        config = self.config
        sensitive = self.sensitive_of(train)
        train, test, encoding = self.prepare(train, test)
        truth = None if config.truth is None else test.column(config.truth)
        runs = [('baseline', 'none', 'none', ())]
        if config.model == 'fftree' and self.constraints:
            runs.append(('fftree-constrained', 'in', 'none',
                         self.constraints))
        runs += [(method, FAMILY[method], method, ())
                 for method in config.mitigations]
        alg_bias, dep_bias = self.score_biases(config.source)
        evaluated, models = [], OrderedDict()
        for model_id, family, method, constraints in runs:
            if constraints:
                model = self.deploy(fftree.fit(train, constraints,
                                               config.growth, encoding),
                                    alg_bias, sensitive)
            else:
                model = self.run_method(
                    method, train, sensitive, config.model, config.seed,
                    config.epsilon, config.growth, config.linear,
                    config.stratum, encoding, alg_bias)
            model = self.deploy(model, dep_bias, sensitive)
            yhat = model.predict_label(test, config.tau)
            scores = np.clip(model.predict_score(test), 0.0, 1.0)
            report = evaluate(
                test, yhat, scores, sensitive, config.stratum, truth, model,
                config.tau, dataset_id=config.name, model_id=model_id,
                config=config.as_dict())
            if fold is not None:
                report.metadata['fold'] = fold
            evaluated.append(EvaluatedModel(model_id, report, family))
            models[model_id] = model
        return evaluated, models

    @staticmethod
    def median_summary(folds, keys):
        """Median per model and key over folds (missing values skipped)."""
        summary = OrderedDict()
        for evaluated in folds:
            for model in evaluated:
                entry = summary.setdefault(model.model_id, OrderedDict(
                    (key, []) for key in keys))
                for key in keys:
                    value = model.report.get(key) \
                        if model.report.has(key) else None
                    if value is not None:
                        entry[key].append(value)
        return OrderedDict(
            (model_id, OrderedDict(
                (key, float(np.median(values)) if values else None)
                for key, values in entry.items()))
            for model_id, entry in summary.items())

    @time_it
    def run(self):
        config = self.config
        ds = self.load()
        out = config.output_dir
        create_directory(out)
        sensitive = self.sensitive_of(ds)
        if config.kfold:
            folds = []
            for i, (train, test) in enumerate(kfold(ds, config.kfold,
                                                    config.seed)):
                evaluated, _ = self.evaluate_fold(train, test, fold=i)
                folds.append(evaluated)
            summary = self.median_summary(
                folds, ('dp_diff', 'eopp_diff', 'accuracy', 'f1'))
            result = {'name': config.name, 'config_hash': self.config_hash,
                      'kfold': config.kfold, 'medians': summary}
            write_json(os.path.join(out, 'kfold.json'), result)
            return result
        train, test = split(ds, config.test_fraction, config.seed,
                            stratify_on=sensitive)
        evaluated, models = self.evaluate_fold(train, test)
        for model in evaluated:
            slug = SLUGIFIER(model.model_id)
            model.report.save(os.path.join(out, 'metrics-{}.json'.format(
                slug)))
            models[model.model_id].save_json(
                os.path.join(out, 'model-{}.json'.format(slug)))
        comparison = compare(evaluated, 'dp_diff', 'f1', config.Phi,
                             extra_keys=('accuracy', 'eopp_diff'))
        comparison.save(os.path.join(out, 'comparison.json'))
        write_text(os.path.join(out, 'comparison.txt'),
                   comparison.render_table())
        result = {'name': config.name, 'config_hash': self.config_hash,
                  'winner': comparison.winner,
                  'models': [m.model_id for m in evaluated]}
        write_json(os.path.join(out, 'run.json'), result)
        logger.info("run '{}' finished, winner {}".format(
            config.name, comparison.winner))
        return result

    # scripted scenarios

    @staticmethod
    def synthetic_view(spec, view=None):
        sample = biasgen.generate(BiasSpec(spec))
        return biasgen.project_view(sample, **(view or {}))

    @staticmethod
    def _gap(kind, y, yhat, ds, sensitive):
        confusion = group_confusion(y, yhat, ds.group_codes(sensitive),
                                    ds.weights)
        return group_metric_difference(kind, confusion).value

    @staticmethod
    def interaction_sweep(base_spec, parameter, grid, methods, view=None,
                          seed=0, epsilon=0.002, eval_n=100000,
                          truth='Y'):
        """Bias strength against mitigation: one row per (value, method)
        with |DP|, the EOpp and TPR gaps and accuracy on the true label.

        Models are fitted on the spec's sample and measured on an
        independent sample of `eval_n` rows drawn from the same world
        under the next seed.
        """
        rows = []
        for value in grid:
            spec = dict(base_spec)
            spec[parameter] = value
            train = FairnessManager.synthetic_view(spec, view)
            test = FairnessManager.synthetic_view(
                dict(spec, n=eval_n, seed=spec.get('seed', seed) + 1), view)
            alg_bias, dep_bias = FairnessManager.score_biases(
                {'bias_spec': spec})
            y = test.column(truth).astype(np.int64)
            for method in methods:
                model = FairnessManager.deploy(
                    FairnessManager.run_method(method, train, 'A',
                                               seed=seed, epsilon=epsilon,
                                               score_bias=alg_bias),
                    dep_bias, 'A')
                yhat = model.predict_label(test)
                dp = FairnessManager._gap(DP, y, yhat, test, 'A')
                eopp = FairnessManager._gap(EOPP, y, yhat, test, 'A')
                rows.append(OrderedDict([
                    ('parameter', parameter), ('value', value),
                    ('method', method), ('dp', dp),
                    ('abs_dp', None if dp is None else abs(dp)),
                    ('eopp', eopp),
                    ('tpr_gap', None if eopp is None else abs(eopp)),
                    ('accuracy', float(np.mean(yhat == y)))]))
                logger.info("{}={} {}: dp {}".format(
                    parameter, value, method,
                    'undefined' if dp is None else '{:.4f}'.format(dp)))
        return rows

    @staticmethod
    def bias_interaction(bias='historical', n=20000, seed=0,
                         epsilon=0.002):
        if bias == 'historical':
            spec = {'n': n, 'seed': seed, 'beta_h_R': 1.5}
            view = {'label': 'true_Y'}
            methods = ('none', 'ftu', 'thresh-dp')
            parameter = 'beta_h_R'
        else:
            spec = {'n': n, 'seed': seed, 'beta_m_Y': 1.5}
            view = {'label': 'proxy_Y'}
            methods = ('none', 'ftu', 'thresh-dp', 'thresh-eopp')
            parameter = 'beta_m_Y'
        rows = FairnessManager.interaction_sweep(
            spec, parameter, [1.5], methods, view, seed, epsilon)
        return OrderedDict((row['method'], row) for row in rows)

    @staticmethod
    def fairview_scenario(bias='historical', n=100000, seed=0,
                          surrogate=None, threshold=0.05, min_size=10):
        if bias == 'historical':
            spec, view = {'beta_h_R': 1.5}, {'label': 'true_Y'}
        else:
            spec, view = {'beta_m_Y': 1.5}, {'label': 'proxy_Y'}
        spec.update(n=n, seed=seed)
        ds = FairnessManager.synthetic_view(spec, view)
        return contrast.fairview(ds, 'A', surrogate, threshold, min_size)

    @staticmethod
    def temporal_scenario(n=10000, seed=0, beta_1=0.5, beta_2=1.5,
                          magnitude=1.0, epsilon=0.005, background_n=64,
                          sample_n=100):
        """Two yearly slices, the second with a wider resource gap."""
        slice_1 = FairnessManager.synthetic_view(
            {'n': n, 'seed': seed, 'beta_h_R': beta_1})
        slice_2 = FairnessManager.synthetic_view(
            {'n': n, 'seed': seed + 1, 'beta_h_R': beta_2})
        model_1 = monitor.fit_group_model(slice_1, 'A', DP, epsilon)
        drift = monitor.evaluate_over_slices(
            model_1, OrderedDict([('slice-1', slice_1),
                                  ('slice-2', slice_2)]),
            'A', model_id='dp-slice-1')

        feature = monitor.most_important_feature(
            model_1.score_model, slice_1, background_n, sample_n, seed,
            features=['R', 'Q'])
        shocks = OrderedDict()
        for spec in (monitor.ShockSpec(feature, magnitude, 'negative'),
                     monitor.ShockSpec(feature, magnitude, 'negative',
                                       'conditioned', '1', 'A')):
            shocked = monitor.apply_shock(slice_1, spec)
            shocks[spec.label] = shocked
        drift = monitor.evaluate_over_slices(model_1, shocks, 'A',
                                             model_id='dp-slice-1',
                                             report=drift)

        individual = mitigate.fit_linear_score(mitigate.ftu(slice_2, 'A'))
        model_2 = monitor.retrain_on_surrogate(individual, slice_2, 'A',
                                               epsilon=epsilon)
        drift = monitor.evaluate_over_slices(
            model_2, OrderedDict([('slice-2', slice_2)]), 'A',
            model_id='dp-surrogate-slice-2', report=drift)
        delta = monitor.group_delta_shapley(
            model_1, model_2, slice_2, 'A', background_n, sample_n, seed)
        return OrderedDict([('drift', drift), ('shocked_feature', feature),
                            ('shocks', list(shocks)),
                            ('shapley', delta)])

    @staticmethod
    def adult_kfold(deltas=(0.05,), criterion=DP, sensitive='sex', k=5,
                    seed=0, directory=None, growth=None):
        """Median validation DP and accuracy of the constrained tree per
        delta, with the quartile map fitted on each training fold."""
        ds = load_adult(directory)
        growth = GrowthConfig(growth or {})
        folds = kfold(ds, k, seed)
        rows = []
        for delta in deltas:
            constraint = FairnessConstraint(criterion, sensitive, delta)
            dps, accuracies, audits = [], [], []
            for train, test in folds:
                train_enc, encoding = encode(train)
                model = fftree.fit(train_enc, [constraint], growth,
                                   encoding)
                test_enc = encoding.apply(test)
                yhat = model.predict_label(test_enc)
                dps.append(abs(FairnessManager._gap(
                    criterion, test_enc.y, yhat, test_enc, sensitive)))
                accuracies.append(float(np.mean(yhat == test_enc.y)))
                audits.append(fftree.audit_compliance(model,
                                                      train_enc).passed)
            rows.append(OrderedDict([
                ('delta', delta), ('criterion', criterion),
                ('median_abs_gap', float(np.median(dps))),
                ('median_accuracy', float(np.median(accuracies))),
                ('audits_passed', all(audits))]))
            logger.info("adult delta {}: gap {:.4f}, accuracy {:.4f}".format(
                delta, rows[-1]['median_abs_gap'],
                rows[-1]['median_accuracy']))
        return rows
