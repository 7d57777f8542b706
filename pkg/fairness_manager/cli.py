# -*- coding: utf-8 -*-
"""`fairness-manager` command line.

Every sub-command reads JSON/CSV inputs, never rewrites them, and writes
its outputs atomically. Exit status: 0 success, 1 domain error (the error
class name goes to stderr), 2 usage error.
"""
import argparse
import logging
import os
import sys
from collections import OrderedDict

import numpy as np

from . import adult, biasgen, contrast, fftree, mitigate, monitor
from .base_manager import FairnessManager
from .compare import EvaluatedModel, compare
from .config import BiasSpec, ExperimentConfig, GrowthConfig, LinearConfig, \
    SurrogateConfig
from .constants import (CATEGORICAL, DP, FAMILIES, LABELS,
                        MITIGATION_METHODS)
from .dataset import (encode, load_csv, load_schema, save_csv, save_schema,
                      slice_by)
from .decorators import require_seed
from .exceptions import FairnessManagerException, UsageException
from .fftree import FairnessConstraint
from .log import get_logger, set_level
from .metrics import MetricsReport, evaluate
from .monitor import GroupPolicyModel, ShockSpec
from .utils import config_hash, dumps, read_json, write_json, write_text

logger = get_logger(__name__)

SCENARIOS = ('historical', 'measurement', 'fairview-historical',
             'fairview-measurement', 'temporal', 'adult')


def _read_dataset(args):
    ds = load_csv(args.data, load_schema(args.schema))
    if getattr(args, 'weights', None):
        table = mitigate.SampleWeightTable.from_dict(read_json(args.weights))
        ds = table.apply(ds)
    return ds


def _emit(report, args):
    """Write `report` to --out (when given) and print it."""
    fmt = getattr(args, 'format', 'table')
    if getattr(args, 'out', None):
        if fmt == 'json' or args.out.endswith('.json'):
            report.save_json(args.out)
        else:
            write_text(args.out, report.render_table())
    print(report.render(fmt))


def _maybe_encode(ds):
    """Quartile/one-hot encode when a feature is multiclass categorical."""
    needs = [name for name in ds.feature_names
             if ds.column_schema(name).kind == CATEGORICAL and
             len(ds.classes(name)) > 2 and not ds.is_sensitive(name)]
    if not needs:
        return ds, None
    logger.info("encoding {} before training".format(needs))
    return encode(ds)


# sub-commands

@require_seed
def cmd_generate(args):
    spec = read_json(args.config) if args.config else {}
    spec['seed'] = args.seed
    sample = biasgen.generate(BiasSpec(spec))
    if args.view:
        view = biasgen.project_view(sample, use_proxy_R=args.use_proxy_R,
                                    omit_R=args.omit_R, label=args.label,
                                    expose_A=not args.hide_sensitive)
        sample = biasgen.GeneratedSample(view, sample.threshold_used,
                                         sample.spec)
    biasgen.write_sample(sample, args.out)
    schema_out = args.schema_out or \
        os.path.splitext(args.out)[0] + '.schema.json'
    save_schema(sample.dataset.schema, schema_out)
    logger.info("wrote {} rows to {}".format(sample.dataset.n_rows,
                                             args.out))
    return 0


def cmd_encode(args):
    ds = _read_dataset(args)
    encoded, encoding = encode(ds)
    save_csv(encoded, args.out)
    save_schema(encoded.schema, args.schema_out or
                os.path.splitext(args.out)[0] + '.schema.json')
    encoding.save_json(args.map_out)
    return 0


def cmd_train(args):
    ds = _read_dataset(args)
    constraints = [FairnessConstraint.parse(c) for c in args.constraint]
    growth = GrowthConfig(read_json(args.growth) if args.growth else {})
    ds, encoding = _maybe_encode(ds)
    if args.model == 'fftree':
        model = fftree.fit(ds, constraints, growth, encoding)
    else:
        if constraints:
            raise UsageException("constraints only apply to fftree")
        linear = LinearConfig(read_json(args.linear) if args.linear else {})
        model = mitigate.fit_linear_score(ds, linear, encoding=encoding)
    model.save_json(args.out)
    if args.model == 'fftree':
        print(fftree.render_rules(model))
    return 0


def cmd_evaluate(args):
    ds = _read_dataset(args)
    model = FairnessManager.load_model(args.model)
    yhat = model.predict_label(ds, args.tau)
    scores = np.clip(model.predict_score(ds), 0.0, 1.0)
    truth = ds.column(args.truth) if args.truth else None
    report = evaluate(ds, yhat, scores, args.sensitive, args.stratum, truth,
                      model, args.tau, k=args.k,
                      dataset_id=os.path.basename(args.data),
                      model_id=args.model_id or os.path.splitext(
                          os.path.basename(args.model))[0],
                      config=vars_config(args))
    report.metadata['family'] = args.family
    _emit(report, args)
    return 0


@require_seed
def cmd_mitigate(args):
    ds = _read_dataset(args)
    method = args.method
    if method in mitigate.PREPROCESSORS:
        ranker = None
        if method == 'massaging':
            if args.model:
                ranker_model = FairnessManager.load_model(args.model)
            else:
                encoded, encoding = _maybe_encode(ds)
                ranker_model = mitigate.fit_linear_score(
                    encoded, encoding=encoding)
            ranker = ranker_model.predict_score(ds)
        result, details = mitigate.preprocess(
            method, ds, args.sensitive, args.seed, ranker,
            args.corr_threshold)
        mitigate.mitigated_dataset(result, args.out, method, details,
                                   parent=args.data)
        save_schema(result.schema,
                    os.path.splitext(args.out)[0] + '.schema.json')
        if method == 'reweighing':
            write_json(os.path.splitext(args.out)[0] + '.weights.json',
                       details)
        return 0
    if not args.model:
        raise UsageException("{} needs --model".format(method))
    base = FairnessManager.load_model(args.model)
    kind = mitigate.POSTPROCESSORS[method]
    stratum = ds.labels(args.stratum) if args.stratum else None
    policy = mitigate.fit_threshold_policy(
        kind, np.clip(base.predict_score(ds), 0.0, 1.0), ds.y,
        ds.labels(args.sensitive), stratum, args.epsilon, ds.weights,
        sensitive=args.sensitive, stratum_name=args.stratum)
    GroupPolicyModel(base, policy, args.sensitive).save_json(args.out)
    print(dumps(policy.as_dict()))
    return 0


def cmd_compare(args):
    models = []
    for path in args.reports:
        report = MetricsReport.from_dict(read_json(path))
        model_id = report.metadata.get('model_id') or \
            os.path.splitext(os.path.basename(path))[0]
        family = report.metadata.get('family', 'none')
        models.append(EvaluatedModel(
            model_id, report, family if family in FAMILIES else 'none'))
    result = compare(models, args.phi_key, args.pi_key, args.Phi, args.beta)
    _emit(result, args)
    print('winner: {}'.format(result.winner or '-'))
    return 0


def cmd_fairview(args):
    ds = _read_dataset(args)
    surrogate = SurrogateConfig(read_json(args.surrogate)
                                if args.surrogate else {})
    report = contrast.fairview(ds, args.sensitive, surrogate, args.threshold,
                               args.min_size, not args.all_leaves)
    _emit(report, args)
    return 0


def cmd_monitor(args):
    return MONITOR_COMMANDS[args.monitor_command](args)


def monitor_slices(args):
    ds = _read_dataset(args)
    model = FairnessManager.load_model(args.model)
    slices = OrderedDict((str(key), part)
                         for key, part in slice_by(ds, args.slice_column))
    report = monitor.evaluate_over_slices(model, slices, args.sensitive,
                                          args.tau, args.model_id,
                                          args.truth)
    _emit(report, args)
    return 0


def monitor_shock(args):
    ds = _read_dataset(args)
    model = FairnessManager.load_model(args.model)
    slices = OrderedDict([('original', ds)])
    for text in args.shock:
        spec = ShockSpec.parse(text, args.sensitive)
        slices[spec.label] = monitor.apply_shock(ds, spec)
    report = monitor.evaluate_over_slices(model, slices, args.sensitive,
                                          args.tau, args.model_id,
                                          args.truth)
    _emit(report, args)
    return 0


@require_seed
def monitor_shapley(args):
    ds = _read_dataset(args)
    model_1 = FairnessManager.load_model(args.model_1)
    model_2 = FairnessManager.load_model(args.model_2)
    report = monitor.group_delta_shapley(
        model_1, model_2, ds, args.sensitive, args.background, args.samples,
        args.seed, args.deprived)
    _emit(report, args)
    return 0


def monitor_retrain(args):
    ds = _read_dataset(args)
    individual = FairnessManager.load_model(args.model)
    model = monitor.retrain_on_surrogate(individual, ds, args.sensitive,
                                         args.tau, args.kind, args.epsilon)
    model.save_json(args.out)
    return 0


MONITOR_COMMANDS = {'slices': monitor_slices, 'shock': monitor_shock,
                    'shapley': monitor_shapley, 'retrain': monitor_retrain}


@require_seed
def cmd_repro(args):
    scenario, seed = args.scenario, args.seed
    overrides = {} if args.n is None else {'n': args.n}
    if scenario in ('historical', 'measurement'):
        if args.epsilon is not None:
            overrides['epsilon'] = args.epsilon
        result = FairnessManager.bias_interaction(scenario, seed=seed,
                                                  **overrides)
    elif scenario.startswith('fairview-'):
        report = FairnessManager.fairview_scenario(
            scenario.split('-', 1)[1], seed=seed, **overrides)
        result = report.as_dict()
        print(report.render_table())
    elif scenario == 'temporal':
        outcome = FairnessManager.temporal_scenario(seed=seed, **overrides)
        print(outcome['drift'].render_table())
        print(outcome['shapley'].render_table())
        result = OrderedDict((key, value.as_dict()
                              if hasattr(value, 'as_dict') else value)
                             for key, value in outcome.items())
    else:
        if args.fetch:
            adult.fetch(args.adult)
        result = FairnessManager.adult_kfold(args.delta, sensitive='sex',
                                             seed=seed, directory=args.adult)
    payload = {'scenario': scenario, 'seed': seed,
               'config_hash': config_hash(vars_config(args)),
               'result': result}
    if args.out:
        write_json(args.out, payload)
    if scenario in ('historical', 'measurement', 'adult'):
        print(dumps(payload))
    return 0


def cmd_run(args):
    config = ExperimentConfig.from_json(args.config)
    result = FairnessManager(config).run()
    print(dumps(result))
    return 0


def vars_config(args):
    """Arguments of a command as a hashable config dict."""
    return {key: value for key, value in sorted(vars(args).items())
            if key not in ('func', 'verbose')}


# parser

def _data_arguments(parser, weights=True):
    parser.add_argument('--data', required=True, help='CSV dataset')
    parser.add_argument('--schema', required=True, help='schema JSON')
    if weights:
        parser.add_argument('--weights', help='sample weight table JSON')


def _report_arguments(parser):
    parser.add_argument('--format', choices=('json', 'table'),
                        default='table')
    parser.add_argument('--out', help='report output path')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='fairness-manager',
        description='Fairness audits, mitigation and monitoring for '
                    'tabular classifiers.')
    parser.add_argument('-v', '--verbose', action='store_true')
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    p = commands.add_parser('generate', help='synthetic biased sample')
    p.add_argument('--config', help='bias spec JSON')
    p.add_argument('--out', required=True)
    p.add_argument('--schema-out')
    p.add_argument('--seed', type=int)
    p.add_argument('--view', action='store_true',
                   help='write the model view instead of every column')
    p.add_argument('--use-proxy-R', dest='use_proxy_R', action='store_true')
    p.add_argument('--omit-R', dest='omit_R', action='store_true',
                   default=None)
    p.add_argument('--label', choices=LABELS,
                   default='true_Y')
    p.add_argument('--hide-sensitive', action='store_true')
    p.set_defaults(func=cmd_generate)

    p = commands.add_parser('encode', help='quartile and one-hot encode')
    _data_arguments(p, weights=False)
    p.add_argument('--out', required=True)
    p.add_argument('--schema-out')
    p.add_argument('--map-out', required=True)
    p.set_defaults(func=cmd_encode)

    p = commands.add_parser('train', help='fit a tree or a score model')
    _data_arguments(p)
    p.add_argument('--model', choices=('fftree', 'linear'),
                   default='fftree')
    p.add_argument('--constraint', action='append', default=[],
                   metavar='KIND:DELTA:COLUMN')
    p.add_argument('--growth', help='growth config JSON')
    p.add_argument('--linear', help='linear config JSON')
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_train)

    p = commands.add_parser('evaluate', help='metric suite of a model')
    _data_arguments(p)
    p.add_argument('--model', required=True)
    p.add_argument('--model-id')
    p.add_argument('--family', choices=FAMILIES, default='none')
    p.add_argument('--sensitive')
    p.add_argument('--stratum')
    p.add_argument('--truth', help='column to measure against')
    p.add_argument('--tau', type=float, default=0.5)
    p.add_argument('--k', type=int, default=5)
    _report_arguments(p)
    p.set_defaults(func=cmd_evaluate)

    p = commands.add_parser('mitigate', help='pre or post processing')
    _data_arguments(p)
    p.add_argument('--method', choices=MITIGATION_METHODS, required=True)
    p.add_argument('--sensitive', required=True)
    p.add_argument('--stratum')
    p.add_argument('--model', help='base model (post) or ranker (massaging)')
    p.add_argument('--epsilon', type=float, default=0.0)
    p.add_argument('--corr-threshold', type=float, default=0.15)
    p.add_argument('--seed', type=int)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_mitigate)

    p = commands.add_parser('compare', help='rank evaluated models')
    p.add_argument('reports', nargs='+')
    p.add_argument('--phi-key', default='dp_diff')
    p.add_argument('--pi-key', default='f1')
    p.add_argument('--Phi', type=float, default=0.05)
    p.add_argument('--beta', type=float, default=1.0)
    _report_arguments(p)
    p.set_defaults(func=cmd_compare)

    p = commands.add_parser('fairview', help='worldview evidence')
    _data_arguments(p)
    p.add_argument('--sensitive', required=True)
    p.add_argument('--threshold', type=float, default=0.05)
    p.add_argument('--min-size', type=float, default=10)
    p.add_argument('--all-leaves', action='store_true')
    p.add_argument('--surrogate', help='surrogate config JSON')
    _report_arguments(p)
    p.set_defaults(func=cmd_fairview)

    p = commands.add_parser('monitor', help='fairness over time')
    sub = p.add_subparsers(dest='monitor_command')
    sub.required = True
    for name in ('slices', 'shock', 'shapley', 'retrain'):
        q = sub.add_parser(name)
        _data_arguments(q)
        q.add_argument('--sensitive', required=True)
        q.add_argument('--tau', type=float, default=0.5)
        if name == 'shapley':
            q.add_argument('--model-1', required=True)
            q.add_argument('--model-2', required=True)
            q.add_argument('--background', type=int)
            q.add_argument('--samples', type=int)
            q.add_argument('--deprived')
            q.add_argument('--seed', type=int)
        else:
            q.add_argument('--model', required=True)
        if name in ('slices', 'shock'):
            q.add_argument('--model-id', default='model')
            q.add_argument('--truth')
        if name == 'slices':
            q.add_argument('--slice-column', required=True)
        if name == 'shock':
            q.add_argument('--shock', action='append', required=True,
                           metavar='COLUMN:+Xsd[:CLASS]')
        if name == 'retrain':
            q.add_argument('--kind', default=DP)
            q.add_argument('--epsilon', type=float, default=0.0)
            q.add_argument('--out', required=True)
        else:
            _report_arguments(q)
    p.set_defaults(func=cmd_monitor)

    p = commands.add_parser('repro', help='scripted experiments')
    p.add_argument('scenario', choices=SCENARIOS)
    p.add_argument('--seed', type=int)
    p.add_argument('--n', type=int,
                   help='rows per sample (scenario default when absent)')
    p.add_argument('--epsilon', type=float)
    p.add_argument('--delta', type=float, action='append')
    p.add_argument('--adult', help='directory with the Adult files')
    p.add_argument('--fetch', action='store_true',
                   help='download the Adult files first')
    p.add_argument('--out')
    p.set_defaults(func=cmd_repro)

    p = commands.add_parser('run', help='named experiment pipeline')
    p.add_argument('--config', required=True)
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    set_level(logging.DEBUG if args.verbose else logging.INFO)
    if args.command == 'repro' and args.scenario == 'adult' and \
            not args.delta:
        args.delta = [0.05, 0.1, 0.15, 0.2]
    try:
        return args.func(args)
    except UsageException as e:
        sys.stderr.write('usage error: {}\n'.format(e))
        return 2
    except FairnessManagerException as e:
        sys.stderr.write('{}: {}\n'.format(type(e).__name__, e))
        return 1


if __name__ == '__main__':
    sys.exit(main())
