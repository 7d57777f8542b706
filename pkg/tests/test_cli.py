# -*- coding: utf-8 -*-
import json

import pytest

from fairness_manager.cli import main


def _generate(tmp_path, name='view', seed=5, extra=()):
    config = tmp_path / 'spec.json'
    config.write_text(json.dumps({'n': 2000, 'beta_h_R': 1.5}))
    out = str(tmp_path / '{}.csv'.format(name))
    assert main(['generate', '--config', str(config), '--seed', str(seed),
                 '--out', out] + list(extra)) == 0
    return out, str(tmp_path / '{}.schema.json'.format(name))


def test_generate_is_reproducible(tmp_path):
    first, _ = _generate(tmp_path, 'first')
    second, _ = _generate(tmp_path, 'second')
    with open(first, 'rb') as f, open(second, 'rb') as g:
        assert f.read() == g.read()
    with open(first + '.json') as f:
        assert json.load(f)['spec']['seed'] == 5


def test_generated_view_follows_the_spec_omission_switch(tmp_path):
    config = tmp_path / 'omit.json'
    config.write_text(json.dumps({'n': 500, 'omit_R': True}))
    out = str(tmp_path / 'omit.csv')
    assert main(['generate', '--config', str(config), '--seed', '1',
                 '--out', out, '--view']) == 0
    with open(str(tmp_path / 'omit.schema.json')) as f:
        roles = {c['name']: c['role'] for c in json.load(f)['columns']}
    assert roles['R'] == 'latent'
    assert roles['Q'] == 'feature'


def test_randomized_commands_need_a_seed(tmp_path, capsys):
    code = main(['generate', '--out', str(tmp_path / 'x.csv')])
    assert code == 2
    assert '--seed' in capsys.readouterr().err


@pytest.mark.parametrize('argv', [
    [],
    ['shuffle'],
    ['generate', '--seed', '1'],
    ['compare'],
])
def test_usage_errors_exit_with_two(argv):
    assert main(argv) == 2


def test_domain_errors_exit_with_one(credit_csv, tmp_path, capsys):
    data, schema = credit_csv
    code = main(['train', '--data', data, '--schema', schema,
                 '--constraint', 'DP:0.1:race',
                 '--out', str(tmp_path / 'tree.json')])
    assert code == 1
    assert capsys.readouterr().err.startswith('NoSensitiveColumn:')


def test_constraints_only_apply_to_trees(credit_csv, tmp_path):
    data, schema = credit_csv
    assert main(['train', '--data', data, '--schema', schema,
                 '--model', 'linear', '--constraint', 'DP:0.1:gender',
                 '--out', str(tmp_path / 'm.json')]) == 2


def test_encode_writes_the_encoding_map(credit_csv, tmp_path):
    data, schema = credit_csv
    map_out = tmp_path / 'map.json'
    assert main(['encode', '--data', data, '--schema', schema,
                 '--out', str(tmp_path / 'enc.csv'),
                 '--map-out', str(map_out)]) == 0
    assert map_out.exists()
    assert (tmp_path / 'enc.schema.json').exists()


def test_train_mitigate_evaluate_compare(tmp_path, capsys):
    data, schema = _generate(tmp_path, extra=['--view'])
    common = ['--data', data, '--schema', schema]
    base = str(tmp_path / 'base.json')
    fair = str(tmp_path / 'fair.json')
    assert main(['train'] + common + ['--model', 'linear',
                                      '--out', base]) == 0
    assert main(['mitigate'] + common + [
        '--method', 'thresh-dp', '--sensitive', 'A', '--model', base,
        '--epsilon', '0.02', '--seed', '1', '--out', fair]) == 0
    with open(fair) as f:
        policy = json.load(f)['policy']
    assert policy['achieved_gap'] <= 0.02 + 1e-12

    reports = []
    for model, family in ((base, 'none'), (fair, 'post')):
        report = model.replace('.json', '.report.json')
        assert main(['evaluate'] + common + [
            '--model', model, '--family', family, '--sensitive', 'A',
            '--format', 'json', '--out', report]) == 0
        reports.append(report)
    with open(reports[1]) as f:
        assert abs(json.load(f)['metrics']['dp_diff']) <= 0.02 + 1e-9

    comparison = str(tmp_path / 'comparison.json')
    assert main(['compare'] + reports + ['--Phi', '0.05', '--format',
                                         'json', '--out', comparison]) == 0
    assert 'winner: fair' in capsys.readouterr().out
    with open(comparison) as f:
        data = json.load(f)
    assert data['winner'] == 'fair'
    assert [row['family'] for row in data['models']] == ['none', 'post']
