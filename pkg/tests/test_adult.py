# -*- coding: utf-8 -*-
import pytest

from fairness_manager.adult import (adult_schema, available, fetch,
                                    load_adult)
from fairness_manager.constants import LATENT, SENSITIVE, TARGET
from fairness_manager.exceptions import EmptyFile

TRAIN_ROWS = [
    '39, State-gov, 77516, Bachelors, 13, Never-married, Adm-clerical, '
    'Not-in-family, White, Male, 2174, 0, 40, United-States, <=50K',
    '50, Self-emp-not-inc, 83311, Bachelors, 13, Married-civ-spouse, '
    'Exec-managerial, Husband, White, Male, 0, 0, 13, United-States, >50K',
    '38, ?, 215646, HS-grad, 9, Divorced, Handlers-cleaners, '
    'Not-in-family, White, Male, 0, 0, 40, United-States, <=50K',
]
TEST_ROWS = [
    '|1x3 Cross validator',
    '25, Private, 226802, 11th, 7, Never-married, Machine-op-inspct, '
    'Own-child, Black, Female, 0, 0, 40, United-States, >50K.',
]


@pytest.fixture
def adult_dir(tmp_path):
    (tmp_path / 'adult.data').write_text('\n'.join(TRAIN_ROWS) + '\n')
    (tmp_path / 'adult.test').write_text('\n'.join(TEST_ROWS) + '\n')
    return str(tmp_path)


def test_schema_roles():
    roles = {c.name: c.role for c in adult_schema()}
    assert roles['income'] == TARGET
    assert roles['sex'] == roles['race'] == SENSITIVE
    assert roles['fnlwgt'] == LATENT


def test_load_drops_missing_rows_and_derives_caucasian(adult_dir):
    assert available(adult_dir)
    ds = load_adult(adult_dir)
    assert ds.n_rows == 3
    assert ds.y.tolist() == [0.0, 1.0, 1.0]
    assert ds.labels('Caucasian').tolist() == ['1', '1', '0']
    assert ds.is_sensitive('Caucasian')
    assert load_adult(adult_dir, include_test=False).n_rows == 2


def test_missing_files(tmp_path):
    assert not available(str(tmp_path))
    with pytest.raises(EmptyFile):
        load_adult(str(tmp_path))


class _Response(object):
    def __init__(self, url):
        self.url = url

    def raise_for_status(self):
        pass

    def iter_content(self, chunk_size):
        yield TRAIN_ROWS[0].encode('utf-8')


def test_fetch_downloads_each_file_once(tmp_path, monkeypatch):
    calls = []

    def get(url, **kwargs):
        calls.append(url)
        return _Response(url)

    monkeypatch.setattr('fairness_manager.utils.requests.get', get)
    paths = fetch(str(tmp_path))
    assert [p.split('/')[-1] for p in paths] == ['adult.data', 'adult.test']
    assert calls[0].endswith('/adult/adult.data')
    assert (tmp_path / 'adult.data').read_text() == TRAIN_ROWS[0]
    fetch(str(tmp_path))
    assert len(calls) == 2
