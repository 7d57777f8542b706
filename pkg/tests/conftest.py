# -*- coding: utf-8 -*-
import json
import os
from collections import OrderedDict

import numpy as np
import pytest

from fairness_manager.constants import (CATEGORICAL, FEATURE, NUMERIC,
                                        SENSITIVE, SLICE, TARGET)
from fairness_manager.dataset import ColumnSchema, TabularDataset

ADULT_DIR = os.environ.get('FAIRNESS_ADULT_DIR')


def build_dataset(features, y, sensitive=None, exposed=False, weights=None,
                  categorical=None, slices=None, name='test'):
    """Dataset from plain python values.

    features: name -> numbers; sensitive and categorical: name -> labels,
    classes sorted so that codes follow label order.
    """
    schema, columns, classes = [], {}, {}
    for column_name, values in features.items():
        schema.append(ColumnSchema(column_name, NUMERIC, FEATURE))
        columns[column_name] = np.asarray(values, dtype=np.float64)
    for role, group in ((FEATURE, categorical), (SENSITIVE, sensitive),
                        (SLICE, slices)):
        for column_name, labels in (group or {}).items():
            labels = [str(v) for v in labels]
            ordered = tuple(sorted(set(labels)))
            schema.append(ColumnSchema(
                column_name, CATEGORICAL, role,
                exposed=exposed and role == SENSITIVE))
            columns[column_name] = [ordered.index(v) for v in labels]
            classes[column_name] = ordered
    schema.append(ColumnSchema('y', NUMERIC, TARGET))
    columns['y'] = np.asarray(y, dtype=np.float64)
    return TabularDataset(schema, columns, classes, weights, name)


def random_binary_dataset(rng, n_rows, n_features, with_group=True):
    X = rng.integers(0, 2, size=(n_rows, n_features))
    # labels depend on a couple of features plus noise
    logits = X[:, 0] * 1.5 - X[:, 1 % n_features] + \
        rng.normal(0.0, 1.0, n_rows)
    y = (logits > 0.2).astype(int)
    features = OrderedDict(('f{}'.format(j), X[:, j])
                           for j in range(n_features))
    sensitive = {'g': rng.integers(0, 2, n_rows)} if with_group else None
    return build_dataset(features, y, sensitive)


@pytest.fixture
def make_dataset():
    return build_dataset


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def credit_csv(tmp_path):
    """A small headed CSV plus its schema file."""
    rows = [
        ('age', 'color', 'gender', 'income'),
        ('25', 'red', 'f', '1'),
        ('38', 'blue', 'm', '0'),
        ('47', 'green', 'f', '1'),
        ('51', 'red', 'm', '1'),
        ('29', 'blue', 'f', '0'),
        ('33', 'green', 'm', '0'),
    ]
    data = tmp_path / 'credit.csv'
    data.write_text('\n'.join(','.join(r) for r in rows) + '\n')
    schema = tmp_path / 'credit.schema.json'
    schema.write_text(json.dumps({'columns': [
        {'name': 'age', 'kind': 'numeric', 'role': 'feature'},
        {'name': 'color', 'kind': 'categorical', 'role': 'feature'},
        {'name': 'gender', 'kind': 'categorical', 'role': 'sensitive'},
        {'name': 'income', 'kind': 'numeric', 'role': 'target'},
    ]}))
    return str(data), str(schema)


@pytest.fixture
def biased_pair():
    """Two groups with different base rates and a group-correlated
    feature, large enough for the linear model and the policies."""
    rng = np.random.default_rng(7)
    n = 2000
    a = rng.integers(0, 2, n)
    x1 = rng.normal(0.0, 1.0, n) - 0.8 * a
    x2 = rng.normal(0.0, 1.0, n)
    y = (x1 + 0.5 * x2 + rng.normal(0.0, 0.7, n) > 0).astype(int)
    return build_dataset(OrderedDict([('x1', x1), ('x2', x2)]), y,
                         {'a': a})


def adult_available():
    from fairness_manager.adult import available
    return available(ADULT_DIR)
