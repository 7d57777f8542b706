# -*- coding: utf-8 -*-
"""UCI Adult census income data: fetch, schema and load."""
import os

import numpy as np
import pandas as pd

from .constants import (ADULT_DIR_ENV, ADULT_FILES, ADULT_URL, CATEGORICAL,
                        DATA_DIR_PATH, FEATURE, LATENT, NUMERIC, SENSITIVE,
                        TARGET)
from .dataset import ColumnSchema, TabularDataset, derive_binary
from .exceptions import EmptyFile
from .log import get_logger
from .utils import download, urljoin

logger = get_logger(__name__)

COLUMNS = ('age', 'workclass', 'fnlwgt', 'education', 'education-num',
           'marital-status', 'occupation', 'relationship', 'race', 'sex',
           'capital-gain', 'capital-loss', 'hours-per-week',
           'native-country', 'income')
NUMERIC_COLUMNS = ('age', 'education-num', 'capital-gain', 'capital-loss',
                   'hours-per-week')


def adult_schema():
    schema = []
    for name in COLUMNS:
        if name == 'income':
            schema.append(ColumnSchema(name, NUMERIC, TARGET))
        elif name in ('sex', 'race'):
            schema.append(ColumnSchema(name, CATEGORICAL, SENSITIVE))
        elif name == 'fnlwgt':
            # census sampling weight, not an attribute of the person
            schema.append(ColumnSchema(name, NUMERIC, LATENT))
        elif name in NUMERIC_COLUMNS:
            schema.append(ColumnSchema(name, NUMERIC, FEATURE))
        else:
            schema.append(ColumnSchema(name, CATEGORICAL, FEATURE))
    return schema


def adult_dir(directory=None):
    return directory or os.environ.get(ADULT_DIR_ENV) or \
        os.path.join(DATA_DIR_PATH, 'adult')


def available(directory=None):
    directory = adult_dir(directory)
    return os.path.exists(os.path.join(directory, ADULT_FILES[0]))


def fetch(directory=None):
    directory = adult_dir(directory)
    return [download(urljoin(ADULT_URL, name), os.path.join(directory, name))
            for name in ADULT_FILES]


def _read(path):
    frame = pd.read_csv(path, header=None, names=list(COLUMNS),
                        skipinitialspace=True, na_values='?', comment='|',
                        dtype=str)
    frame = frame.dropna(how='all')
    missing = frame.isna().any(axis=1)
    if missing.any():
        logger.debug("dropping {} rows with missing values from {}".format(
            int(missing.sum()), path))
    return frame[~missing]


def load_adult(directory=None, include_test=True):
    """Adult rows without missing values, with a binary `Caucasian`
    sensitive column derived from `race`."""
    directory = adult_dir(directory)
    names = ADULT_FILES if include_test else ADULT_FILES[:1]
    frames = [_read(os.path.join(directory, name)) for name in names
              if os.path.exists(os.path.join(directory, name))]
    if not frames:
        raise EmptyFile("no Adult files under '{}'".format(directory))
    frame = pd.concat(frames, ignore_index=True)
    values = {}
    for column in adult_schema():
        raw = frame[column.name].str.strip()
        if column.name == 'income':
            values[column.name] = raw.str.startswith('>50K').astype(
                np.float64).values
        elif column.kind == NUMERIC:
            values[column.name] = raw.astype(np.float64).values
        else:
            values[column.name] = raw.tolist()
    ds = TabularDataset.build(adult_schema(), values, name='adult')
    ds = derive_binary(ds, 'race', ['White'], 'Caucasian')
    logger.info("loaded {} Adult rows".format(ds.n_rows))
    return ds
