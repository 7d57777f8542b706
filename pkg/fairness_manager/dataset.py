# -*- coding: utf-8 -*-
"""Tabular data model: schema, CSV ingestion, encoding, splits and slices.

Numeric columns are float64 vectors. Categorical columns are int64 codes
into a per-column tuple of class labels, interned in first-appearance
order. Datasets never change after construction; every operation returns
a new one sharing the untouched column vectors.
"""
import json

import numpy as np
import pandas as pd

from .constants import (CATEGORICAL, COLUMN_KINDS, COLUMN_ROLES, FEATURE,
                        NUMERIC, SENSITIVE, SLICE, STRATUM, TARGET)
from .exceptions import (BadK, DegenerateSplit, EmptyFile, MissingColumn,
                         MissingValue, NoSliceColumn, NoSuchColumn,
                         NotSensitive, SchemaException, UnencodedData,
                         UnparsableValue)
from .log import get_logger
from .mixins import SerializableMixin
from .os_utils import atomic_write
from .utils import read_json

logger = get_logger(__name__)


class ColumnSchema(object):
    def __init__(self, name, kind, role, exposed=False):
        if kind not in COLUMN_KINDS:
            raise SchemaException(
                "column '{}' has unknown kind '{}'".format(name, kind))
        if role not in COLUMN_ROLES:
            raise SchemaException(
                "column '{}' has unknown role '{}'".format(name, role))
        if exposed and role != SENSITIVE:
            raise SchemaException(
                "only sensitive columns can be exposed to models")
        self.name = name
        self.kind = kind
        self.role = role
        # a sensitive column the model is allowed to read
        self.exposed = bool(exposed)

    def replace(self, **changes):
        data = self.as_dict()
        data.update(changes)
        return ColumnSchema(**data)

    def as_dict(self):
        d = {'name': self.name, 'kind': self.kind, 'role': self.role}
        if self.exposed:
            d['exposed'] = True
        return d

    @classmethod
    def from_dict(cls, data):
        return cls(data['name'], data['kind'], data['role'],
                   data.get('exposed', False))

    def __eq__(self, other):
        return isinstance(other, ColumnSchema) and \
            self.as_dict() == other.as_dict()

    def __repr__(self):
        return "ColumnSchema({name!r}, {kind!r}, {role!r})".format(
            **self.as_dict())


def validate_schema(schema):
    names = [column.name for column in schema]
    if len(names) != len(set(names)):
        raise SchemaException("column names must be unique")
    targets = [column for column in schema if column.role == TARGET]
    if len(targets) != 1:
        raise SchemaException(
            "exactly one target column required, found {}".format(
                len(targets)))
    if targets[0].kind != NUMERIC:
        raise SchemaException("the target column must be numeric 0/1")
    for column in schema:
        if column.role in (SENSITIVE, STRATUM) and \
                column.kind != CATEGORICAL:
            raise SchemaException(
                "{} column '{}' must be categorical".format(
                    column.role, column.name))
    return schema


def load_schema(path):
    data = read_json(path)
    return validate_schema(
        [ColumnSchema.from_dict(column) for column in data['columns']])


def save_schema(schema, path):
    with atomic_write(path) as f:
        json.dump({'columns': [column.as_dict() for column in schema]}, f,
                  indent=2, sort_keys=True)
    return path


def _frozen(array):
    array = np.ascontiguousarray(array)
    array.setflags(write=False)
    return array


def intern_classes(values):
    """Codes and class labels in first-appearance order."""
    codes, uniques = pd.factorize(pd.Series(list(values), dtype=object),
                                  sort=False)
    return codes.astype(np.int64), tuple(uniques.tolist())


class TabularDataset(SerializableMixin):
    def __init__(self, schema, columns, classes=None, weights=None,
                 name=None):
        self.schema = tuple(validate_schema(list(schema)))
        self.name = name
        self._by_name = {column.name: column for column in self.schema}
        classes = dict(classes or {})
        self._columns = {}
        self._classes = {}
        n_rows = None
        for column in self.schema:
            if column.name not in columns:
                raise MissingColumn(column.name)
            if column.kind == NUMERIC:
                values = np.asarray(columns[column.name], dtype=np.float64)
            else:
                values = np.asarray(columns[column.name], dtype=np.int64)
                if column.name not in classes:
                    raise SchemaException(
                        "categorical column '{}' needs its classes".format(
                            column.name))
                self._classes[column.name] = tuple(classes[column.name])
                if values.size and (values.min() < 0 or values.max() >= len(
                        self._classes[column.name])):
                    raise SchemaException(
                        "codes of '{}' out of range".format(column.name))
            if n_rows is None:
                n_rows = values.shape[0]
            if values.ndim != 1 or values.shape[0] != n_rows:
                raise SchemaException(
                    "column '{}' has {} rows, expected {}".format(
                        column.name, values.shape[0], n_rows))
            self._columns[column.name] = _frozen(values)
        self.n_rows = int(n_rows or 0)
        if weights is None:
            weights = np.ones(self.n_rows)
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (self.n_rows,):
            raise SchemaException("weights must have one entry per row")
        if self.n_rows and (np.any(weights < 0) or not np.any(weights > 0)
                            or not np.all(np.isfinite(weights))):
            raise SchemaException(
                "weights must be finite, >= 0, and not all zero")
        self.weights = _frozen(weights)
        y = self._columns[self.target_name]
        if not np.all((y == 0) | (y == 1)):
            raise SchemaException("target values must be 0 or 1")

    @classmethod
    def build(cls, schema, values, weights=None, name=None):
        """Intern raw categorical values and coerce numeric ones."""
        columns, classes = {}, {}
        for column in schema:
            raw = values[column.name]
            if column.kind == CATEGORICAL:
                columns[column.name], classes[column.name] = \
                    intern_classes(raw)
            else:
                columns[column.name] = np.asarray(raw, dtype=np.float64)
        return cls(schema, columns, classes, weights, name)

    def __len__(self):
        return self.n_rows

    def __eq__(self, other):
        if not isinstance(other, TabularDataset):
            return False
        if self.schema != other.schema or self.n_rows != other.n_rows:
            return False
        if self._classes != other._classes:
            return False
        return all(np.array_equal(self._columns[c], other._columns[c])
                   for c in self.names) and \
            np.array_equal(self.weights, other.weights)

    def __repr__(self):
        return "TabularDataset(name={!r}, n_rows={}, columns={})".format(
            self.name, self.n_rows, list(self.names))

    @property
    def names(self):
        return tuple(column.name for column in self.schema)

    def has_column(self, name):
        return name in self._by_name

    def column_schema(self, name):
        if name not in self._by_name:
            raise NoSuchColumn(name)
        return self._by_name[name]

    def column(self, name):
        self.column_schema(name)
        return self._columns[name]

    def classes(self, name):
        self.column_schema(name)
        return self._classes.get(name, ())

    def labels(self, name):
        """Decoded column values (class labels for categoricals)."""
        values = self.column(name)
        if self.column_schema(name).kind == NUMERIC:
            return values
        classes = np.empty(len(self._classes[name]), dtype=object)
        classes[:] = self._classes[name]
        return classes[values]

    def names_with_role(self, role):
        return tuple(c.name for c in self.schema if c.role == role)

    @property
    def target_name(self):
        return self.names_with_role(TARGET)[0]

    @property
    def y(self):
        return self._columns[self.target_name].astype(np.int64)

    @property
    def sensitive_names(self):
        return self.names_with_role(SENSITIVE)

    @property
    def feature_names(self):
        """Columns a model may read: features plus exposed sensitives."""
        return tuple(c.name for c in self.schema
                     if c.role == FEATURE or (c.role == SENSITIVE and
                                              c.exposed))

    def is_sensitive(self, name):
        return self.column_schema(name).role == SENSITIVE

    def group_codes(self, name):
        column = self.column_schema(name)
        if column.kind != CATEGORICAL:
            raise NotSensitive(name)
        return self._columns[name]

    def feature_matrix(self, names=None):
        names = self.feature_names if names is None else names
        blocks = []
        for name in names:
            column = self.column_schema(name)
            values = self._columns[name]
            if column.kind == CATEGORICAL:
                if len(self._classes[name]) > 2:
                    raise UnencodedData(
                        "categorical column '{}' must be one-hot encoded "
                        "before modelling".format(name))
                values = values.astype(np.float64)
            blocks.append(values)
        if not blocks:
            return np.zeros((self.n_rows, 0))
        return np.column_stack(blocks)

    def frame(self, decode=True):
        data = {}
        for name in self.names:
            data[name] = self.labels(name) if decode else self.column(name)
        return pd.DataFrame(data, columns=list(self.names))

    # derived datasets

    def _derive(self, schema=None, columns=None, classes=None,
                weights=None, name=None):
        return TabularDataset(
            self.schema if schema is None else schema,
            self._columns if columns is None else columns,
            self._classes if classes is None else classes,
            self.weights if weights is None else weights,
            self.name if name is None else name)

    def select_rows(self, rows):
        rows = np.asarray(rows)
        if rows.dtype == bool:
            rows = np.flatnonzero(rows)
        columns = {name: values[rows]
                   for name, values in self._columns.items()}
        return self._derive(columns=columns, weights=self.weights[rows])

    def with_weights(self, weights):
        return self._derive(weights=weights)

    def with_column(self, column_schema, values, classes=None):
        schema = [c for c in self.schema if c.name != column_schema.name]
        schema.append(column_schema)
        columns = dict(self._columns)
        columns[column_schema.name] = values
        all_classes = dict(self._classes)
        all_classes.pop(column_schema.name, None)
        if classes is not None:
            all_classes[column_schema.name] = classes
        return self._derive(schema=schema, columns=columns,
                            classes=all_classes)

    def with_values(self, name, values):
        """Same column, new values (classes kept for categoricals)."""
        self.column_schema(name)
        columns = dict(self._columns)
        columns[name] = values
        return self._derive(columns=columns)

    def with_target(self, values):
        return self.with_values(self.target_name, values)

    def with_roles(self, **roles):
        schema = []
        for column in self.schema:
            if column.name in roles:
                exposed = column.exposed and roles[column.name] == SENSITIVE
                column = column.replace(role=roles[column.name],
                                        exposed=exposed)
            schema.append(column)
        return self._derive(schema=schema)

    def with_exposed(self, name, exposed=True):
        if not self.is_sensitive(name):
            raise NotSensitive(name)
        schema = [c.replace(exposed=exposed) if c.name == name else c
                  for c in self.schema]
        return self._derive(schema=schema)

    def drop_columns(self, names):
        names = set(names)
        for name in names:
            self.column_schema(name)
        schema = [c for c in self.schema if c.name not in names]
        columns = {k: v for k, v in self._columns.items() if k not in names}
        classes = {k: v for k, v in self._classes.items() if k not in names}
        return self._derive(schema=schema, columns=columns, classes=classes)

    def as_dict(self):
        return {'name': self.name, 'n_rows': self.n_rows,
                'schema': [c.as_dict() for c in self.schema]}


def concat(datasets):
    first = datasets[0]
    columns, classes = {}, {}
    for column in first.schema:
        name = column.name
        if column.kind == CATEGORICAL:
            merged = []
            for ds in datasets:
                merged.extend(ds.labels(name).tolist())
            columns[name], classes[name] = intern_classes(merged)
        else:
            columns[name] = np.concatenate([ds.column(name)
                                            for ds in datasets])
    weights = np.concatenate([ds.weights for ds in datasets])
    return TabularDataset(first.schema, columns, classes, weights,
                          first.name)


def _parse_cell(raw, column, row):
    if raw is None or not str(raw).strip():
        raise MissingValue(row, column.name)
    text = str(raw).strip()
    if column.kind == CATEGORICAL:
        return text
    try:
        value = float(text)
    except ValueError:
        raise UnparsableValue(row, column.name, text)
    if not np.isfinite(value):
        raise UnparsableValue(row, column.name, text)
    if column.role == TARGET and value not in (0.0, 1.0):
        raise UnparsableValue(row, column.name, text)
    return value


def load_csv(path, schema, name=None):
    """Parse a headed UTF-8 CSV into a dataset in schema order.

    Row numbers in errors count data rows from 1 (the header is row 0).
    """
    schema = validate_schema(list(schema))
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False,
                            na_filter=False, encoding='utf-8')
    except pd.errors.EmptyDataError:
        raise EmptyFile("'{}' is empty".format(path))
    if frame.shape[0] == 0:
        raise EmptyFile("'{}' has a header but no rows".format(path))
    frame.columns = [str(c).strip() for c in frame.columns]
    for column in schema:
        if column.name not in frame.columns:
            raise MissingColumn(column.name)
    values = {}
    for column in schema:
        raw = frame[column.name].tolist()
        values[column.name] = [_parse_cell(cell, column, i + 1)
                               for i, cell in enumerate(raw)]
    ds = TabularDataset.build(schema, values, name=name or path)
    logger.info("loaded {} rows from {}".format(ds.n_rows, path))
    return ds


def save_csv(ds, path):
    frame = ds.frame()
    for column in ds.schema:
        if column.kind == CATEGORICAL:
            frame[column.name] = [
                '|'.join(map(str, v)) if isinstance(v, tuple) else v
                for v in frame[column.name]]
        elif column.role == TARGET:
            frame[column.name] = frame[column.name].astype(np.int64)
    with atomic_write(path) as f:
        frame.to_csv(f, index=False, float_format='%.17g')
    return path


# encoding

QUARTILES = (25.0, 50.0, 75.0)


def _fmt(value):
    return '{:g}'.format(value)


class EncodingMap(SerializableMixin):
    """Per source feature column: cut points or class list, and the names
    of the indicator columns generated for it."""

    def __init__(self, entries, warnings=()):
        self.entries = list(entries)
        self.warnings = list(warnings)

    @property
    def source_columns(self):
        return [entry['column'] for entry in self.entries]

    @property
    def indicator_names(self):
        names = []
        for entry in self.entries:
            names.extend(entry['indicators'])
        return names

    def source_of(self, indicator):
        for entry in self.entries:
            if indicator in entry['indicators']:
                return entry['column']
        return None

    @staticmethod
    def fit_numeric(name, values):
        distinct = np.unique(values)
        if distinct.size >= 4:
            cuts = np.unique(np.percentile(values, QUARTILES,
                                           method='linear'))
            method = 'quartile'
        else:
            cuts = (distinct[:-1] + distinct[1:]) / 2.0
            method = 'distinct'
        cuts = [float(c) for c in cuts]
        if not cuts:
            indicators = ['{}=={}'.format(name, _fmt(distinct[0]))]
        else:
            indicators = ['{}<{}'.format(name, _fmt(cuts[0]))]
            for lo, hi in zip(cuts[:-1], cuts[1:]):
                indicators.append('{}[{},{})'.format(name, _fmt(lo),
                                                     _fmt(hi)))
            indicators.append('{}>={}'.format(name, _fmt(cuts[-1])))
        return {'column': name, 'kind': NUMERIC, 'method': method,
                'cuts': cuts, 'indicators': indicators}

    @staticmethod
    def fit_categorical(name, labels):
        _, classes = intern_classes(labels)
        return {'column': name, 'kind': CATEGORICAL, 'method': 'onehot',
                'classes': [str(c) for c in classes],
                'indicators': ['{}={}'.format(name, c) for c in classes]}

    def apply(self, ds, return_flags=False):
        flags = []
        result = ds
        for entry in self.entries:
            name = entry['column']
            if not ds.has_column(name):
                # already encoded through this map
                if all(ds.has_column(i) for i in entry['indicators']):
                    continue
                raise MissingColumn(name)
            indicators = np.zeros((ds.n_rows, len(entry['indicators'])))
            if entry['kind'] == NUMERIC:
                values = ds.column(name)
                bins = np.searchsorted(np.asarray(entry['cuts']), values,
                                       side='right')
                indicators[np.arange(ds.n_rows), bins] = 1.0
            else:
                labels = [str(v) for v in ds.labels(name)]
                lookup = {c: i for i, c in enumerate(entry['classes'])}
                unseen = 0
                for row, label in enumerate(labels):
                    position = lookup.get(label)
                    if position is None:
                        unseen += 1
                    else:
                        indicators[row, position] = 1.0
                if unseen:
                    flags.append({'column': name, 'flag': 'unseen_class',
                                  'rows': unseen})
                    logger.warning(
                        "{} rows of '{}' hold classes unseen at fit "
                        "time".format(unseen, name))
            result = result.drop_columns([name])
            for position, indicator in enumerate(entry['indicators']):
                result = result.with_column(
                    ColumnSchema(indicator, NUMERIC, FEATURE),
                    indicators[:, position])
        if return_flags:
            return result, flags
        return result

    def as_dict(self):
        return {'entries': self.entries, 'warnings': self.warnings}

    @classmethod
    def from_dict(cls, data):
        return cls(data['entries'], data.get('warnings', ()))

    @classmethod
    def from_json(cls, path):
        return cls.from_dict(read_json(path))

    def __eq__(self, other):
        return isinstance(other, EncodingMap) and \
            self.as_dict() == other.as_dict()


def encode(ds, fit_rows=None):
    """Quartile-bin numeric features, then one-hot every feature.

    The map is fitted on `fit_rows` only; sensitive, target, stratum,
    slice and latent columns pass through unchanged.
    """
    if fit_rows is None:
        fit_rows = np.ones(ds.n_rows, dtype=bool)
    fit_rows = np.asarray(fit_rows)
    if fit_rows.dtype != bool:
        mask = np.zeros(ds.n_rows, dtype=bool)
        mask[fit_rows] = True
        fit_rows = mask
    if not fit_rows.any():
        raise DegenerateSplit("encode needs at least one fit row")
    entries, warnings = [], []
    for name in ds.names_with_role(FEATURE):
        column = ds.column_schema(name)
        if column.kind == NUMERIC:
            entry = EncodingMap.fit_numeric(name, ds.column(name)[fit_rows])
        else:
            entry = EncodingMap.fit_categorical(
                name, ds.labels(name)[fit_rows])
        if len(entry['indicators']) == 1:
            warnings.append({'column': name, 'flag': 'constant_column'})
            logger.warning(
                "feature '{}' is constant on the fit rows".format(name))
        entries.append(entry)
    encoding = EncodingMap(entries, warnings)
    return encoding.apply(ds), encoding


# splitting


def _allocate(counts, total):
    """Largest-remainder apportionment of `total` across `counts`."""
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum()
    exact = counts * total / n
    quota = np.floor(exact).astype(np.int64)
    remainder = int(total - quota.sum())
    order = sorted(range(len(counts)),
                   key=lambda i: (-(exact[i] - quota[i]), i))
    for i in order[:remainder]:
        quota[i] += 1
    return quota


def split(ds, test_fraction, seed, stratify_on=None):
    if not 0 < test_fraction < 1:
        raise DegenerateSplit("test_fraction must be in (0,1)")
    if ds.n_rows < 2:
        raise DegenerateSplit("split needs at least 2 rows")
    n_test = int(round(test_fraction * ds.n_rows))
    if n_test == 0 or n_test == ds.n_rows:
        raise DegenerateSplit(
            "{} of {} rows leaves an empty side".format(n_test, ds.n_rows))
    rng = np.random.default_rng(seed)
    if stratify_on is None:
        test = rng.permutation(ds.n_rows)[:n_test]
    else:
        codes = ds.column(stratify_on).astype(np.int64)
        strata = np.unique(codes)
        members = [np.flatnonzero(codes == c) for c in strata]
        quota = _allocate([len(m) for m in members], n_test)
        test = np.concatenate([rng.permutation(m)[:q]
                               for m, q in zip(members, quota)])
    mask = np.zeros(ds.n_rows, dtype=bool)
    mask[test] = True
    return ds.select_rows(~mask), ds.select_rows(mask)


def kfold_indices(n_rows, k, seed):
    if not isinstance(k, int) or k < 2:
        raise BadK("k must be an integer >= 2, got {!r}".format(k))
    if n_rows < k:
        raise BadK("k={} exceeds the {} rows".format(k, n_rows))
    rng = np.random.default_rng(seed)
    folds = np.array_split(rng.permutation(n_rows), k)
    pairs = []
    for fold in folds:
        mask = np.zeros(n_rows, dtype=bool)
        mask[fold] = True
        pairs.append((np.flatnonzero(~mask), np.flatnonzero(mask)))
    return pairs


def kfold(ds, k, seed):
    return [(ds.select_rows(train), ds.select_rows(validation))
            for train, validation in kfold_indices(ds.n_rows, k, seed)]


# sensitive attributes and slices


def intersect_sensitive(ds, attrs, name=None):
    attrs = list(attrs)
    if len(attrs) < 2:
        raise SchemaException("intersection needs at least two columns")
    for attr in attrs:
        if not ds.has_column(attr) or not ds.is_sensitive(attr):
            raise NotSensitive(attr)
    labels = list(zip(*[ds.labels(attr).tolist() for attr in attrs]))
    codes, classes = intern_classes(labels)
    name = name or '&'.join(attrs)
    return ds.with_column(ColumnSchema(name, CATEGORICAL, SENSITIVE),
                          codes, classes)


def derive_binary(ds, column, positive_classes, name=None):
    """Collapse a categorical column into a binary sensitive one."""
    positive_classes = set(str(c) for c in positive_classes)
    labels = ds.labels(column)
    flags = np.array([str(v) in positive_classes for v in labels])
    values = np.where(flags, '1', '0')
    codes, classes = intern_classes(values)
    name = name or '{}_binary'.format(column)
    return ds.with_column(ColumnSchema(name, CATEGORICAL, SENSITIVE),
                          codes, classes)


def _slice_sort_key(label):
    try:
        return (0, float(label), '')
    except (TypeError, ValueError):
        return (1, 0.0, str(label))


def slice_by(ds, column):
    if not ds.has_column(column) or \
            ds.column_schema(column).role != SLICE:
        raise NoSliceColumn(
            "'{}' is not a slice-role column".format(column))
    if ds.column_schema(column).kind == NUMERIC:
        values = ds.column(column)
        keys = sorted(np.unique(values).tolist())
        return [(key, ds.select_rows(values == key)) for key in keys]
    labels = ds.labels(column)
    keys = sorted(set(labels.tolist()), key=_slice_sort_key)
    return [(key, ds.select_rows(labels == key)) for key in keys]
