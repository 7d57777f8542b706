# -*- coding: utf-8 -*-
import hashlib
import json
import math
import os

import numpy as np
import requests
from scipy.special import expit

from .log import get_logger
from .os_utils import atomic_write, create_directory

logger = get_logger(__name__)


def sigmoid(z):
    # expit branches on the sign internally, no overflow for large |z|
    return expit(np.asarray(z, dtype=np.float64))


def fsum(values):
    """Order independent, correctly rounded sum."""
    return math.fsum(np.asarray(values, dtype=np.float64).ravel().tolist())


_GOLDEN = np.uint64(0x9e3779b97f4a7c15)
_MIX = (np.uint64(0xbf58476d1ce4e5b9), np.uint64(0x94d049bb133111eb))


def _mix64(z):
    # splitmix64 finalizer; uint64 arithmetic wraps
    z = (z ^ (z >> np.uint64(30))) * _MIX[0]
    z = (z ^ (z >> np.uint64(27))) * _MIX[1]
    return z ^ (z >> np.uint64(31))


def _hash64(value):
    return np.uint64(int(hashlib.sha256(
        str(value).encode('utf-8')).hexdigest()[:16], 16))


def keyed_uniforms(values, keys, seed=0):
    """One uniform in [0,1) per row from (seed, key, value).

    Rows repeating the same (key, value) are told apart by their
    occurrence count, so a row's draw never depends on its position
    among distinct rows.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    bits = values.view(np.uint64)
    hashes = {k: _hash64(k) for k in set(keys)}
    kh = np.array([hashes[k] for k in keys], dtype=np.uint64)
    order = np.lexsort((bits, kh))
    same = np.zeros(bits.size, dtype=bool)
    same[1:] = (bits[order][1:] == bits[order][:-1]) & \
        (kh[order][1:] == kh[order][:-1])
    starts = np.maximum.accumulate(
        np.where(same, 0, np.arange(bits.size)))
    occurrence = np.empty(bits.size, dtype=np.uint64)
    occurrence[order] = np.arange(bits.size) - starts
    z = _mix64(_mix64(bits ^ _hash64(seed)) ^ kh)
    z = _mix64(z + occurrence * _GOLDEN)
    return (z >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    if hasattr(obj, 'as_dict'):
        return obj.as_dict()
    raise TypeError("{!r} is not JSON serializable".format(obj))


def dumps(data, indent=2):
    return json.dumps(data, default=json_default, sort_keys=True,
                      indent=indent)


def config_hash(data):
    canonical = json.dumps(data, default=json_default, sort_keys=True,
                           separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def write_json(path, data):
    with atomic_write(path) as f:
        f.write(dumps(data))
        f.write('\n')
    return path


def read_json(path):
    with open(path) as f:
        return json.load(f)


def write_text(path, text):
    with atomic_write(path) as f:
        f.write(text)
        if not text.endswith('\n'):
            f.write('\n')
    return path


def render_table(headers, rows, float_format='{:.4f}'):
    def cell(value):
        if value is None:
            return '-'
        if isinstance(value, (float, np.floating)):
            return float_format.format(value)
        return str(value)

    body = [[cell(value) for value in row] for row in rows]
    widths = [len(str(h)) for h in headers]
    for row in body:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    lines = ['  '.join(str(h).ljust(w) for h, w in zip(headers, widths)),
             '  '.join('-' * w for w in widths)]
    for row in body:
        lines.append('  '.join(c.ljust(w) for c, w in zip(row, widths)))
    return '\n'.join(line.rstrip() for line in lines)


def urljoin(*args):
    return "/".join(map(lambda x: str(x).rstrip('/'), args))


def download(url, dest_path, chunk_size=2048, timeout=60):
    if os.path.exists(dest_path):
        return dest_path
    create_directory(os.path.dirname(dest_path))
    logger.info("downloading {}".format(url))
    req = requests.get(url, stream=True, timeout=timeout)
    req.raise_for_status()
    with atomic_write(dest_path, mode='wb') as f:
        for chunk in req.iter_content(chunk_size=chunk_size):
            if chunk:
                f.write(chunk)
    return dest_path
