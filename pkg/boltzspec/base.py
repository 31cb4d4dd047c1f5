#! /usr/bin/env python
# -*- coding: utf-8 -*-

"""
@author: boltzspec developers
"""

from __future__ import print_function, division
from . import utils as u
import os
import json
import time
import hashlib
import logging
import warnings as wn
import numpy as np
from h5py import File


logger = logging.getLogger(__name__)


class BoltzspecError(Exception):
    """ Base class of all package-specific errors.
    """
    pass


class CacheError(BoltzspecError):
    """ Unreadable or inconsistent cache entry.
    """
    pass


def canonical_json(obj):
    """ Deterministic JSON text used for content keys.
    """

    return json.dumps(obj, sort_keys=True, separators=(',', ':'), default=str)


def content_hash(obj):
    """ SHA-256 hex digest of an array's bytes or of a JSON-able object.
    """

    if isinstance(obj, np.ndarray):
        payload = np.ascontiguousarray(obj).tobytes()
    elif isinstance(obj, bytes):
        payload = obj
    else:
        payload = canonical_json(obj).encode('utf-8')

    return hashlib.sha256(payload).hexdigest()


def save_matrix(values, save_addr, meta=None):
    """ Save a dense matrix as a raw row-major complex128 blob plus a JSON sidecar.

    :Parameters:
        values : 2D array
            Matrix to save.
        save_addr : str
            File path of the blob; the sidecar is written to save_addr + '.json'.
        meta : dict | None
            Additional sidecar entries (basis hash, quadrature orders, wall time).
    """

    values = np.ascontiguousarray(values, dtype='complex128')
    with open(save_addr, 'wb') as fh:
        fh.write(values.tobytes())

    sidecar = u.dictmerge({'shape': list(values.shape), 'dtype': 'complex128',
                        'order': 'C', 'sha256': content_hash(values)}, meta or {})
    u.dump_json(sidecar, save_addr + '.json')


def load_matrix(load_addr):
    """ Load a matrix written by save_matrix and verify its content hash.

    :Return:
        values, meta : 2D array, dict
    """

    with open(load_addr + '.json', 'r', encoding='utf-8') as fh:
        meta = json.load(fh)
    values = np.fromfile(load_addr, dtype='complex128').reshape(meta['shape'])

    if content_hash(values) != meta['sha256']:
        raise CacheError('Content hash mismatch for ' + load_addr + '!')

    return values, meta


class MatrixCache(object):
    """
    Disk cache of assembled operator matrices. Entries are keyed by the
    SHA-256 of the canonical JSON of their key material and consist of an
    hdf5 blob plus a JSON sidecar holding the content hash of the matrix.
    """

    def __init__(self, cache_dir):

        self.cache_dir = cache_dir
        if cache_dir is not None:
            os.makedirs(cache_dir, exist_ok=True)

    @property
    def enabled(self):
        return self.cache_dir is not None

    def key(self, material):
        return content_hash(material)

    def _paths(self, key):
        stem = os.path.join(self.cache_dir, key)
        return u.appendformat(stem, 'h5'), u.appendformat(stem, 'json')

    def load(self, material):
        """ Return the cached matrix for the key material, or None on a miss.
        Corrupted entries are discarded with a warning.
        """

        if not self.enabled:
            return None

        key = self.key(material)
        h5path, jspath = self._paths(key)
        if not (os.path.exists(h5path) and os.path.exists(jspath)):
            logger.debug('Cache miss for %s', key[:12])
            return None

        try:
            with open(jspath, 'r', encoding='utf-8') as fh:
                meta = json.load(fh)
            with File(h5path, 'r') as f:
                values = f['values'][()]
            if content_hash(values) != meta['sha256']:
                raise CacheError('content hash mismatch')
        except (OSError, KeyError, ValueError, CacheError) as err:
            wn.warn('Discarding corrupted cache entry ' + key[:12] + ' (' + str(err) + ')!')
            self.discard(key)
            return None

        logger.info('Cache hit for %s (%s)', key[:12], meta.get('name', ''))
        return values

    def store(self, material, values, wall_time=None):
        """ Write a matrix under its key material.
        """

        if not self.enabled:
            return None

        key = self.key(material)
        h5path, jspath = self._paths(key)
        values = np.ascontiguousarray(values, dtype='complex128')
        with File(h5path, 'w') as f:
            f.create_dataset('values', data=values, track_times=False)

        meta = {'key': key, 'material': material, 'sha256': content_hash(values),
                'shape': list(values.shape), 'wall_time': wall_time}
        if isinstance(material, dict) and 'name' in material:
            meta['name'] = material['name']
        u.dump_json(meta, jspath)
        logger.debug('Cached %s', key[:12])

        return key

    def discard(self, key):
        for path in self._paths(key):
            if os.path.exists(path):
                os.remove(path)

    def fetch(self, material, builder):
        """ Load from the cache or build, store and return.

        :Parameters:
            material : dict
                JSON-able key material.
            builder : callable
                Zero-argument function returning the matrix.
        """

        values = self.load(material)
        if values is None:
            tstart = time.perf_counter()
            values = np.asarray(builder())
            wall = time.perf_counter() - tstart
            logger.info('Assembled %s in %.2f s', material.get('name', 'matrix')
                        if isinstance(material, dict) else 'matrix', wall)
            self.store(material, values, wall_time=wall)

        return values
