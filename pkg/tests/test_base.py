#! /usr/bin/env python
# -*- coding: utf-8 -*-

"""
@author: boltzspec developers
"""

from boltzspec import base
from h5py import File
import os
import tempfile
import unittest as unit
import warnings as wn
import numpy as np


class TestMatrixCache(unit.TestCase):
    """ Class for unit testing of the content-hashed matrix cache
    """

    def setUp(self):

        self.tmp = tempfile.TemporaryDirectory()
        self.cache = base.MatrixCache(self.tmp.name)
        self.material = {'name': 'L', 'basis': {'d': 2, 'N': 4}, 'quad_order': 7}
        self.values = np.arange(9, dtype='float64').reshape(3, 3) + 1j
        self.calls = 0

    def tearDown(self):
        self.tmp.cleanup()

    def _builder(self):
        self.calls += 1
        return self.values

    def test_fetch_hits_cache(self):
        """ Testing that a second fetch is served from disk.
        """

        first = self.cache.fetch(self.material, self._builder)
        second = self.cache.fetch(self.material, self._builder)
        self.assertEqual(self.calls, 1)
        np.testing.assert_array_equal(first, second)

    def test_key_is_canonical(self):
        """ Testing that key order does not change the cache key.
        """

        shuffled = {'quad_order': 7, 'basis': {'N': 4, 'd': 2}, 'name': 'L'}
        self.assertEqual(self.cache.key(self.material), self.cache.key(shuffled))
        self.assertNotEqual(self.cache.key(self.material), self.cache.key(dict(self.material, quad_order=8)))

    def test_corrupted_entry_is_rebuilt(self):
        """ Testing that a content hash mismatch discards the entry and reassembles.
        """

        self.cache.fetch(self.material, self._builder)
        key = self.cache.key(self.material)
        with File(os.path.join(self.tmp.name, key + '.h5'), 'r+') as f:
            f['values'][0, 0] = 42.

        with wn.catch_warnings(record=True) as caught:
            wn.simplefilter('always')
            values = self.cache.fetch(self.material, self._builder)
        self.assertEqual(self.calls, 2)
        self.assertTrue(any('corrupted' in str(w.message) for w in caught))
        np.testing.assert_array_equal(values, self.values)

    def test_disabled_cache(self):
        """ Testing that a cache without directory always builds.
        """

        cache = base.MatrixCache(None)
        cache.fetch(self.material, self._builder)
        cache.fetch(self.material, self._builder)
        self.assertEqual(self.calls, 2)


class TestMatrixFiles(unit.TestCase):
    """ Class for unit testing of the raw matrix writer
    """

    def test_save_load(self):
        """ Testing the blob and sidecar round trip and byte-identical rewrites.
        """

        values = np.array([[1., 2.5j], [-2.5j, 3.]])
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'L.bin')
            base.save_matrix(values, path, meta={'name': 'L'})
            with open(path, 'rb') as fh:
                first = fh.read()
            base.save_matrix(values, path, meta={'name': 'L'})
            with open(path, 'rb') as fh:
                self.assertEqual(fh.read(), first)

            loaded, meta = base.load_matrix(path)
            np.testing.assert_array_equal(loaded, values)
            self.assertEqual(meta['shape'], [2, 2])
            self.assertEqual(meta['name'], 'L')

            with open(path, 'r+b') as fh:
                fh.write(b'\x01'*8)
            with self.assertRaises(base.CacheError):
                base.load_matrix(path)


if __name__ == '__main__':
    unit.main()
