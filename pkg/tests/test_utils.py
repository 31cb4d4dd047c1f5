#! /usr/bin/env python
# -*- coding: utf-8 -*-

"""
@author: boltzspec developers
"""

from boltzspec import utils as u
import json
import os
import tempfile
import unittest as unit
import numpy as np


class TestUtils(unit.TestCase):
    """ Class for unit testing of functions in the boltzspec.utils module
    """

    def test_dictmerge(self):
        """ Testing the dictionary merging function in four scenarios.
        """

        carray = np.zeros((2, 3))

        Da = {'a':5}
        Da_alt = {'a':6}
        Db = {'b':[1, 2, 3]}
        Dc = {'c':carray}
        D_merged = {'a':5, 'b':[1, 2, 3], 'c':carray}

        D_dict = {'b':[1, 2, 3], 'c':carray}
        D_tuple = (Da, Db, Dc) # incl. a repeated part
        D_list = [Db, Dc]

        # Merge a dictionary with another dictionary
        self.assertEqual(u.dictmerge(Da, D_dict), D_merged)
        # Merge a dictionary with another dictionary incl. update
        self.assertEqual(u.dictmerge(Da, Da_alt), Da_alt)
        # Merge a dictionary with a tuple of dictionaries
        self.assertEqual(u.dictmerge(Da, D_tuple), D_merged)
        # Merge a dictionary with a list of dictionaries
        self.assertEqual(u.dictmerge(Da, D_list), D_merged)

    def test_parse_grid(self):
        """ Testing grid strings with inclusive ends.
        """

        grid = u.parse_grid('0.01:0.3:30')
        self.assertEqual(grid.size, 30)
        self.assertAlmostEqual(grid[0], 0.01)
        self.assertAlmostEqual(grid[-1], 0.3)
        np.testing.assert_allclose(u.parse_grid('2:5:1'), [2.])
        np.testing.assert_allclose(u.parse_grid([0.1, 0.2]), [0.1, 0.2])

        for bad in ('0:1', 'a:b:3', '0:1:0'):
            with self.assertRaises(ValueError):
                u.parse_grid(bad)

    def test_parse_vector(self):
        """ Testing comma-separated vectors and their length check.
        """

        np.testing.assert_allclose(u.parse_vector('0.1,0,0', 3), [0.1, 0., 0.])
        with self.assertRaises(ValueError):
            u.parse_vector('0,0', 3)
        with self.assertRaises(ValueError):
            u.unit_vector([0., 0., 0.])

    def test_dump_json(self):
        """ Testing the 17-digit JSON writer, its schema field and the NaN refusal.
        """

        text = u.dump_json({'x': 0.1, 'z': 1+2j, 'n': np.int64(3), 'flag': np.bool_(True)})
        doc = json.loads(text)
        self.assertEqual(doc['schema_version'], u.SCHEMA_VERSION)
        self.assertIn('0.10000000000000001', text)
        self.assertEqual(doc['z'], {'re': 1.0, 'im': 2.0})
        self.assertEqual(doc['n'], 3)
        self.assertIs(doc['flag'], True)

        with self.assertRaises(ValueError):
            u.dump_json({'bad': float('nan')})

        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'out.json')
            first = u.dump_json({'v': [1.5, 2.25]}, path)
            with open(path, 'r', encoding='utf-8') as fh:
                self.assertEqual(fh.read(), first)

    def test_random_vectors(self):
        """ Testing seeded reproducibility of random coefficient vectors.
        """

        a = u.random_vectors(5, 3, seed=7)
        b = u.random_vectors(5, 3, seed=7)
        self.assertEqual(a.shape, (5, 3))
        np.testing.assert_array_equal(a, b)
        self.assertTrue(np.isrealobj(u.random_vectors(4, 2, complex_valued=False)))

    def test_loglog_slope(self):
        """ Testing the log-log slope on a power law.
        """

        x = np.geomspace(1e-3, 1e-1, 6)
        self.assertAlmostEqual(u.loglog_slope(x, 3*x**2), 2., places=10)

    def test_progress(self):
        """ Testing the progress-bar wrapper and the environment selection.
        """

        self.assertEqual(list(u.progress(range(3))), [0, 1, 2])
        with self.assertRaises(ValueError):
            u.tqdmenv('terminal')


if __name__ == '__main__':
    unit.main()
