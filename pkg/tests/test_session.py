#! /usr/bin/env python
# -*- coding: utf-8 -*-

"""
@author: boltzspec developers
"""

from boltzspec import collision_operator as co, fourier_operator as fo
from boltzspec.base import MatrixCache
from boltzspec.cli import RunConfig
from boltzspec.session import SpectralSession
from unittest import mock
import os
import tempfile
import unittest as unit
import numpy as np


class TestSpectralSession(unit.TestCase):
    """ Class for unit testing of the lazily assembled operator family
    """

    @classmethod
    def setUpClass(cls):

        cls.tmp = tempfile.TemporaryDirectory()
        cls.config = RunConfig(dim=2, degree=4, cache_dir=cls.tmp.name, threads=2)
        cls.session = SpectralSession(cls.config)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def test_derived_orders(self):
        """ Testing the quadrature orders derived from the degree.
        """

        self.assertEqual(self.session.quad_order, 7)
        self.assertEqual(self.session.sphere_order, 5)
        self.assertEqual(self.session.quad.exactness, 13)
        self.assertEqual(self.session.basis.n, 15)

    def test_threshold(self):
        """ Testing the default threshold and the contour built from it.
        """

        s = self.session
        self.assertGreater(s.a0, 0.)
        self.assertGreater(s.a1, 0.)
        self.assertAlmostEqual(s.a, min(s.a0, s.a1)/2)
        self.assertAlmostEqual(s.contour.radius, s.a/2)
        self.assertEqual(s.contour.nodes, 64)

        cfg = RunConfig(dim=2, degree=4, a=10*s.a0, cache_dir=self.tmp.name)
        with self.assertRaises(ValueError):
            SpectralSession(cfg).a

    def test_frequencies(self):
        """ Testing the default direction and frequency.
        """

        np.testing.assert_allclose(self.session.direction, [1., 0.])
        np.testing.assert_allclose(self.session.xi.xi, [0.1, 0.])
        cfg = RunConfig(dim=2, degree=4, xi='0,0.2', direction='0,3')
        s = SpectralSession(cfg, cache=MatrixCache(None))
        np.testing.assert_allclose(s.xi.xi, [0., 0.2])
        np.testing.assert_allclose(s.direction, [0., 1.])
        self.assertEqual(s.grid('r_grid').size, 30)

    def test_cache_reuse(self):
        """ Testing that a second session reads L from the cache.
        """

        values = self.session.L.values
        self.assertTrue(any(name.endswith('.h5') for name in os.listdir(self.tmp.name)))
        with mock.patch.object(co, 'assemble_L', side_effect=AssertionError('assembled twice')):
            again = SpectralSession(self.config).L
        np.testing.assert_array_equal(again.values, values)
        self.assertEqual(again.meta['method'], 'taylor-moment')

    def test_slice(self):
        """ Testing L_xi at the configured frequency and its spectrum.
        """

        slc = self.session.slice()
        self.assertEqual(slc.n, 15)
        self.assertEqual(slc.select(self.session.a).size, 4)
        L_xi = self.session.L_xi(fo.FrequencyPoint([0., 0.1]))
        self.assertEqual(L_xi.meta['xi'], [0., 0.1])

    def test_summary(self):
        """ Testing the session summary.
        """

        summary = self.session.summary()
        self.assertEqual(summary['n'], 15)
        self.assertAlmostEqual(summary['time_scale'], 1/co.nu_radial(0., 2))
        self.assertEqual(set(summary), {'dim', 'degree', 'n', 'quad_order', 'sphere_order', 'a0',
                                        'a1_emp', 'a', 'r0', 'time_scale'})


if __name__ == '__main__':
    unit.main()
