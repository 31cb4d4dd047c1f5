#! /usr/bin/env python
# -*- coding: utf-8 -*-

"""
@author: boltzspec developers
"""

from boltzspec import validation as vd
from boltzspec.base import MatrixCache
from boltzspec.cli import RunConfig
from boltzspec.session import SpectralSession
import unittest as unit
import numpy as np
import pandas as pd


FAST_CHECKS = ['kernel_dimension', 'kernel_angles', 'L_symmetry', 'coercivity', 'conservation', 'rotation_equivariance',
               'nu_lower_bound', 'conjugation_symmetry', 'dissipativity', 'hydrodynamic_count',
               'second_order_sign', 'navier_stokes_relation', 'k_star', 'surrogate_sum',
               'dissipativity_margin', 'margin_invariance', 'weight_conversion', 'quadrature_consistency',
               'spectrum_rotation', 'disjoint_projectors', 'ek_kernel']


class TestInvariantSuite(unit.TestCase):
    """ Class for unit testing of the invariant suite on a small planar session
    """

    @classmethod
    def setUpClass(cls):

        cls.session = SpectralSession(RunConfig(dim=2, degree=4, threads=2), cache=MatrixCache(None))
        cls.report = vd.run_suite(cls.session, names=FAST_CHECKS)

    def test_report_layout(self):
        """ Testing one row per requested check with the report columns.
        """

        self.assertEqual(list(self.report.columns), vd.COLUMNS)
        self.assertEqual(sorted(self.report['check']), sorted(FAST_CHECKS))

    def test_checks_pass(self):
        """ Testing that the structural invariants hold on the small session.
        """

        failed = self.report[~self.report['passed']]
        self.assertEqual(list(failed['check']), [])
        vd.assert_suite(self.report)

    def test_check_table(self):
        """ Testing names, relations and the optional E(k) rows of the check table.
        """

        table = vd.checks(self.session)
        names = [row[0] for row in table]
        self.assertEqual(len(names), len(set(names)))
        self.assertTrue(all(row[2] in vd.RELATIONS for row in table))
        self.assertIn('ek_kernel', names)
        self.assertNotIn('ek_kernel', [row[0] for row in vd.checks(self.session, include_ek=False)])
        for name in ('direction_covariance', 'reduced_spectrum_random', 'disjoint_projectors',
                     'quadrature_consistency', 'spectrum_rotation', 'curvature_fit'):
            self.assertIn(name, names)

        with self.assertRaises(ValueError):
            vd.run_suite(self.session, names=['no_such_check'])

    def test_error_column(self):
        """ Testing that a failing precondition is reported instead of raised.
        """

        cfg = RunConfig(dim=2, degree=4, a=1e3, threads=2)
        session = SpectralSession(cfg, cache=MatrixCache(None))
        session._store.update({'L': self.session.L, 'nu': self.session.nu})
        report = vd.run_suite(session, names=['hydrodynamic_count', 'confinement'])
        self.assertFalse(report['passed'].any())
        self.assertTrue(all(err.startswith('ValueError') for err in report['error']))

    def test_assert_suite(self):
        """ Testing that failed checks are named in the raised error.
        """

        report = pd.DataFrame([{'check': 'a', 'value': 1., 'relation': '<', 'tolerance': 0., 'passed': False,
                                'statement': 'first', 'error': '', 'seconds': 0.},
                               {'check': 'b', 'value': 0., 'relation': '<', 'tolerance': 1., 'passed': True,
                                'statement': 'second', 'error': '', 'seconds': 0.}], columns=vd.COLUMNS)
        with self.assertRaises(vd.InvariantError) as ctx:
            vd.assert_suite(report)
        self.assertIn('a: first', str(ctx.exception))
        self.assertNotIn('second', str(ctx.exception))
        vd.assert_suite(report[report['passed']])

    def test_sample_directions(self):
        """ Testing that the sampled directions are unit vectors.
        """

        for d in (2, 3):
            dirs = vd._sample_directions(d)
            np.testing.assert_allclose([np.linalg.norm(x) for x in dirs], 1.)

    def test_signed_permutation(self):
        """ Testing that the check rotation is an orthogonal signed permutation.
        """

        for d in (2, 3):
            O = vd._signed_permutation(d)
            np.testing.assert_array_equal(O @ O.T, np.eye(d))
            np.testing.assert_array_equal(np.abs(O).sum(axis=0), np.ones(d))


if __name__ == '__main__':
    unit.main()
