#! /usr/bin/env python
# -*- coding: utf-8 -*-

"""
@author: boltzspec developers
"""

from boltzspec import velocity_basis as vb, collision_operator as co, fourier_operator as fo, \
    weighted_spaces as ws
import unittest as unit
import warnings as wn
import numpy as np


class TestThreshold(unit.TestCase):
    """ Class for unit testing of the weight threshold k_*
    """

    def test_b_function(self):
        """ Testing b(q) and its domain.
        """

        self.assertAlmostEqual(ws.b_function(3.), 2.)
        self.assertAlmostEqual(ws.b_function(ws.k_star() - 0.5), 1., places=12)
        with self.assertRaises(ValueError):
            ws.b_function(2.)

    def test_analytic_constant(self):
        """ Testing the sign of a_1 on both sides of k_*.
        """

        self.assertGreater(ws.analytic_dissipativity_constant(6., 1.), 0.)
        self.assertLess(ws.analytic_dissipativity_constant(5., 1.), 0.)

    def test_cutoff(self):
        """ Testing the mollified indicator at the center, the edge and far away.
        """

        vals = ws.cutoff(np.array([[0., 0.], [6., 0.], [20., 0.]]), 6., 0.5)
        self.assertAlmostEqual(vals[0], 1., places=12)
        self.assertAlmostEqual(vals[1], 0.5, places=12)
        self.assertAlmostEqual(vals[2], 0., places=12)
        with self.assertRaises(ValueError):
            ws.cutoff(np.zeros(2), 6., 0.)


class TestGaussianSurrogate(unit.TestCase):
    """ Class for unit testing of the surrogate splitting on a Gaussian basis
    """

    @classmethod
    def setUpClass(cls):

        spec = vb.BasisSpec(2, 6)
        cls.basis = vb.build_basis(spec)
        quad = vb.build_quadrature(spec, 9)
        cls.L = co.assemble_L(cls.basis, quad, vb.sphere_quadrature(2, 7), ncores=2)
        cls.nu = co.assemble_nu_multiplier(cls.basis, quad)
        cls.V = fo.velocity_matrices(cls.basis, quad)
        cls.sur = ws.surrogate_splitting(cls.L, cls.nu, 6., 0.5, samples=50, seed=1)

    def test_splitting(self):
        """ Testing A + B = L, the symmetry of A and a positive margin.
        """

        np.testing.assert_allclose(self.sur.A.values + self.sur.B.values, self.L.values, atol=1e-12)
        self.assertLess(self.sur.A.hermitian_residual(), 1e-10)
        self.assertGreater(self.sur.a1_emp, 0.)
        self.assertGreaterEqual(self.sur.sampled_margin, self.sur.a1_emp - 1e-10)
        self.assertEqual(set(self.sur.to_dict()), {'R_cut', 'delta', 'a1_emp', 'sampled_margin'})

    def test_regularization(self):
        """ Testing that C_A is finite and stable under box refinement.
        """

        coarse = ws.regularization_check(self.sur, order=32, samples=20)
        fine = ws.regularization_check(self.sur, order=40, samples=20)
        self.assertGreater(fine, 0.)
        self.assertLess(abs(coarse - fine)/fine, 1e-6)

    def test_margin_invariance(self):
        """ Testing that -i v.xi leaves the margin of B unchanged.
        """

        table = ws.dissipativity_scan_B_xi(self.sur, self.V, [[0.1, 0.], [1., 0.], [0., 5.]])
        self.assertEqual(len(table), 3)
        self.assertLess(table['deviation'].max(), 1e-8)

    def test_weight_conversion(self):
        """ Testing the E(k) Gram matrix and the conversion identity.
        """

        G = ws.weight_conversion_gram(self.basis, 6.)
        np.testing.assert_array_equal(G, G.conj().T)
        self.assertGreater(np.linalg.eigvalsh(G).min(), 0.)
        np.testing.assert_allclose(ws.weight_conversion_gram(self.basis, 6., order=20), G, rtol=1e-8, atol=1e-14)
        self.assertLess(ws.conversion_identity_residual(self.basis, 6.), 1e-10)


class TestComparison(unit.TestCase):
    """ Class for unit testing of the eigenvalue matching between weights
    """

    def _slice(self, eigenvalues, xi=(0.1, 0.)):
        return fo.SpectralSlice(fo.FrequencyPoint(xi), np.asarray(eigenvalues), None, None, None)

    def test_matching(self):
        """ Testing optimal matching within Re > -a.
        """

        g = self._slice([0., -0.01+0.1j, -0.01-0.1j, -3.])
        p = self._slice([-0.01-0.1j+1e-4, 1e-5, -0.01+0.1j, -5.])
        cmp = ws.compare_spectra(g, p, 1., k=6.)
        self.assertEqual(cmp.gauss.size, 3)
        self.assertAlmostEqual(cmp.max_dist, 1e-4)
        self.assertEqual(len(cmp.to_dict()['pairs']), 3)

    def test_unequal_counts(self):
        """ Testing the warning on unequal counts and the frequency check.
        """

        g = self._slice([0., -0.5])
        p = self._slice([0.])
        with wn.catch_warnings(record=True) as caught:
            wn.simplefilter('always')
            cmp = ws.compare_spectra(g, p, 1.)
        self.assertTrue(any('eigenvalues' in str(w.message) for w in caught))
        self.assertEqual(cmp.gauss.size, 1)

        with self.assertRaises(ValueError):
            ws.compare_spectra(g, self._slice([0.], xi=(0.2, 0.)), 1.)


class TestPolynomialSpace(unit.TestCase):
    """ Class for unit testing of the E(k) discretization
    """

    @classmethod
    def setUpClass(cls):

        cls.spec = vb.BasisSpec(2, 3, weight='polynomial', k=6.)
        with wn.catch_warnings():
            wn.simplefilter('ignore')
            cls.disc = ws.assemble_in_Ek(cls.spec, ncores=2)
        cls.scale = np.max(np.abs(cls.disc.L.values))

        gspec = vb.BasisSpec(2, 6)
        gbasis = vb.build_basis(gspec)
        quad = vb.build_quadrature(gspec, 9)
        cls.gL = co.assemble_L(gbasis, quad, vb.sphere_quadrature(2, 7), ncores=2)
        cls.gV = fo.velocity_matrices(gbasis, quad)

    def test_structure(self):
        """ Testing the shapes, tags and metadata of the E(k) operators.
        """

        n = self.spec.size
        self.assertEqual(self.disc.L.values.shape, (n, n))
        self.assertEqual(self.disc.L.inner, 'E(k)')
        self.assertEqual(self.disc.meta['method'], 'weak-form')
        self.assertEqual(self.disc.k, 6.)
        self.assertEqual(len(self.disc.V), 2)
        self.assertTrue(np.all(np.isfinite(self.disc.L.values)))
        self.assertEqual(self.disc.meta['maxwellian_degree'], 3)
        self.assertTrue(np.isfinite(self.disc.meta['conservation_defect']))

    def test_kernel(self):
        """ Testing that the collision invariants span the kernel at xi = 0.
        """

        self.assertLess(ws.kernel_residual(self.disc), 1e-9*self.scale)
        W = ws.conserved_moments(self.disc.basis)
        self.assertEqual(W.shape, (self.disc.basis.n, 4))
        self.assertLess(np.max(np.abs(W.T @ self.disc.L.values)), 1e-9*self.scale*np.max(np.abs(W)))

        lam = np.linalg.eigvals(self.disc.L.values)
        lam = lam[np.argsort(np.abs(lam))]
        self.assertLess(np.max(np.abs(lam[:4])), 1e-8*self.scale)
        self.assertGreater(np.abs(lam[4]), 1e-2)

    def test_gaussian_agreement(self):
        """ Testing that the hydrodynamic eigenvalues at |xi| = 0.1 agree with the Gaussian space.
        """

        xi = fo.FrequencyPoint([0.1, 0.])
        with wn.catch_warnings():
            wn.simplefilter('ignore')
            gslice = fo.spectrum(fo.assemble_L_xi(self.gL, self.gV, xi))
            pslice = fo.spectrum(self.disc.L_xi(xi))
            cmp = ws.compare_spectra(gslice, pslice, 0.2, k=6.)
        self.assertEqual(cmp.gauss.size, 4)
        self.assertEqual(cmp.poly.size, 4)
        self.assertLess(cmp.max_dist, 1e-2)
        self.assertAlmostEqual(np.max(np.imag(cmp.poly)), 0.1*np.sqrt(2.), places=3)

    def test_velocity_and_frequency(self):
        """ Testing that V_k and nu are symmetric in the E(k) pairing.
        """

        for V in self.disc.V:
            np.testing.assert_allclose(V.values, V.values.T, atol=1e-10)
        np.testing.assert_allclose(self.disc.nu.values, self.disc.nu.values.T, rtol=1e-10, atol=1e-10)
        L_xi = self.disc.L_xi([0.1, 0.])
        np.testing.assert_allclose(L_xi.values, self.disc.L.values - 0.1j*self.disc.V[0].values)

    def test_preconditions(self):
        """ Testing the refusal of Gaussian specifications and Gaussian-only helpers.
        """

        with self.assertRaises(ValueError):
            ws.assemble_in_Ek(vb.BasisSpec(2, 3))
        with self.assertRaises(ValueError):
            ws.weight_conversion_gram(self.disc.basis, 6.)


if __name__ == '__main__':
    unit.main()
