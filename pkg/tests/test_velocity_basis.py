#! /usr/bin/env python
# -*- coding: utf-8 -*-

"""
@author: boltzspec developers
"""

from boltzspec import velocity_basis as vb, collision_operator as co
import math
import unittest as unit
import warnings as wn
import numpy as np


class TestBasisSpec(unit.TestCase):
    """ Class for unit testing of basis specifications
    """

    def test_preconditions(self):
        """ Testing the rejection of unsupported dimensions, degrees and weights.
        """

        with self.assertRaises(ValueError):
            vb.BasisSpec(4, 6)
        with self.assertRaises(ValueError):
            vb.BasisSpec(3, 1)
        with self.assertRaises(ValueError):
            vb.BasisSpec(3, 6, weight='exponential')
        with self.assertRaises(ValueError):
            vb.BasisSpec(3, 6, weight='polynomial', k=5.)
        with self.assertRaises(ValueError):
            vb.BasisSpec(3, 6, weight='polynomial', k=6., p=2)
        with self.assertRaises(ValueError):
            vb.BasisSpec(3, 6, weight='polynomial', k=6., maxwellian_degree=1)
        with self.assertRaises(ValueError):
            vb.BasisSpec(3, 6, maxwellian_degree=3)

    def test_polynomial_defaults(self):
        """ Testing the smallest admissible decay exponent and the profile width.
        """

        spec = vb.BasisSpec(3, 6, weight='polynomial', k=6.)
        self.assertEqual(spec.p, vb.min_decay_exponent(6, 6., 3))
        self.assertGreater(spec.p, (6 + 6. + 1.5 + 1)/2)
        self.assertLessEqual(spec.p - 1, (6 + 6. + 1.5 + 1)/2)
        self.assertEqual(spec.width, 2.*spec.p)
        self.assertEqual(spec.maxwellian_degree, 3)
        self.assertEqual(spec.size, math.comb(9, 3) + math.comb(6, 3))
        self.assertEqual(spec, vb.BasisSpec.from_dict(spec.to_dict()))

    def test_size_and_hash(self):
        """ Testing the basis size and the content hash of the specification.
        """

        spec = vb.BasisSpec(3, 6)
        self.assertEqual(spec.size, math.comb(9, 3))
        self.assertEqual(len(vb.multi_indices(3, 6)), spec.size)
        self.assertEqual(spec, vb.BasisSpec.from_dict(spec.to_dict()))
        self.assertEqual(spec.hash(), vb.BasisSpec(3, 6).hash())
        self.assertNotEqual(spec.hash(), vb.BasisSpec(3, 8).hash())


class TestQuadrature(unit.TestCase):
    """ Class for unit testing of velocity and sphere quadratures
    """

    def test_hermite_orthonormality(self):
        """ Testing the orthonormal Hermite recursion against a Gauss-Hermite rule.
        """

        rule = vb.gauss_hermite_rule(1, 10)
        H = vb.hermite_table(np.ascontiguousarray(rule.nodes[:, 0]), 6)
        np.testing.assert_allclose((H * rule.weights[:, None]).T @ H, np.eye(7), atol=1e-12)

    def test_gaussian_moments(self):
        """ Testing mass and energy of the Gauss-Hermite tensor rule.
        """

        for dim in (2, 3):
            rule = vb.gauss_hermite_rule(dim, 6)
            self.assertAlmostEqual(rule.integrate(np.ones(rule.size)), 1., places=12)
            self.assertAlmostEqual(rule.integrate(np.sum(rule.nodes**2, axis=1)), dim, places=12)
            self.assertEqual(rule.exactness, 11)

    def test_sphere_moments(self):
        """ Testing surface measure, second moments and parity of the sphere rules.
        """

        for dim in (2, 3):
            rule = vb.sphere_quadrature(dim, 5)
            area = vb.sphere_measure(dim)
            self.assertAlmostEqual(rule.weights.sum(), area, places=12)
            self.assertAlmostEqual(rule.integrate(rule.nodes[:, 0]**2), area/dim, places=12)
            self.assertAlmostEqual(rule.integrate(rule.nodes[:, 0]**3 * rule.nodes[:, 1]), 0., places=12)
        with self.assertRaises(ValueError):
            vb.sphere_quadrature(3, 1)

    def test_order_check(self):
        """ Testing the minimal quadrature order N + 3.
        """

        with self.assertRaises(ValueError):
            vb.build_quadrature(vb.BasisSpec(2, 6), 8)


class TestGaussianBasis(unit.TestCase):
    """ Class for unit testing of the Hermite-product basis
    """

    @classmethod
    def setUpClass(cls):

        cls.spec = vb.BasisSpec(2, 5)
        cls.basis = vb.build_basis(cls.spec)
        cls.grid = vb.build_quadrature(cls.spec, 9)

    def test_gram(self):
        """ Testing orthonormality on the Gauss-Hermite rule.
        """

        np.testing.assert_allclose(self.basis.gram(self.grid), np.eye(self.basis.n), atol=1e-12)

    def test_quadrature_consistency(self):
        """ Testing that quadratures of orders q and q+4 give the same inner products.
        """

        fine = vb.build_quadrature(self.spec, self.grid.order + 4)
        self.assertLess(np.max(np.abs(self.basis.gram(self.grid) - self.basis.gram(fine))), 1e-10)

    def test_inner_product(self):
        """ Testing coefficient and grid forms of the E inner product.
        """

        vals = self.basis.evaluate(self.grid.nodes)
        ip = vb.inner_product(vals[:, 3], vals[:, 3], weight='gaussian', grid=self.grid)
        self.assertAlmostEqual(ip, 1., places=10)
        ip = vb.inner_product(vals[:, 3], vals[:, 4], weight='gaussian', grid=self.grid)
        self.assertAlmostEqual(abs(ip), 0., places=10)
        self.assertEqual(vb.inner_product(np.array([1j, 0.]), np.array([1., 0.])), 1j)
        with self.assertRaises(ValueError):
            vb.inner_product(np.ones(2), np.ones(3))

    def test_analytic_kernel(self):
        """ Testing the closed-form kernel vectors against projected collision invariants.
        """

        K = vb.analytic_kernel(self.basis)
        np.testing.assert_allclose(K.T @ K, np.eye(self.spec.dim + 2), atol=1e-14)
        coeffs = vb.project(self.basis, vb.collision_invariants(self.grid.nodes), self.grid)
        coeffs = coeffs / np.linalg.norm(coeffs, axis=0)
        np.testing.assert_allclose(coeffs, K, atol=1e-12)

    def test_project_columns(self):
        """ Testing that a stack of grid functions projects column by column.
        """

        vals = vb.collision_invariants(self.grid.nodes)
        stacked = vb.project(self.basis, vals, self.grid)
        self.assertEqual(stacked.shape, (self.basis.n, self.spec.dim + 2))
        for j in range(vals.shape[1]):
            np.testing.assert_allclose(stacked[:, j], vb.project(self.basis, vals[:, j], self.grid), atol=1e-14)

    def test_signed_permutation(self):
        """ Testing that Pi_O acts as f -> f(O^{-1} v) and is orthogonal.
        """

        O = np.array([[0, -1], [1, 0]])
        Pi = vb.signed_permutation_operator(self.basis, O)
        np.testing.assert_allclose(Pi @ Pi.T, np.eye(self.basis.n), atol=1e-14)

        rng = np.random.default_rng(3)
        c = rng.standard_normal(self.basis.n)
        pts = rng.standard_normal((7, 2))
        np.testing.assert_allclose(self.basis.evaluate(pts) @ (Pi @ c),
                                   self.basis.evaluate(pts @ O) @ c, rtol=1e-10, atol=1e-14)

        with self.assertRaises(vb.RepresentationError):
            vb.signed_permutation_operator(self.basis, np.array([[0.6, -0.8], [0.8, 0.6]]))


class TestPolynomialBasis(unit.TestCase):
    """ Class for unit testing of the polynomial-weight basis
    """

    @classmethod
    def setUpClass(cls):

        cls.spec = vb.BasisSpec(2, 3, weight='polynomial', k=6.)
        with wn.catch_warnings():
            wn.simplefilter('ignore')
            cls.basis = vb.build_basis(cls.spec)

    def test_gram(self):
        """ Testing orthonormality in the <v>^{2k} pairing on the basis grid.
        """

        self.assertLess(self.basis.gram_residual, 1e-8)
        np.testing.assert_allclose(self.basis.gram(self.basis.grid), np.eye(self.basis.n), atol=1e-8)

    def test_kernel_vectors(self):
        """ Testing the orthonormal projected collision invariants.
        """

        K = vb.analytic_kernel(self.basis)
        self.assertEqual(K.shape, (self.basis.n, 4))
        np.testing.assert_allclose(K.T @ K, np.eye(4), atol=1e-10)

    def test_maxwellian_block(self):
        """ Testing that the collision invariants are reproduced by their coefficients.
        """

        self.assertEqual(self.basis.n, 2*math.comb(5, 2))
        pts = np.random.default_rng(5).standard_normal((30, 2)) * 2
        coeffs = vb.project(self.basis, vb.collision_invariants(self.basis.grid.nodes), self.basis.grid)
        exact = vb.collision_invariants(pts)
        np.testing.assert_allclose(self.basis.evaluate(pts) @ coeffs, exact, atol=1e-8*np.max(np.abs(exact)))

    def test_index_lookup(self):
        """ Testing that multi-index positions are refused on orthogonalized bases.
        """

        with self.assertRaises(vb.RepresentationError):
            self.basis.index_of((0, 0))


class TestWeights(unit.TestCase):
    """ Class for unit testing of the weight functions
    """

    def test_maxwellian(self):
        """ Testing the normalization of M and the Japanese bracket.
        """

        self.assertAlmostEqual(vb.maxwellian(np.zeros(3)), (2*np.pi)**-1.5)
        self.assertAlmostEqual(vb.japanese_bracket(np.array([3., 4.])), np.sqrt(26.))
        self.assertAlmostEqual(vb.sphere_measure(3), 4*np.pi)
        self.assertAlmostEqual(co.nu_radial(0., 3) / vb.sphere_measure(3), 2*np.sqrt(2/np.pi))


if __name__ == '__main__':
    unit.main()
