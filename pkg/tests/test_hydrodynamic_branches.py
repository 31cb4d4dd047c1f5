#! /usr/bin/env python
# -*- coding: utf-8 -*-

"""
@author: boltzspec developers
"""

from boltzspec import velocity_basis as vb, collision_operator as co, fourier_operator as fo, \
    hydrodynamic_branches as hb
import unittest as unit
import warnings as wn
import numpy as np


class TestFirstOrder(unit.TestCase):
    """ Class for unit testing of the zeroth and first order data
    """

    def test_sound_speed(self):
        """ Testing that A(0) has eigenvalues 0 and -+ i c.
        """

        for d in (2, 3):
            c = hb.sound_speed(d)
            self.assertAlmostEqual(c**2, 1 + 2/d)
            evals = np.sort(np.imag(np.linalg.eigvals(hb.a0_matrix(d))))
            np.testing.assert_allclose(evals, [-c, 0., c], atol=1e-14)
        with self.assertRaises(ValueError):
            hb.a0_matrix(4)

    def test_householder_frame(self):
        """ Testing orthogonality and the first column of the frame.
        """

        direction = np.array([1., 2., 2.])/3
        H = hb.householder_frame(direction)
        np.testing.assert_allclose(H @ H.T, np.eye(3), atol=1e-14)
        np.testing.assert_allclose(H[:, 0], direction, atol=1e-14)
        np.testing.assert_array_equal(hb.householder_frame([1., 0.]), np.eye(2))

    def test_kernel_frame(self):
        """ Testing that the kernel frame is an orthonormal basis of ker L.
        """

        basis = vb.build_basis(vb.BasisSpec(3, 4))
        K = hb.kernel_frame(basis, [0., 0.6, 0.8])
        np.testing.assert_allclose(K.T @ K, np.eye(5), atol=1e-14)
        self.assertLess(np.max(co.principal_angles(K, vb.analytic_kernel(basis))), 1e-10)

        first = hb.first_order_modes(basis, [0., 0.6, 0.8])
        self.assertEqual(first['lambda1'][1], 1j*hb.sound_speed(3))
        self.assertEqual(len(first['modes']), 5)


class TestPerturbation(unit.TestCase):
    """ Class for unit testing of the small-frequency expansions on a planar basis
    """

    @classmethod
    def setUpClass(cls):

        spec = vb.BasisSpec(2, 6)
        cls.basis = vb.build_basis(spec)
        quad = vb.build_quadrature(spec, 9)
        cls.L = co.assemble_L(cls.basis, quad, vb.sphere_quadrature(2, 7), ncores=2)
        cls.V = fo.velocity_matrices(cls.basis, quad)
        cls.a0 = co.spectral_gap(cls.L)
        cls.S = hb.reduced_resolvent_matrix(cls.L)
        cls.direction = np.array([1., 0.])
        cls.frame = hb.kernel_frame(cls.basis, cls.direction)
        cls.slc = fo.spectrum(fo.assemble_L_xi(cls.L, cls.V, [0.05, 0.]))

    def test_reduced_resolvent(self):
        """ Testing L S = 1 - Pi and S Pi = 0.
        """

        K0 = vb.analytic_kernel(self.basis)
        Pi = co.kernel_projector(K0)
        np.testing.assert_allclose(self.L.values @ self.S, np.eye(self.basis.n) - Pi, atol=1e-10)
        np.testing.assert_allclose(self.S @ Pi, 0., atol=1e-10)

        f = np.arange(self.basis.n, dtype='float64')
        np.testing.assert_allclose(hb.reduced_resolvent_apply(self.L, f), self.S @ f, atol=1e-10)

    def test_second_order(self):
        """ Testing negative coefficients and the Navier-Stokes damping relation.
        """

        coeffs = hb.second_order_coeffs(self.L, self.V, self.direction, S=self.S)
        for j in hb.LABELS:
            self.assertLess(coeffs[j], 0.)
        self.assertAlmostEqual(coeffs[-1], coeffs[1], places=12)

        summary = hb.transport_summary(coeffs, 2)
        self.assertLess(summary['damping_relation_residual'], 1e-8*summary['sound_damping'])
        self.assertGreater(summary['prandtl'], 0.)

    def test_kato(self):
        """ Testing U P(0) U^{-1} = P(xi), the reduced operator and its block structure.
        """

        P0 = co.kernel_projector(vb.analytic_kernel(self.basis))
        L_xi = fo.assemble_L_xi(self.L, self.V, [0.05, 0.])
        Q = fo.contour_projector(L_xi, fo.ContourSpec(0., self.a0/2, 64), self.slc.eigenvalues)
        U = hb.kato_transform(P0, Q)
        np.testing.assert_allclose(U @ P0, Q @ U, atol=1e-7)
        self.assertLess(hb.kato_range_angle(U, vb.analytic_kernel(self.basis), Q), 1e-6)

        Lt = hb.reduced_operator(L_xi, Q, U, 0.05, frame=self.frame)
        _, _, dist = fo.match_eigenvalues(0.05*np.linalg.eigvals(Lt), self.slc.eigenvalues[self.slc.select(self.a0/2)])
        self.assertLess(np.max(dist), 1e-6)
        self.assertLess(hb.block_residual(Lt, 2), 1e-8)

        with self.assertRaises(hb.KatoError):
            hb.kato_transform(np.zeros_like(P0), np.eye(self.basis.n))
        with self.assertRaises(ValueError):
            hb.reduced_operator(L_xi, Q, U, 0.)

    def test_reduced_spectrum_random(self):
        """ Testing the reduced operator against the hydrodynamic eigenvalues at random frequencies.
        """

        rng = np.random.default_rng(11)
        P0 = co.kernel_projector(vb.analytic_kernel(self.basis))
        contour = fo.ContourSpec(0., self.a0/2, 64)
        for _ in range(10):
            direction = rng.standard_normal(2)
            direction = direction / np.linalg.norm(direction)
            xi = fo.FrequencyPoint.from_polar(rng.uniform(0.01, 0.1), direction)
            L_xi = fo.assemble_L_xi(self.L, self.V, xi)
            slc = fo.spectrum(L_xi)
            Q = fo.contour_projector(L_xi, contour, slc.eigenvalues)
            Lt = hb.reduced_operator(L_xi, Q, hb.kato_transform(P0, Q), xi.r,
                                     frame=hb.kernel_frame(self.basis, direction))
            _, _, dist = fo.match_eigenvalues(xi.r*np.linalg.eigvals(Lt), slc.eigenvalues[slc.select(self.a0/2)])
            self.assertLess(np.max(dist), 1e-6)

    def test_assignment(self):
        """ Testing branch assignment by eigenvector content.
        """

        assignment = hb.assign_branches(self.slc, self.a0/2, self.frame)
        lam = self.slc.eigenvalues
        c = hb.sound_speed(2)
        self.assertLess(abs(np.imag(lam[assignment[1][0]]) - 0.05*c), 1e-2*0.05)
        self.assertLess(abs(np.imag(lam[assignment[-1][0]]) + 0.05*c), 1e-2*0.05)
        self.assertEqual(len(assignment[hb.SHEAR]), 1)

        with self.assertRaises(hb.BranchCountError):
            hb.assign_branches(self.slc, 1e-12, self.frame)

    def test_trace_and_fit(self):
        """ Testing traced branches, their symmetries and the fitted Taylor coefficients.
        """

        r_grid = np.linspace(0.01, 0.1, 10)
        with wn.catch_warnings():
            wn.simplefilter('ignore')
            table = hb.trace_branches(self.L, self.V, self.direction, r_grid, self.a0/2)
        self.assertLess(table.conjugation_residual(), 1e-8)
        self.assertLess(table.reality_residual(), 1e-8)

        fits = table.fit(degree=4)
        c = hb.sound_speed(2)
        self.assertLess(abs(fits[1]['lambda1'] - 1j*c), 1e-4)
        self.assertLess(abs(fits[0]['lambda1']), 1e-4)
        coeffs = hb.second_order_coeffs(self.L, self.V, self.direction, S=self.S)
        for j in hb.LABELS:
            self.assertLess(abs(fits[j]['lambda2'] - coeffs[j]), 1e-2*abs(coeffs[j]))

        frame = table.to_frame()
        self.assertEqual(len(frame), 4*table.r.size)
        self.assertEqual(list(frame.columns), ['r', 'branch', 're', 'im', 'multiplicity', 'crossing'])

        with self.assertRaises(ValueError):
            hb.trace_branches(self.L, self.V, self.direction, [0.1, 0.05], self.a0/2)
        with self.assertRaises(ValueError):
            hb.fit_branch_coefficients(table, degree=12)

    def test_direction_covariance(self):
        """ Testing that branch tables along permuted and reflected axes coincide.
        """

        r_grid = np.linspace(0.02, 0.1, 5)
        with wn.catch_warnings():
            wn.simplefilter('ignore')
            tables = [hb.trace_branches(self.L, self.V, direction, r_grid, self.a0/2)
                      for direction in ([1., 0.], [0., 1.], [-1., 0.])]
        for table in tables[1:]:
            np.testing.assert_allclose(table.r, tables[0].r)
            self.assertLess(np.max(np.abs(table.data.values - tables[0].data.values)), 1e-8)

    def test_branch_projectors(self):
        """ Testing the algebra of the branch projectors and their left-right triples.
        """

        assignment = hb.assign_branches(self.slc, self.a0/2, self.frame)
        total = fo.eigen_projector(self.slc, self.slc.select(self.a0/2))
        pset = hb.branch_projectors(self.slc, assignment, total=total)
        self.assertEqual(pset.ranks(), {-1: 1, 0: 1, 1: 1, 2: 1})
        self.assertLess(pset.algebra_residual(), 1e-8)
        self.assertLess(pset.sum_residual(), 1e-8)
        self.assertLess(pset.intertwining_residual(fo.assemble_L_xi(self.L, self.V, [0.05, 0.])), 1e-8)

        triples = hb.eigentriples(self.slc, pset)
        self.assertEqual([t.label for t in triples], [-1, 0, 1, (2, 1)])
        np.testing.assert_allclose(hb.biorthogonality_matrix(triples), np.eye(4), atol=1e-8)

    def test_projector_expansion(self):
        """ Testing the first-order expansion of the total and branch projectors.
        """

        expansion = hb.total_projector_expansion(self.L, self.V, self.direction, [0.01, 0.02, 0.04])
        self.assertGreater(expansion['order'], 1.5)
        np.testing.assert_allclose(expansion['P0'], co.kernel_projector(vb.analytic_kernel(self.basis)), atol=1e-7)

        r_grid = np.linspace(0.01, 0.05, 5)
        sets, families = [], []
        for r in r_grid:
            slc = fo.spectrum(fo.assemble_L_xi(self.L, self.V, [r, 0.]))
            pset = hb.branch_projectors(slc, hb.assign_branches(slc, self.a0/2, self.frame))
            sets.append(pset)
            families.append(hb.eigentriples(slc, pset))

        fitted = hb.fit_projector_expansion(sets, r_grid, kernel=vb.analytic_kernel(self.basis))
        self.assertLess(fitted['kernel_residual'], 1e-3)
        triples = hb.eigentriple_expansion(families, r_grid)
        self.assertEqual(len(triples), 4)
        self.assertIn('e1', triples[0].expansion)

        with self.assertRaises(ValueError):
            hb.fit_projector_expansion(sets[:2], r_grid[:2])


if __name__ == '__main__':
    unit.main()
