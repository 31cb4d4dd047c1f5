#! /usr/bin/env python
# -*- coding: utf-8 -*-

"""
@author: boltzspec developers

Invariant suite run by `boltzspec validate`: every check is evaluated on the
operators of one SpectralSession and reported with its tolerance and the
property it verifies.
"""

from __future__ import print_function, division
from . import utils as u, velocity_basis as vb, collision_operator as co, fourier_operator as fo, \
    hydrodynamic_branches as hb, semigroup_analysis as sg, weighted_spaces as ws
from .base import BoltzspecError
import logging
import operator
import time
import warnings as wn
import numpy as np
import pandas as pd
import scipy.linalg as sla


logger = logging.getLogger(__name__)

RELATIONS = {'<': operator.lt, '<=': operator.le, '>': operator.gt, '>=': operator.ge, '==': operator.eq}
COLUMNS = ['check', 'value', 'relation', 'tolerance', 'passed', 'statement', 'error', 'seconds']


class InvariantError(BoltzspecError):
    """ Raised when at least one invariant check fails.
    """
    pass


def _sample_directions(dim):

    if dim == 2:
        return [np.array([1., 0.]), np.array([1., 1.])/np.sqrt(2), np.array([0., 1.])]
    return [np.array([1., 0., 0.]), np.array([1., 1., 0.])/np.sqrt(2), np.ones(3)/np.sqrt(3)]


def _signed_permutation(dim):

    O = np.eye(dim)[::-1].copy()
    O[0] *= -1
    return O


class InvariantSuite(object):
    """
    Checks on the operators of a session. Shared intermediates (the slice at
    the configured xi, its branch projectors, the Kato pairing) are computed
    once and reused across checks.

    :Parameters:
        session : SpectralSession
            Operators of the run.
        **kwds : keyword arguments
            =============  ==========  ===================================================
            keyword        data type   meaning
            =============  ==========  ===================================================
            small_r        float       frequency of the first-order slope checks (1e-4)
            curvature_r    float       frequency of the curvature cross-check (1e-3)
            samples        int         random vectors of the regularization check (40)
            include_ek     bool        also run the E(k) checks (True)
            =============  ==========  ===================================================
    """

    def __init__(self, session, **kwds):

        self.session = session
        self.small_r = kwds.pop('small_r', 1e-4)
        self.curvature_r = kwds.pop('curvature_r', 1e-3)
        self.samples = kwds.pop('samples', 40)
        self.include_ek = kwds.pop('include_ek', True)
        self._store = {}

    def _lazy(self, name, builder):

        if name not in self._store:
            self._store[name] = builder()
        return self._store[name]

    # ==== Shared intermediates ==== #

    @property
    def frame(self):
        s = self.session
        return self._lazy('frame', lambda: hb.kernel_frame(s.basis, s.direction))

    def _branch_slice(self, r):

        s = self.session
        slc = s.slice(fo.FrequencyPoint.from_polar(r, s.direction))
        return slc, hb.assign_branches(slc, s.a, self.frame)

    @property
    def slice_xi(self):
        return self._lazy('slice_xi', lambda: self.session.slice())

    @property
    def projectors(self):

        def _build():
            s = self.session
            slc = self.slice_xi
            total = fo.contour_projector(s.L_xi(), s.contour, eigenvalues=slc.eigenvalues)
            assignment = hb.assign_branches(slc, s.a, self.frame)
            return hb.branch_projectors(slc, assignment, total=total)

        return self._lazy('projectors', _build)

    @property
    def coeffs(self):
        s = self.session
        return self._lazy('coeffs', lambda: hb.second_order_coeffs(s.L, s.V, s.direction))

    @property
    def P0(self):
        s = self.session
        return self._lazy('P0', lambda: fo.contour_projector(s.L, s.contour))

    @property
    def kato(self):

        def _build():
            s = self.session
            xi = s.xi
            P0 = self.P0
            U = hb.kato_transform(P0, self.projectors.total)
            Lt = hb.reduced_operator(s.L_xi(xi), self.projectors.total, U, xi.r,
                                     frame=hb.kernel_frame(s.basis, xi.direction))
            return P0, U, Lt

        return self._lazy('kato', _build)

    # ==== Collision operator ==== #

    def kernel_dimension(self):
        return co.kernel_basis(self.session.L).shape[1]

    def kernel_angles(self):
        s = self.session
        return float(np.max(co.principal_angles(s.kernel, vb.analytic_kernel(s.basis))))

    def symmetry(self):
        return self.session.L.hermitian_residual()

    def nonpositivity(self):
        return float(sla.eigvalsh(self.session.L.hermitian_part())[-1])

    def spectral_gap(self):
        return self.session.a0

    def coercivity(self):

        s = self.session
        return co.coercivity_check(s.L, samples=self.samples, seed=s.config.seed, kernel=s.kernel)/s.a0

    def conservation(self):
        return co.conservation_residual(self.session.L)

    def rotation(self):

        return co.rotation_equivariance_check(self.session.L, _signed_permutation(self.session.dim))

    def nu_lower_bound(self):
        s = self.session
        return float(sla.eigvalsh(s.nu.hermitian_part())[0] / co.nu_radial(0., s.dim))

    def quadrature_consistency(self):

        s = self.session
        fine = vb.build_quadrature(s.spec, s.quad_order + 4)
        return float(np.max(np.abs(s.basis.gram(s.quad) - s.basis.gram(fine))))

    # ==== Fourier operator ==== #

    def conjugation(self):

        s = self.session
        lam = self.slice_xi.eigenvalues
        mirror = sla.eigvals(s.L_xi(-s.xi).values)
        return float(np.max(fo.match_eigenvalues(lam, np.conj(mirror))[2]))

    def spectrum_rotation(self):

        s = self.session
        xi = fo.FrequencyPoint(_signed_permutation(s.dim) @ s.xi.xi)
        rotated = sla.eigvals(s.L_xi(xi).values)
        return float(np.max(fo.match_eigenvalues(self.slice_xi.eigenvalues, rotated)[2]))

    def dissipativity(self):
        return float(np.max(np.real(self.slice_xi.eigenvalues)))

    def hydrodynamic_count(self):
        return int(self.slice_xi.select(self.session.a).size)

    def confinement(self):
        return confinement_radius(self.session, self.session.grid('r_grid'))

    # ==== Branches ==== #

    def acoustic_speed(self):

        slc, assignment = self._branch_slice(self.small_r)
        c = hb.sound_speed(self.session.dim)
        plus = np.imag(slc.eigenvalues[assignment[1]][0]) / self.small_r
        minus = np.imag(slc.eigenvalues[assignment[-1]][0]) / self.small_r
        return float(max(abs(plus - c), abs(minus + c)))

    def first_order_zeros(self):

        slc, assignment = self._branch_slice(self.small_r)
        vals = np.concatenate([slc.eigenvalues[assignment[0]], slc.eigenvalues[assignment[hb.SHEAR]]])
        return float(np.max(np.abs(vals)) / self.small_r)

    def shear_multiplicity(self):

        slc, assignment = self._branch_slice(self.session.xi.r)
        shear = slc.eigenvalues[assignment[hb.SHEAR]]
        if shear.size != self.session.dim - 1:
            return np.inf
        return float(np.max(np.abs(shear - shear[0])))

    def second_order_sign(self):
        return float(max(self.coeffs.values()))

    def navier_stokes_relation(self):
        return hb.transport_summary(self.coeffs, self.session.dim)['damping_relation_residual']

    def curvature(self):

        r = self.curvature_r
        slc, assignment = self._branch_slice(r)
        rel = 0.
        for j in hb.LABELS:
            fitted = np.real(np.mean(slc.eigenvalues[assignment[j]])) / r**2
            rel = max(rel, abs(fitted - self.coeffs[j]) / abs(self.coeffs[j]))
        return float(rel)

    def curvature_fit(self):

        s = self.session
        table = hb.trace_branches(s.L, s.V, s.direction, np.linspace(0.01, 0.1, 10), s.a)
        fits = hb.fit_branch_coefficients(table, degree=4)
        return float(max(abs(fits[j]['lambda2'].real - self.coeffs[j]) / abs(self.coeffs[j]) for j in hb.LABELS))

    def direction_covariance(self):

        s = self.session
        rng = np.random.default_rng(s.config.seed)
        r_grid = np.linspace(0.02, s.config.r0, 6)
        tables = [hb.trace_branches(s.L, s.V, u.unit_vector(rng.standard_normal(s.dim)), r_grid, s.a)
                  for _ in range(2)]
        return float(np.max(np.abs(tables[0].data.values - tables[1].data.values)))

    # ==== Projectors ==== #

    def projector_algebra(self):
        return self.projectors.algebra_residual()

    def disjoint_projectors(self):

        s = self.session
        slc = self.slice_xi
        assignment = hb.assign_branches(slc, s.a, self.frame)
        centers = [slc.eigenvalues[assignment[lab][0]] for lab in (1, -1)]
        others = np.delete(slc.eigenvalues, [assignment[1][0], assignment[-1][0]])
        radius = min(np.min(np.abs(others - c)) for c in centers) / 2
        radius = min(radius, abs(centers[0] - centers[1]) / 2)
        P1, P2 = [fo.contour_projector(s.L_xi(), fo.ContourSpec(c, radius, s.config.contour_nodes),
                                       eigenvalues=slc.eigenvalues) for c in centers]
        return float(max(np.max(np.abs(P1 @ P2)), np.max(np.abs(P2 @ P1))))

    def projector_sum(self):
        return self.projectors.sum_residual()

    def kernel_projector(self):
        s = self.session
        return float(np.max(np.abs(self.P0 - co.kernel_projector(s.kernel))))

    def projector_order(self):
        s = self.session
        exp = hb.total_projector_expansion(s.L, s.V, s.direction, np.array([0.005, 0.01, 0.02, 0.04]),
                                           radius=s.a/2, nodes=s.config.contour_nodes)
        return float(exp['order'])

    def kato_intertwining(self):

        P0, U, _ = self.kato
        return float(np.max(np.abs(U @ P0 - self.projectors.total @ U)))

    def reduced_spectrum(self):

        s = self.session
        _, _, Lt = self.kato
        hydro = self.slice_xi.eigenvalues[self.slice_xi.select(s.a)]
        return float(np.max(fo.match_eigenvalues(sla.eigvals(s.xi.r*Lt), hydro)[2]))

    def reduced_spectrum_random(self):

        s = self.session
        rng = np.random.default_rng(s.config.seed)
        worst = 0.
        for _ in range(10):
            direction = u.unit_vector(rng.standard_normal(s.dim))
            xi = fo.FrequencyPoint.from_polar(rng.uniform(0.01, 1.)*s.config.r0, direction)
            L_xi = s.L_xi(xi)
            slc = fo.spectrum(L_xi)
            P = fo.contour_projector(L_xi, s.contour, eigenvalues=slc.eigenvalues)
            U = hb.kato_transform(self.P0, P)
            Lt = hb.reduced_operator(L_xi, P, U, xi.r, frame=hb.kernel_frame(s.basis, direction))
            hydro = slc.eigenvalues[slc.select(s.a)]
            worst = max(worst, float(np.max(fo.match_eigenvalues(sla.eigvals(xi.r*Lt), hydro)[2])))
        return worst

    def block_structure(self):

        s = self.session
        e1 = np.eye(s.dim)[0]
        xi = fo.FrequencyPoint.from_polar(s.xi.r, e1)
        L_xi = s.L_xi(xi)
        P0 = self.P0
        P = fo.contour_projector(L_xi, s.contour)
        U = hb.kato_transform(P0, P)
        Lt = hb.reduced_operator(L_xi, P, U, xi.r, frame=hb.kernel_frame(s.basis, e1))
        return hb.block_residual(Lt, s.dim)

    def biorthogonality(self):

        triples = hb.eigentriples(self.slice_xi, self.projectors)
        B = hb.biorthogonality_matrix(triples)
        return float(np.max(np.abs(B - np.eye(B.shape[0]))))

    # ==== Semigroup ==== #

    def contractivity(self):
        s = self.session
        return sg.contractivity(s.L_xi(), s.grid('t_grid') * s.time_scale)

    def semigroup_property(self):
        s = self.session
        return sg.semigroup_property_residual(s.L_xi(), 2*s.time_scale, 3*s.time_scale)

    def spectral_splitting(self):
        s = self.session
        return sg.spectral_splitting_residual(s.L_xi(), self.projectors, 5*s.time_scale)

    @property
    def decay(self):
        s = self.session
        return self._lazy('decay', lambda: sg.splitting_check(s.L_xi(), self.projectors, s.grid('t_grid'),
                                                               time_scale=s.time_scale, r0=s.config.r0))

    def commutation(self):
        return self.decay.commutation_residual

    def decay_rate(self):

        rep = self.decay
        return float(abs(rep.rate - rep.spectral_rate) / abs(rep.spectral_rate))

    def large_xi(self):

        s = self.session
        xi = fo.FrequencyPoint.from_polar(2*s.config.r0, s.direction)
        return sg.large_xi_decay(s.L, s.V, xi, s.grid('t_grid'), time_scale=s.time_scale, r0=s.config.r0).gamma_fit

    def uniform_gap(self):

        s = self.session
        b_emp, _ = sg.gap_uniformity_scan(s.L, s.V, np.geomspace(0.01, 5, 8), _sample_directions(s.dim),
                                          s.config.r0, s.a, ncores=s.ncores)
        return b_emp

    def resolvent_line(self):

        s = self.session
        L_xi = s.L_xi(fo.FrequencyPoint.from_polar(2*s.config.r0, s.direction))
        beta = np.max(np.real(sla.eigvals(L_xi.values))) / 2
        scan = sg.resolvent_line_scan(L_xi, beta, s.grid('tau_grid'))
        return int(scan.edge_ok and scan.edge_bound_ok)

    # ==== Weighted spaces ==== #

    def k_star(self):
        return abs(ws.b_function(ws.k_star() - 0.5) - 1)

    def surrogate_sum(self):

        s = self.session
        sur = s.surrogate
        return float(np.max(np.abs(sur.A.values + sur.B.values - s.L.values)) / np.max(np.abs(s.L.values)))

    def dissipativity_margin(self):
        return self.session.a1

    def regularization(self):

        sur = self.session.surrogate
        coarse = ws.regularization_check(sur, order=32, samples=self.samples, seed=self.session.config.seed)
        fine = ws.regularization_check(sur, order=40, samples=self.samples, seed=self.session.config.seed)
        if fine == 0:
            return 0.
        return abs(coarse - fine) / fine

    def margin_invariance(self):

        s = self.session
        xis = [fo.FrequencyPoint.from_polar(r, s.direction) for r in (0.1, 1., 5.)]
        table = ws.dissipativity_scan_B_xi(s.surrogate, s.V, xis)
        return float(table['deviation'].max())

    def weight_conversion(self):
        s = self.session
        return ws.conversion_identity_residual(s.basis, s.config.k, seed=s.config.seed)

    def ek_kernel(self):
        ek = self.session.ek
        return ws.kernel_residual(ek) / np.max(np.abs(ek.L.values))

    def ek_comparison(self):

        s = self.session
        xi = s.xi
        pslice = fo.spectrum(s.ek.L_xi(xi))
        with wn.catch_warnings():
            wn.simplefilter('ignore')
            cmp = ws.compare_spectra(self.slice_xi, pslice, s.a, k=s.config.k)
        if cmp.gauss.size != self.session.dim + 2:
            return np.inf
        return cmp.max_dist


def confinement_radius(session, r_grid):
    """ M r_0, the radius the hydrodynamic group reaches over (0, r_0].
    """

    r_grid = np.asarray(r_grid, dtype='float64')
    r_grid = r_grid[(r_grid > 0) & (r_grid <= session.config.r0)]
    if r_grid.size == 0:
        r_grid = np.array([session.config.r0])
    mconf = fo.eigenvalue_confinement_scan(session.L, session.V, r_grid, session.a,
                                           direction=session.direction, ncores=session.ncores)
    return mconf * session.config.r0


def checks(session, include_ek=True):
    """
    The check table: (name, method name, relation, tolerance, property statement).
    Tolerances that depend on the run (the threshold a, the kernel dimension)
    are resolved from the session.
    """

    d = session.dim
    table = [
        ('kernel_dimension', 'kernel_dimension', '==', d + 2,
         'ker L has dimension d+2, spanned by the collision invariants'),
        ('kernel_angles', 'kernel_angles', '<', 1e-6,
         'numerical kernel matches span{M, v_j M, (|v|^2-d) M}'),
        ('L_symmetry', 'symmetry', '<', 1e-10, 'L is self-adjoint in E'),
        ('L_nonpositive', 'nonpositivity', '<=', 1e-9, 'L is nonpositive in E'),
        ('spectral_gap', 'spectral_gap', '>=', co.GAP_LOWER_BOUND,
         'spectral gap of L exceeds the analytic lower bound'),
        ('coercivity', 'coercivity', '>=', 1 - 1e-8, '-<L g, g> is at least a_0 |(1 - Pi) g|^2'),
        ('conservation', 'conservation', '<', 1e-9, 'L g is orthogonal to the collision invariants'),
        ('rotation_equivariance', 'rotation', '<', 1e-9, 'L commutes with signed coordinate permutations'),
        ('nu_lower_bound', 'nu_lower_bound', '>=', 1 - 1e-8, 'the nu multiplier is bounded below by nu(0)'),
        ('quadrature_consistency', 'quadrature_consistency', '<', 1e-10,
         'Gram matrices on quadratures of orders q and q+4 agree'),
        ('conjugation_symmetry', 'conjugation', '<', 1e-8, 'spectrum at -xi is the conjugate of the spectrum at xi'),
        ('spectrum_rotation', 'spectrum_rotation', '<', 1e-8,
         'spectra of L_xi and L_Oxi coincide for a signed permutation O'),
        ('dissipativity', 'dissipativity', '<=', 1e-8, 'L_xi has no eigenvalue with positive real part'),
        ('hydrodynamic_count', 'hydrodynamic_count', '==', d + 2,
         'exactly d+2 eigenvalues lie in Re > -a for |xi| <= r_0'),
        ('confinement', 'confinement', '<', lambda: session.a/2,
         'hydrodynamic eigenvalues stay inside the circle of radius a/2 for |xi| <= r_0'),
        ('acoustic_speed', 'acoustic_speed', '<', 1e-3, 'acoustic branches have slope +-i sqrt(1+2/d)'),
        ('first_order_zeros', 'first_order_zeros', '<', 1e-3,
         'thermal and shear branches have zero first-order coefficient'),
        ('shear_multiplicity', 'shear_multiplicity', '<', 1e-7, 'shear branch has multiplicity d-1'),
        ('second_order_sign', 'second_order_sign', '<', 0., 'all second-order coefficients are negative'),
        ('navier_stokes_relation', 'navier_stokes_relation', '<', 1e-8,
         'sound damping equals ((d-1) viscosity + heat diffusivity)/d'),
        ('curvature_cross_check', 'curvature', '<', 1e-2,
         'second-order coefficients agree with the branch curvature'),
        ('curvature_fit', 'curvature_fit', '<', 1e-2,
         'second-order coefficients agree with a polynomial fit of the branches on [0.01, 0.1]'),
        ('direction_covariance', 'direction_covariance', '<', 1e-7,
         'branch tables along two random directions coincide'),
        ('projector_algebra', 'projector_algebra', '<', 1e-7, 'branch projectors satisfy P_j P_l = delta_jl P_j'),
        ('disjoint_projectors', 'disjoint_projectors', '<', 1e-7,
         'Riesz projectors over disjoint contours annihilate each other'),
        ('projector_sum', 'projector_sum', '<', 1e-7, 'branch projectors sum to the total Riesz projector'),
        ('kernel_projector', 'kernel_projector', '<', 1e-7, 'P(0) is the orthogonal projector onto ker L'),
        ('projector_order', 'projector_order', '>=', 1.9,
         'P(xi) - P(0) - |xi| P^(1) is of second order with P^(1) = i(P0 v S + S v P0)'),
        ('kato_intertwining', 'kato_intertwining', '<', 1e-8, 'the Kato transform maps P(0) to P(xi)'),
        ('reduced_spectrum', 'reduced_spectrum', '<', 1e-7,
         'the reduced operator reproduces the hydrodynamic eigenvalues'),
        ('reduced_spectrum_random', 'reduced_spectrum_random', '<', 1e-7,
         'the reduced operator reproduces the hydrodynamic eigenvalues at 10 random frequencies'),
        ('block_structure', 'block_structure', '<', 1e-7, 'the reduced operator decouples the shear block'),
        ('biorthogonality', 'biorthogonality', '<', 1e-8, 'eigentriples are biorthonormal'),
        ('contractivity', 'contractivity', '<=', 1 + 1e-10, 'exp(t L_xi) is a contraction'),
        ('semigroup_property', 'semigroup_property', '<', 1e-10, 'exp((t+s) L_xi) = exp(t L_xi) exp(s L_xi)'),
        ('spectral_splitting', 'spectral_splitting', '<', 1e-8, 'exp(t L_xi) P_j = exp(t lambda_j) P_j'),
        ('commutation', 'commutation', '<', 1e-6, 'the remainder semigroup commutes with the branch projectors'),
        ('decay_rate', 'decay_rate', '<=', 0.05,
         'remainder decay rate matches the complementary spectral abscissa'),
        ('large_xi_decay', 'large_xi', '<', 0., 'the semigroup decays exponentially for |xi| >= r_0'),
        ('uniform_gap', 'uniform_gap', '>', 0., 'non-hydrodynamic spectrum stays uniformly left of 0'),
        ('resolvent_line', 'resolvent_line', '==', 1, 'resolvent is bounded along a vertical line'),
        ('k_star', 'k_star', '<', 1e-12, 'k_* solves b(k - 1/2) = 1'),
        ('surrogate_sum', 'surrogate_sum', '<', 1e-12, 'the surrogate splitting satisfies A + B = L'),
        ('dissipativity_margin', 'dissipativity_margin', '>', 0., 'B is dissipative with positive margin'),
        ('regularization', 'regularization', '<=', 0.1, 'the regularization constant of A is grid-stable'),
        ('margin_invariance', 'margin_invariance', '<', 1e-8,
         'the dissipativity margin of B - i v.xi is independent of xi'),
        ('weight_conversion', 'weight_conversion', '<', 1e-10,
         'the E pairing equals the E(k) pairing against <v>^{-2k} M^{-1} g'),
    ]
    if include_ek:
        table += [
            ('ek_kernel', 'ek_kernel', '<', 1e-9, 'collision invariants lie in the kernel of L in E(k)'),
            ('ek_comparison', 'ek_comparison', '<', 1e-2,
             'hydrodynamic eigenvalues agree between the E and E(k) discretizations'),
        ]

    return table


def run_suite(session, names=None, **kwds):
    """
    Run the invariant checks on a session.

    :Parameters:
        session : SpectralSession
            Operators of the run.
        names : list of str | None
            Subset of check names, all when None.
        **kwds : keyword arguments
            pbar : bool | False
                Progress bar toggle.
            pbenv : str | 'classic'
                Progress bar environment.
            Remaining keywords are passed to InvariantSuite.

    :Return:
        report : pandas DataFrame
            One row per check with columns check, value, relation, tolerance,
            passed, statement, error and seconds.
    """

    pbar = kwds.pop('pbar', False)
    pbenv = kwds.pop('pbenv', 'classic')
    suite = InvariantSuite(session, **kwds)
    table = checks(session, include_ek=suite.include_ek)
    if names is not None:
        unknown = set(names) - set(row[0] for row in table)
        if unknown:
            raise ValueError('Unknown checks ' + str(sorted(unknown)) + '!')
        table = [row for row in table if row[0] in names]

    rows = []
    for name, method, relation, tol, statement in u.progress(table, pbar, pbenv, desc='validate'):
        tstart = time.perf_counter()
        value, error = np.nan, ''
        try:
            tol = tol() if callable(tol) else tol
            value = getattr(suite, method)()
        except (BoltzspecError, ValueError, sla.LinAlgError) as err:
            error = type(err).__name__ + ': ' + str(err)
            tol = np.nan if callable(tol) else tol
        passed = not error and bool(np.isfinite(value)) and bool(RELATIONS[relation](value, tol))
        rows.append({'check': name, 'value': float(value), 'relation': relation, 'tolerance': float(tol),
                     'passed': passed, 'statement': statement, 'error': error,
                     'seconds': time.perf_counter() - tstart})
        logger.info('%-24s %s (%s %s %s)', name, 'pass' if passed else 'FAIL', value, relation, tol)

    return pd.DataFrame(rows, columns=COLUMNS)


def assert_suite(report):
    """ Raise InvariantError naming every failed check of a report.
    """

    failed = report[~report['passed']]
    if len(failed):
        lines = [row.check + ': ' + row.statement + (' (' + row.error + ')' if row.error else '')
                 for row in failed.itertuples()]
        raise InvariantError(str(len(failed)) + ' invariant check(s) failed:\n  ' + '\n  '.join(lines))
