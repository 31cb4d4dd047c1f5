#! /usr/bin/env python
# -*- coding: utf-8 -*-

"""
@author: boltzspec developers

Polynomial-weight side: the threshold k_*, the discretization of L in E(k),
spectrum comparison between weights, and the surrogate splitting L = A + B
with its dissipativity and regularization checks.
"""

from __future__ import print_function, division
from . import utils as u, velocity_basis as vb, collision_operator as co, fourier_operator as fo
import logging
import warnings as wn
import numpy as np
import pandas as pd
import dask as d
from scipy.special import erfc
from numpy.polynomial.hermite_e import hermegauss
from threadpoolctl import threadpool_limits


logger = logging.getLogger(__name__)


# =========================== #
#       Weight threshold       #
# =========================== #

def b_function(q):
    """ b(q) = 4/sqrt((q+1)(q-2)), defined for q > 2.
    """

    q = np.asarray(q, dtype='float64')
    if np.any(q <= 2):
        raise ValueError('b(q) is defined for q > 2!')
    val = 4/np.sqrt((q + 1)*(q - 2))

    return val if val.ndim else float(val)


def k_star():
    """ The root k_* = 1/2 + (1 + sqrt(73))/2 of b(k - 1/2) = 1.
    """

    return 0.5 + (1 + np.sqrt(73))/2


def analytic_dissipativity_constant(k, nu0):
    """ a_1 = nu_0 (1 - b(k - 1/2)), positive for k > k_*.
    """

    return nu0*(1 - b_function(k - 0.5))


# =========================== #
#      E(k) discretization     #
# =========================== #

class EkDiscretization(object):
    """
    Operators on a polynomial-weight basis: L, the axis velocity matrices V
    and the collision-frequency multiplier nu, all in the E(k) pairing.
    """

    def __init__(self, basis, L, V, nu, meta=None):

        self.basis = basis
        self.L = L
        self.V = V
        self.nu = nu
        self.meta = meta or {}

    @property
    def k(self):
        return self.basis.spec.k

    def L_xi(self, xi):
        return fo.assemble_L_xi(self.L, self.V, xi)


def _psi(basis, points, k):
    """ Test functions b_a(v) <v>^{2k}, shape (npts, n).
    """

    return basis.evaluate(points) * ((1 + np.sum(points**2, axis=-1))**k)[:, None]


def _weak_chunk(vnodes, chi, nu, basis, k, star, sphere, psi_star):
    """
    Contribution sum_v chi_b(v) F_a(v) of a chunk of velocity nodes, with
    F_a(v) = int int |v - v_*| M_* (2 psi_a(v') - psi_a(v_*)) dsigma dv_* - nu(v) psi_a(v).
    """

    dim = vnodes.shape[1]
    area = vb.sphere_measure(dim)
    dist = np.linalg.norm(vnodes[:, None, :] - star.nodes[None, :, :], axis=-1)
    kern = dist * star.weights[None, :]
    center = (vnodes[:, None, :] + star.nodes[None, :, :]) / 2

    gain = 0.
    for sig, wsig in zip(sphere.nodes, sphere.weights):
        post = center + 0.5*dist[:, :, None]*sig[None, None, :]
        vals = _psi(basis, post.reshape(-1, dim), k).reshape(dist.shape + (-1,))
        gain = gain + 2*wsig*np.einsum('ms,msn->mn', kern, vals)

    loss = nu[:, None]*_psi(basis, vnodes, k) + area*(kern @ psi_star)

    return (gain - loss).T @ chi


def assemble_in_Ek(spec, **kwds):
    """
    Discretize L and v on a polynomial-weight trial space with the <v>^{2k} pairing.

    The weak form is compressed by the kernel projector Pi = C (W^T C)^{-1} W^T,
    where C spans the collision invariants (held exactly by the Maxwellian block)
    and W holds the conserved moments f -> int f (1, v, |v|^2) dv, so that
    L C = 0 and W^T L = 0 hold to roundoff. The weak-form defect before the
    compression is kept as meta['conservation_defect'].

    :Parameters:
        spec : BasisSpec
            Polynomial-weight specification (k > k_*, admissible p).
        **kwds : keyword arguments
            =============  ==========  ======================================================
            keyword        data type   meaning
            =============  ==========  ======================================================
            basis          object      prebuilt OrthonormalBasis matching spec (None)
            star_order     int         Gauss-Hermite order in v_* (N//2 + 4)
            sphere_order   int         sphere rule order (N//2 + 3)
            chunk          int         velocity nodes per task (64)
            ncores         int         dask workers (all cores)
            scheduler      str         dask scheduler ('threads')
            =============  ==========  ======================================================

    :Return:
        disc : EkDiscretization
    """

    if spec.is_gaussian:
        raise ValueError('E(k) discretization needs a polynomial-weight specification!')
    if spec.k <= k_star():
        raise ValueError('E(k) theory requires k > k_* = %.6f!' % k_star())

    basis = kwds.pop('basis', None) or vb.build_basis(spec)
    N, dim, k = spec.degree, spec.dim, spec.k
    star = vb.gauss_hermite_rule(dim, kwds.pop('star_order', N//2 + 4))
    sphere = vb.sphere_quadrature(dim, kwds.pop('sphere_order', N//2 + 3))
    chunk = kwds.pop('chunk', 64)
    ncores = kwds.pop('ncores', co.N_CPU)
    scheduler = kwds.pop('scheduler', 'threads')

    grid = basis.grid
    chi = basis.evaluate(grid.nodes) * grid.lebesgue_weights()[:, None]
    nu_vals = co.compute_nu(grid.nodes)
    psi_star = _psi(basis, star.nodes, k)

    tasks = []
    for start in range(0, grid.size, chunk):
        sl = slice(start, start + chunk)
        tasks.append(d.delayed(_weak_chunk)(grid.nodes[sl], chi[sl], nu_vals[sl], basis, k, star, sphere, psi_star))
    with threadpool_limits(limits=1, user_api='blas'):
        parts = d.compute(*tasks, scheduler=scheduler, num_workers=ncores)
    weak = sum(parts)

    C = vb.analytic_kernel(basis)
    W = conserved_moments(basis)
    defect = max(np.linalg.norm(weak @ C, 2), np.linalg.norm(W.T @ weak, 2)) / np.linalg.norm(weak, 2)
    comp = np.eye(basis.n) - kernel_projector(C, W)
    values = comp @ weak @ comp

    meta = {'method': 'weak-form', 'star_order': star.order, 'sphere_order': sphere.order,
            'v_order': grid.order, 'k': k, 'p': spec.p, 'maxwellian_degree': spec.maxwellian_degree,
            'conservation_defect': float(defect)}
    L = co.OperatorMatrix(values, basis, 'E(k)', name='L', meta=meta)
    V = fo.velocity_matrices(basis, grid)
    nu = co.OperatorMatrix(basis.moment_matrix(grid, nu_vals), basis, 'E(k)', name='nu')
    logger.info('E(k) operator assembled: n=%d, k=%.3f, p=%d, %d velocity nodes, conservation defect %.2e',
                basis.n, k, spec.p, grid.size, defect)

    return EkDiscretization(basis, L, V, nu, meta)


def conserved_moments(basis, grid=None):
    """
    Conserved moments of the basis functions, W[b, i] = int b_b (1, v_1..v_d, |v|^2)_i dv,
    so that W^T f collects mass, momentum and energy of the coefficient vector f.
    """

    grid = grid or basis.grid
    nodes = grid.nodes
    chis = np.column_stack([np.ones(grid.size), nodes, np.sum(nodes**2, axis=-1)])

    return (basis.evaluate(nodes) * grid.lebesgue_weights()[:, None]).T @ chis


def kernel_projector(C, W):
    """ Oblique projector C (W^T C)^{-1} W^T onto span C along the null space of W^T.
    """

    return C @ np.linalg.solve(W.T @ C, W.T)


def kernel_residual(disc):
    """ Largest E(k) norm of L applied to the projected, normalized collision invariants.
    """

    vecs = vb.analytic_kernel(disc.basis)
    return float(np.max(np.linalg.norm(disc.L.values @ vecs, axis=0)))


# =========================== #
#     Spectrum comparison      #
# =========================== #

class WeightComparison(object):
    """ Matched eigenvalues of the Gaussian- and polynomial-weight discretizations in Re > -a.
    """

    def __init__(self, k, xi, gauss, poly, dist):

        self.k = k
        self.xi = xi
        self.gauss = gauss
        self.poly = poly
        self.dist = dist

    @property
    def max_dist(self):
        return float(np.max(self.dist)) if self.dist.size else 0.

    def to_dict(self):
        pairs = [{'gauss': g, 'poly': p, 'dist': float(dd)} for g, p, dd in zip(self.gauss, self.poly, self.dist)]
        return {'k': self.k, 'xi': self.xi.xi.tolist(), 'pairs': pairs, 'max_dist': self.max_dist}


def compare_spectra(gslice, pslice, a, k=None):
    """
    Optimal bipartite matching of the eigenvalues with Re lambda > -a of two
    slices at the same frequency. Unequal counts are reported with a warning
    and the smaller set is matched.
    """

    if not np.allclose(gslice.xi.xi, pslice.xi.xi):
        raise ValueError('Slices are taken at different frequencies!')
    g = gslice.eigenvalues[gslice.select(a)]
    p = pslice.eigenvalues[pslice.select(a)]
    if g.size != p.size:
        wn.warn('Region Re > -a holds ' + str(g.size) + ' Gaussian-space and ' + str(p.size) +
                ' polynomial-space eigenvalues!')
    if g.size == 0 or p.size == 0:
        return WeightComparison(k, gslice.xi, g[:0], p[:0], np.zeros(0))

    rows, cols, dist = fo.match_eigenvalues(g, p)
    return WeightComparison(k, gslice.xi, g[rows], p[cols], dist)


# =========================== #
#     Surrogate splitting      #
# =========================== #

def cutoff(v, R_cut, delta):
    """
    Mollified radial indicator 0.5[erfc((|v|-R)/(sqrt(2) delta)) - erfc((|v|+R)/(sqrt(2) delta))].
    """

    if delta <= 0 or R_cut < 0:
        raise ValueError('Cutoff needs R_cut >= 0 and delta > 0!')
    r = np.linalg.norm(np.atleast_2d(v), axis=-1)
    s = np.sqrt(2)*delta

    return 0.5*(erfc((r - R_cut)/s) - erfc((r + R_cut)/s))


class SplittingSurrogate(object):
    """ Splitting L = A + B with A = X K X the cutoff gain part.
    """

    def __init__(self, R_cut, delta, A, B, X, K, a1_emp, sampled_margin=None):

        self.R_cut = R_cut
        self.delta = delta
        self.A = A
        self.B = B
        self.X = X
        self.K = K
        self.a1_emp = a1_emp
        self.sampled_margin = sampled_margin

    def to_dict(self):
        return {'R_cut': self.R_cut, 'delta': self.delta, 'a1_emp': self.a1_emp,
                'sampled_margin': self.sampled_margin}


def _cutoff_grid(basis, order=None):

    if basis.is_gaussian:
        return vb.gauss_hermite_rule(basis.dim, order or basis.degree + 10)
    return basis.grid


def surrogate_splitting(L, nu, R_cut, delta, **kwds):
    """
    Surrogate A = X K X (K = L + nu, X the Galerkin matrix of the cutoff) and
    B = L - A, with the empirical dissipativity margin a1_emp = -max Re W(B).

    :Parameters:
        L, nu : OperatorMatrix
            Collision operator and collision-frequency multiplier on one basis.
        R_cut : float
            Cutoff radius (>= 0).
        delta : float
            Mollification width (> 0).
        **kwds : keyword arguments
            order : int | None
                Gauss-Hermite order of the cutoff moments (Gaussian basis).
            samples : int | 200
                Random vectors for the sampled numerical range.
            seed : int | 0
                Random seed.
    """

    order = kwds.pop('order', None)
    samples = kwds.pop('samples', 200)
    seed = kwds.pop('seed', 0)

    basis = L.basis
    grid = _cutoff_grid(basis, order)
    X = basis.moment_matrix(grid, lambda v: cutoff(v, R_cut, delta))
    K = co.gain_part(L, nu)
    A = L.with_values(X @ K.values @ X, name='A', meta={'R_cut': R_cut, 'delta': delta})
    B = L.with_values(L.values - A.values, name='B', meta={'R_cut': R_cut, 'delta': delta})

    a1 = -co.numerical_abscissa(B)
    g = u.random_vectors(L.n, samples, seed)
    ratios = np.real(np.sum(np.conj(g) * (B.values @ g), axis=0)) / np.sum(np.abs(g)**2, axis=0)
    logger.info('Surrogate splitting R=%.3g delta=%.3g: a1_emp %.6f', R_cut, delta, a1)

    return SplittingSurrogate(R_cut, delta, A, B, X, K, a1, sampled_margin=float(-np.max(ratios)))


def regularization_check(surrogate, **kwds):
    """
    C_A = max over random g of |A g|_E / |g|, with A g = c K (X g) evaluated
    pointwise on a box grid covering the cutoff support.

    :Parameters:
        surrogate : SplittingSurrogate
            Splitting on a polynomial-weight (or Gaussian) basis.
        **kwds : keyword arguments
            order : int | 48
                Gauss-Legendre nodes per dimension of the box grid.
            samples : int | 200
                Random coefficient vectors.
            seed : int | 0
                Random seed.
    """

    order = kwds.pop('order', 48)
    samples = kwds.pop('samples', 200)
    seed = kwds.pop('seed', 0)

    basis = surrogate.A.basis
    R, delta = surrogate.R_cut, surrogate.delta
    box = vb.box_rule(basis.dim, order, R + 6*delta)
    cvals = cutoff(box.nodes, R, delta)
    active = cvals > 0
    if not np.any(active):
        return 0.
    dens = box.weights[active] / vb.maxwellian(box.nodes[active])

    bvals = basis.evaluate(box.nodes[active])
    g = u.random_vectors(basis.n, samples, seed)
    fvals = cvals[active, None] * (bvals @ (surrogate.K.values @ (surrogate.X @ g)))
    num = np.sqrt(np.sum(dens[:, None]*np.abs(fvals)**2, axis=0))
    ratio = num / np.linalg.norm(g, axis=0)

    return float(np.max(ratio))


def dissipativity_scan_B_xi(surrogate, V, xis):
    """
    Margins -max Re W(B - i r V(xi~)) per frequency.

    :Return:
        table : pandas DataFrame
            Columns r, margin and the relative deviation from the xi = 0 margin.
    """

    B = surrogate.B
    base = -co.numerical_abscissa(B)
    rows = []
    for xi in xis:
        xi = xi if isinstance(xi, fo.FrequencyPoint) else fo.FrequencyPoint(xi)
        Bx = fo.assemble_L_xi(B, V, xi)
        margin = -co.numerical_abscissa(Bx)
        rows.append({'r': xi.r, 'margin': margin, 'deviation': abs(margin - base)/abs(base)})

    return pd.DataFrame(rows, columns=['r', 'margin', 'deviation'])


# =========================== #
#      Weight conversion       #
# =========================== #

def _squared_gaussian_rule(dim, order):
    """ Tensor rule for the measure exp(-|v|^2) dv.
    """

    x, w = hermegauss(order)
    nodes, weights = vb._tensor(x/np.sqrt(2), w/np.sqrt(2), dim)

    return vb.QuadratureGrid(nodes, weights, 'lebesgue', exactness=2*order-1, order=order)


def weight_conversion_gram(basis, k, order=None):
    """
    Gram matrix <b_b, b_a>_{E(k)} of a Gaussian-weight basis, so that
    <f, g>_{E(k)} = g^H G f on coefficient vectors.
    """

    if not basis.is_gaussian:
        raise ValueError('Weight conversion starts from the Gaussian-weight basis!')
    order = order or basis.degree + int(np.ceil(k)) + 2
    rule = _squared_gaussian_rule(basis.dim, order)
    pv = basis.reduced_values(rule.nodes)
    # M^2 = (2 pi)^{-d} exp(-|v|^2)
    eff = rule.weights * (1 + np.sum(rule.nodes**2, axis=-1))**k / (2*np.pi)**basis.dim

    G = (pv * eff[:, None]).T @ pv

    return (G + G.conj().T) / 2


def conversion_identity_residual(basis, k, count=8, seed=0):
    """
    Relative residual of <f, g>_E = <f, g <v>^{-2k} M^{-1}>_{E(k)} for random
    f, g on a Gauss-Hermite grid.
    """

    grid = vb.gauss_hermite_rule(basis.dim, basis.degree + 4)
    vals = basis.evaluate(grid.nodes) @ u.random_vectors(basis.n, 2*count, seed)
    factor = (1 + np.sum(grid.nodes**2, axis=-1))**(-k) / vb.maxwellian(grid.nodes)

    res = 0.
    for j in range(count):
        f, g = vals[:, 2*j], vals[:, 2*j + 1]
        lhs = vb.inner_product(f, g, weight='gaussian', grid=grid)
        rhs = vb.inner_product(f, g*factor, weight=('polynomial', k), grid=grid)
        res = max(res, abs(lhs - rhs)/abs(lhs))

    return float(res)
