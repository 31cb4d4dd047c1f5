#! /usr/bin/env python
# -*- coding: utf-8 -*-

"""
@author: boltzspec developers

Linearized hard-sphere collision operator L = -nu + K on Gaussian-weight
trial spaces: collision frequency, Galerkin assembly, kernel and gap checks.
"""

from __future__ import print_function, division
from . import utils as u, velocity_basis as vb
from .base import BoltzspecError
import math
import logging
import warnings as wn
import numpy as np
import dask as d
import psutil as ps
import scipy.linalg as sla
from scipy.special import ellipe, erf, gammaln
from numpy.polynomial.legendre import leggauss
from threadpoolctl import threadpool_limits


logger = logging.getLogger(__name__)

N_CPU = ps.cpu_count()
GAP_LOWER_BOUND = np.pi / (48*np.sqrt(2*np.e))
RADIAL_CUTOFF = 12.0
_GL_NODES, _GL_WEIGHTS = leggauss(80)


class KernelDimensionError(BoltzspecError):
    """ The numerical kernel of L does not have dimension d + 2.
    """
    pass


# =========================== #
#     Collision frequency      #
# =========================== #

def _chi_density(s, dim):
    """ Density of |Z| for a standard d-dimensional Gaussian Z.
    """

    return s**(dim-1) * np.exp(-0.5*s**2) / (2**(dim/2 - 1) * math.gamma(dim/2))


def _mean_distance(x, s, dim):
    """ Average of |v - s w| over unit vectors w, for |v| = x.
    """

    with np.errstate(divide='ignore', invalid='ignore'):
        if dim == 3:
            # the larger of x and s is positive unless both vanish, where the mean is 0
            big = np.maximum(np.maximum(x, s), np.finfo(float).tiny)
            return big + np.minimum(x, s)**2/(3*big)
        elif dim == 2:
            tot = x + s
            m = np.where(tot > 0, 4*x*s/tot**2, 0.)
            return (2/np.pi) * tot * ellipe(m)

    raise ValueError('Unsupported dimension ' + str(dim) + '!')


def _segment(x, a, b, dim):

    half = (b - a)[:, None] / 2
    s = a[:, None] + half*(_GL_NODES[None, :] + 1)
    vals = _chi_density(s, dim) * _mean_distance(x[:, None], s, dim)

    return np.sum(half * _GL_WEIGHTS[None, :] * vals, axis=1)


def nu_radial(x, dim):
    """
    Collision frequency as a function of the speed |v|.

    :Parameters:
        x : float/array
            Speeds |v| >= 0.
        dim : int
            Velocity dimension.

    :Return:
        nu : float/array
            nu(|v|) = |S^{d-1}| int M(v_*) |v - v_*| dv_*.
    """

    x = np.asarray(x, dtype='float64')
    xf = np.abs(x.ravel())
    split = np.minimum(xf, RADIAL_CUTOFF)
    # split the radial integral at the kink s = |v|
    total = _segment(xf, np.zeros_like(xf), split, dim) + \
            _segment(xf, split, np.full_like(xf, RADIAL_CUTOFF), dim)
    nu = vb.sphere_measure(dim) * total

    return nu.reshape(x.shape) if x.ndim else float(nu[0])


def compute_nu(v):
    """
    Collision frequency nu(v) = int int M(v_*) |v - v_*| dsigma dv_*.

    :Parameters:
        v : array
            Velocity of shape (d,) or points of shape (..., d).
    """

    v = np.asarray(v, dtype='float64')
    return nu_radial(np.linalg.norm(v, axis=-1), v.shape[-1])


def nu_closed_form_3d(x):
    """ Closed form of nu(|v|) in three dimensions.
    """

    x = np.asarray(x, dtype='float64')
    with np.errstate(divide='ignore', invalid='ignore'):
        body = np.sqrt(2/np.pi)*np.exp(-0.5*x**2) + (x + 1/x)*erf(x/np.sqrt(2))

    return 4*np.pi*np.where(x > 0, body, 2*np.sqrt(2/np.pi))


class NuBounds(object):
    """ Constants nu_0 <= nu(v)/<v> <= nu_1 over a grid of speeds.
    """

    def __init__(self, nu0, nu1, grid, dim):

        self.nu0 = nu0
        self.nu1 = nu1
        self.grid = grid
        self.dim = dim

    def to_dict(self):
        return {'dim': self.dim, 'nu0': self.nu0, 'nu1': self.nu1,
                'ratio': self.nu1/self.nu0, 'v_max': float(np.max(self.grid)),
                'points': int(self.grid.size)}


def estimate_nu_bounds(grid, dim=3):
    """
    Bounds of nu(v)/<v> over a grid of speeds.

    :Parameters:
        grid : 1D array
            Speeds |v| covering [0, v_max].
        dim : int | 3
            Velocity dimension.
    """

    grid = np.asarray(grid, dtype='float64').ravel()
    if grid.size == 0:
        raise ValueError('Empty speed grid!')
    if grid.size > 1 and grid.max() < 10:
        wn.warn('Speed grid ends below 10, the linear growth of nu is not sampled!')

    ratio = nu_radial(grid, dim) / np.sqrt(1 + grid**2)

    return NuBounds(float(ratio.min()), float(ratio.max()), grid, dim)


# =========================== #
#       Operator matrices      #
# =========================== #

class OperatorMatrix(object):
    """
    Dense matrix of a bilinear form on an orthonormal trial basis, acting on
    coefficient columns: values[a, b] = <A b_b, b_a>.

    :Parameters:
        values : 2D array
            Square matrix of size basis.n.
        basis : OrthonormalBasis
            Trial basis.
        inner : str | 'E'
            Inner product tag, 'E' (Gaussian) or 'E(k)' (polynomial).
        name : str | ''
            Operator name.
        meta : dict | None
            Assembly metadata (quadrature orders, cutoffs, directions).
    """

    def __init__(self, values, basis, inner='E', name='', meta=None):

        values = np.array(values, dtype='complex128')
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError('Operator matrices must be square!')
        if values.shape[0] != basis.n:
            raise ValueError('Matrix size ' + str(values.shape[0]) + ' does not match the basis size ' + str(basis.n) + '!')

        self.values = values
        self.basis = basis
        self.inner = inner
        self.name = name
        self.meta = meta or {}

    @property
    def n(self):
        return self.values.shape[0]

    def same_space(self, other):
        return self.inner == other.inner and self.basis.spec == other.basis.spec and self.n == other.n

    def check_space(self, other):
        if not self.same_space(other):
            raise ValueError('Basis mismatch between ' + repr(self.name) + ' and ' + repr(other.name) + '!')

    def with_values(self, values, name=None, meta=None):
        return OperatorMatrix(values, self.basis, self.inner, name or self.name,
                              self.meta if meta is None else meta)

    def hermitian_part(self):
        return (self.values + self.values.conj().T) / 2

    def hermitian_residual(self):
        """ max|A - A^H| / max|A|.
        """

        scale = np.max(np.abs(self.values))
        if scale == 0:
            return 0.
        return float(np.max(np.abs(self.values - self.values.conj().T)) / scale)

    def is_hermitian(self, tol=1e-8):
        return self.hermitian_residual() < tol

    def __repr__(self):
        return 'OperatorMatrix(' + repr(self.name) + ', n=' + str(self.n) + ', inner=' + self.inner + ')'


def _moment_weights(d, betas, sphere):
    """ Radial and angular moment matrix W[b, c] = R(|b|+|c|) C(b, c).
    """

    betas = np.asarray(betas)
    mono = np.ones((sphere.size, len(betas)))
    for k in range(d):
        mono *= sphere.nodes[:, k][:, None]**betas[None, :, k]
    ws = sphere.weights
    moments = ws @ mono
    msum = (mono * ws[:, None]).T @ mono
    area = ws.sum()
    angular = 2*area*msum - 2*np.outer(moments, moments)

    degs = betas.sum(axis=1)
    radial = 2.0**d * np.exp(gammaln((d + degs[:, None] + degs[None, :] + 1) / 2))

    return radial * angular


def _derivative_pairs(alphas, betas):
    """ Nonzero scaled derivatives d^beta h_alpha / beta! as (basis index,
    beta index, coefficient, remaining multi-index).
    """

    pa, pb, coefs, rest = [], [], [], []
    for ia, alpha in enumerate(alphas):
        for ib, beta in enumerate(betas):
            if all(b <= a for a, b in zip(alpha, beta)):
                c = 1.
                for a, b in zip(alpha, beta):
                    c *= math.sqrt(math.factorial(a) / math.factorial(a - b)) / math.factorial(b)
                pa.append(ia)
                pb.append(ib)
                coefs.append(c)
                rest.append([a - b for a, b in zip(alpha, beta)])

    return np.array(pa), np.array(pb), np.array(coefs), np.array(rest, dtype='int64')


def _chunk_contribution(nodes, weights, pairs, W, n, nbeta, degree):

    pa, pb, coefs, rest = pairs
    vals = vb.product_values(nodes, rest, degree) * coefs[None, :]
    T = np.zeros((nodes.shape[0], n, nbeta))
    T[:, pa, pb] = vals
    Y = (T @ W) * weights[:, None, None]

    return Y.transpose(1, 0, 2).reshape(n, -1) @ T.transpose(1, 0, 2).reshape(n, -1).T


def assemble_L(basis, quad, sphere, **kwds):
    """
    Galerkin matrix of the linearized collision operator on a Gaussian basis.

    The symmetric four-point form -1/4 int M M_* (Delta phi)(Delta psi) |v - v_*|
    is evaluated exactly: with g = (v + v_*)/2 and v - v_* = rho omega, the
    difference Delta phi of a polynomial is an even polynomial in rho with
    coefficients d^beta phi(g)/beta!, so the rho-integral has closed form and
    the angular part reduces to sphere moments.

    :Parameters:
        basis : OrthonormalBasis
            Gaussian-weight basis.
        quad : QuadratureGrid
            Gauss-Hermite grid with exactness >= 2N + 3 (used for the g-integral).
        sphere : QuadratureGrid
            Sphere rule with exactness >= 2N.
        **kwds : keyword arguments
            chunk : int | 256
                Number of g-nodes per task.
            ncores : int | N_CPU
                Number of parallel workers.
            scheduler : str | 'threads'
                Dask scheduler.

    :Return:
        L : OperatorMatrix
    """

    if not basis.is_gaussian:
        raise ValueError('Polynomial-weight bases are assembled by weighted_spaces.assemble_in_Ek!')
    N, dim = basis.degree, basis.dim
    if quad.measure != 'gaussian' or quad.exactness is None or quad.exactness < 2*N + 3:
        raise ValueError('Velocity quadrature must be a Gaussian rule of exactness >= 2N + 3!')
    if sphere.exactness < 2*N or sphere.dim != dim:
        raise ValueError('Sphere rule must be exact to degree 2N in dimension ' + str(dim) + '!')

    chunk = kwds.pop('chunk', 256)
    ncores = kwds.pop('ncores', N_CPU) or N_CPU
    scheduler = kwds.pop('scheduler', 'threads')

    betas = [b for b in vb.multi_indices(dim, N) if sum(b) >= 2 and sum(b) % 2 == 0]
    W = _moment_weights(dim, betas, sphere)
    pairs = _derivative_pairs(basis.alphas, betas)
    gnodes = quad.nodes / np.sqrt(2)

    tasks = []
    for start in range(0, quad.size, chunk):
        sl = slice(start, start + chunk)
        tasks.append(d.delayed(_chunk_contribution)(gnodes[sl], quad.weights[sl],
                        pairs, W, basis.n, len(betas), N))

    with threadpool_limits(limits=1, user_api='blas'):
        parts = d.compute(*tasks, scheduler=scheduler, num_workers=ncores)
    # (2 pi)^{-d} int e^{-|g|^2} dg = 2^{-d} pi^{-d/2} E[.]
    values = -sum(parts) / (2**dim * np.pi**(dim/2))
    logger.info('Assembled L for d=%d, N=%d (n=%d, %d derivative orders)', dim, N, basis.n, len(betas))

    meta = {'quad_order': quad.order, 'sphere_order': sphere.order, 'method': 'taylor-moment'}
    return OperatorMatrix(values, basis, 'E', name='L', meta=meta)


def assemble_nu_multiplier(basis, quad, extra_order=8):
    """
    Galerkin matrix of multiplication by nu(v).

    :Parameters:
        basis : OrthonormalBasis
            Gaussian-weight basis.
        quad : QuadratureGrid
            Reference Gauss-Hermite grid.
        extra_order : int | 8
            Additional nodes per dimension for the non-polynomial multiplier.
    """

    if not basis.is_gaussian:
        raise ValueError('Polynomial-weight multipliers are assembled by weighted_spaces.assemble_in_Ek!')

    grid = vb.gauss_hermite_rule(basis.dim, quad.order + extra_order)
    values = basis.moment_matrix(grid, multiplier=compute_nu(grid.nodes))

    return OperatorMatrix(values, basis, 'E', name='nu', meta={'quad_order': grid.order})


def gain_part(L, nu_matrix):
    """ K = L + nu on a common basis.
    """

    L.check_space(nu_matrix)
    return L.with_values(L.values + nu_matrix.values, name='K')


def compactness_profile(K):
    """ Singular values of K normalized by the largest one.
    """

    sv = sla.svdvals(K.values if isinstance(K, OperatorMatrix) else K)
    return sv / sv[0] if sv[0] > 0 else sv


# =========================== #
#     Kernel and the gap       #
# =========================== #

def _hermitian_spectrum(L):

    mat = L.hermitian_part() if isinstance(L, OperatorMatrix) else (L + np.conj(L).T)/2
    return sla.eigh(mat)


def kernel_basis(L):
    """
    Orthonormal basis of the numerical kernel, eigenvalues |lambda| below
    one hundredth of the (d+3)-rd smallest magnitude.

    :Return:
        vecs : 2D array
            Coefficient vectors as columns, shape (n, d+2).
    """

    d = L.basis.dim
    evals, evecs = _hermitian_spectrum(L)
    mags = np.abs(evals)
    if mags.size < d + 3:
        raise KernelDimensionError('Basis too small to separate the kernel!')
    candidate = np.sort(mags)[d+2]
    kernel = mags < candidate/100
    if kernel.sum() != d + 2:
        raise KernelDimensionError('Numerical kernel has dimension ' + str(int(kernel.sum())) +
                                   ' instead of ' + str(d+2) + ', the assembly is inconsistent!')

    return evecs[:, kernel]


def kernel_projector(vecs):
    """ Orthogonal projector onto the span of orthonormal columns.
    """

    return vecs @ np.conj(vecs).T


def principal_angles(A, B):
    """ Principal angles between the column spans of A and B.
    """

    return sla.subspace_angles(A, B)


def spectral_gap(L):
    """
    Distance a_0 between 0 and the rest of the spectrum of the Hermitian part of L.
    """

    d = L.basis.dim
    evals, _ = _hermitian_spectrum(L)
    byscale = evals[np.argsort(np.abs(evals))]
    gap = -float(np.real(byscale[d+2]))
    if gap < GAP_LOWER_BOUND:
        wn.warn('Discrete spectral gap %.5f is below the analytic lower bound %.5f!' % (gap, GAP_LOWER_BOUND))

    return gap


def coercivity_check(L, samples=200, seed=0, kernel=None):
    """
    Sampled coercivity constant min_g -<L g, g> / |(1 - Pi) g|^2 over random
    coefficient vectors, bounded below by the spectral gap.

    :Parameters:
        L : OperatorMatrix
            Linearized collision operator in E.
        samples : int | 200
            Number of random vectors.
        seed : int | 0
            Seed of the random vectors.
        kernel : 2D array | None
            Orthonormal kernel columns, the numerical kernel when None.

    :Return:
        ratio : float
            Smallest sampled Dirichlet-form ratio.
    """

    kernel = kernel_basis(L) if kernel is None else kernel
    g = u.random_vectors(L.n, samples, seed)
    g = g - kernel_projector(kernel) @ g
    form = -np.real(np.sum(np.conj(g) * (L.values @ g), axis=0))

    return float(np.min(form / np.sum(np.abs(g)**2, axis=0)))


def numerical_abscissa(A):
    """ Largest eigenvalue of the Hermitian part, the maximum of Re<Ag, g>/<g, g>.
    """

    mat = A.values if isinstance(A, OperatorMatrix) else np.asarray(A)
    return float(sla.eigvalsh((mat + mat.conj().T)/2)[-1])


def conservation_residual(L, kernel=None):
    """ max_j sup_g |<L g, phi_j>| / |g| over the normalized collision invariants.
    """

    kernel = vb.analytic_kernel(L.basis) if kernel is None else kernel
    rows = np.conj(kernel).T @ L.values

    return float(np.max(np.linalg.norm(rows, axis=1)))


def rotation_equivariance_check(L, O):
    """
    Residual max|Pi_O L Pi_O^{-1} - L| for a signed coordinate permutation O.
    """

    Pi = vb.signed_permutation_operator(L.basis, O)
    return float(np.max(np.abs(Pi @ L.values @ Pi.T - L.values)))
