#! /usr/bin/env python
# -*- coding: utf-8 -*-

"""
@author: boltzspec developers

Velocity-space trial bases and quadrature rules. Gaussian-weight bases are
products of orthonormal (probabilists') Hermite polynomials times the
Maxwellian; polynomial-weight bases are polynomials times an algebraic decay
profile, orthonormalized under the <v>^{2k} pairing.
"""

from __future__ import print_function, division
from . import utils as u
from .base import BoltzspecError, content_hash
import math
import logging
import itertools
import warnings as wn
import numpy as np
import numba as nb
import scipy.linalg as sla
from scipy.linalg import lapack
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss


logger = logging.getLogger(__name__)

WEIGHTS = ('gaussian', 'polynomial')


class RepresentationError(BoltzspecError, ValueError):
    """ Transformation cannot be represented on the truncated basis.
    """
    pass


# =========================== #
# Weight functions and Hermite #
# =========================== #

def maxwellian(v):
    """ Standard Maxwellian M(v) = exp(-|v|^2/2)/(2 pi)^{d/2}, v of shape (..., d).
    """

    v = np.asarray(v, dtype='float64')
    d = v.shape[-1]
    return np.exp(-0.5*np.sum(v**2, axis=-1)) / (2*np.pi)**(d/2)


def japanese_bracket(v):
    """ <v> = (1 + |v|^2)^{1/2}.
    """

    v = np.asarray(v, dtype='float64')
    return np.sqrt(1 + np.sum(v**2, axis=-1))


def sphere_measure(d):
    """ Surface measure of the unit sphere S^{d-1}.
    """

    return 2 * np.pi**(d/2) / math.gamma(d/2)


@nb.njit(cache=True)
def hermite_table(x, nmax):
    """ Orthonormal probabilists' Hermite polynomials He_n(x)/sqrt(n!), n = 0..nmax,
    evaluated at every entry of the 1D array x. Returns an array of shape (len(x), nmax+1).
    """

    out = np.empty((x.size, nmax+1))
    for i in range(x.size):
        out[i, 0] = 1.0
        if nmax >= 1:
            out[i, 1] = x[i]
        for n in range(1, nmax):
            out[i, n+1] = (x[i]*out[i, n] - np.sqrt(n)*out[i, n-1]) / np.sqrt(n+1)

    return out


def multi_indices(dim, degree):
    """ Multi-indices of total degree <= degree in graded lexicographic order.
    """

    indices = []
    for deg in range(degree + 1):
        block = [a for a in itertools.product(range(deg+1), repeat=dim) if sum(a) == deg]
        block.sort(reverse=True)
        indices.extend(block)

    return indices


def product_values(points, alphas, nmax):
    """ Values of the Hermite products prod_k h_{alpha_k}(v_k) at the points.

    :Parameters:
        points : 2D array
            Velocity points of shape (npts, d).
        alphas : 2D int array
            Multi-indices of shape (n, d).
        nmax : int
            Largest single-variable degree.

    :Return:
        vals : 2D array
            Values of shape (npts, n).
    """

    points = np.atleast_2d(np.asarray(points, dtype='float64'))
    alphas = np.asarray(alphas, dtype='int64')
    vals = None
    for k in range(points.shape[1]):
        table = hermite_table(np.ascontiguousarray(points[:, k]), nmax)
        col = table[:, alphas[:, k]]
        vals = col if vals is None else vals * col

    return vals


# =========================== #
#         Basis specs          #
# =========================== #

def min_decay_exponent(degree, k, dim):
    """ Smallest integer p with p > (N + k + d/2 + 1)/2, the condition for
    nu(v) times every trial function to lie in the weighted space.
    """

    return int(math.floor((degree + k + dim/2 + 1) / 2)) + 1


class BasisSpec(object):
    """
    Description of a truncated velocity-space trial basis.

    :Parameters:
        dim : int
            Velocity dimension d (2 or 3).
        degree : int
            Maximal total polynomial degree N (>= 2).
        weight : str | 'gaussian'
            'gaussian' for the space E = L^2(M^{-1/2}), 'polynomial' for E(k).
        k : float | None
            Polynomial weight exponent, required > k_* for 'polynomial'.
        p : int | None
            Decay exponent of the trial profile; smallest admissible integer when None.
        width : float | None
            Scale w of the profile (1 + |v|^2/w)^{-p}; 2p when None.
        maxwellian_degree : int | None
            Polynomial weight only: degree m of the Hermite products times M that
            enlarge the trial space (3 when None, at least 2).
    """

    def __init__(self, dim, degree, weight='gaussian', k=None, p=None, width=None, maxwellian_degree=None):

        if dim not in (2, 3):
            raise ValueError('Only velocity dimensions 2 and 3 are supported!')
        if int(degree) != degree or degree < 2:
            raise ValueError('The maximal degree must be an integer >= 2 so that the collision invariants are representable!')
        if weight not in WEIGHTS:
            raise ValueError('Weight must be one of ' + str(WEIGHTS) + '!')

        self.dim = int(dim)
        self.degree = int(degree)
        self.weight = weight

        if weight == 'polynomial':
            from .weighted_spaces import k_star
            if k is None or k <= k_star():
                raise ValueError('Polynomial weight requires k > k_* = ' + '%.6f' % k_star() + '!')
            pmin = min_decay_exponent(self.degree, k, self.dim)
            if p is None:
                p = pmin
            elif p < pmin:
                raise ValueError('Decay exponent p = ' + str(p) + ' leaves trial functions outside E(k), need p >= ' + str(pmin) + '!')
            self.k, self.p = float(k), int(p)
            self.width = float(width) if width is not None else 2.0*self.p
            if self.width <= 0:
                raise ValueError('Profile width must be positive!')
            m = 3 if maxwellian_degree is None else maxwellian_degree
            if int(m) != m or m < 2:
                raise ValueError('The Maxwellian block needs degree >= 2 to hold the collision invariants!')
            self.maxwellian_degree = int(m)
        else:
            if maxwellian_degree is not None:
                raise ValueError('The Maxwellian block only applies to the polynomial weight!')
            self.k, self.p, self.width, self.maxwellian_degree = None, None, None, None

    @property
    def size(self):

        n = math.comb(self.degree + self.dim, self.dim)
        if self.maxwellian_degree is not None:
            n += math.comb(self.maxwellian_degree + self.dim, self.dim)
        return n

    @property
    def is_gaussian(self):
        return self.weight == 'gaussian'

    def to_dict(self):
        return {'d': self.dim, 'N': self.degree, 'weight': self.weight,
                'k': self.k, 'p': self.p, 'width': self.width, 'maxwellian_degree': self.maxwellian_degree}

    @classmethod
    def from_dict(cls, dct):
        return cls(dct['d'], dct['N'], weight=dct.get('weight', 'gaussian'),
                   k=dct.get('k'), p=dct.get('p'), width=dct.get('width'),
                   maxwellian_degree=dct.get('maxwellian_degree'))

    def hash(self):
        return content_hash(self.to_dict())

    def __eq__(self, other):
        return isinstance(other, BasisSpec) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(self.hash())

    def __repr__(self):
        return 'BasisSpec(' + ', '.join(k + '=' + repr(v) for k, v in self.to_dict().items()) + ')'


# =========================== #
#          Quadrature          #
# =========================== #

class QuadratureGrid(object):
    """
    Quadrature nodes and positive weights.

    The measure tag fixes what the weights integrate against: 'gaussian'
    means sum w_i f(v_i) ~ int f M dv, 'lebesgue' means sum w_i f(v_i) ~ int f dv,
    'sphere' means the surface measure on S^{d-1}.
    """

    def __init__(self, nodes, weights, measure, exactness=None, order=None):

        self.nodes = np.atleast_2d(np.asarray(nodes, dtype='float64'))
        self.weights = np.asarray(weights, dtype='float64').ravel()
        if self.nodes.shape[0] != self.weights.size:
            raise ValueError('Node and weight counts differ!')
        self.measure = measure
        self.exactness = exactness
        self.order = order

    @property
    def size(self):
        return self.weights.size

    @property
    def dim(self):
        return self.nodes.shape[1]

    def integrate(self, values):
        """ Quadrature sum over the first axis of values.
        """

        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))

    def lebesgue_weights(self):
        """ Weights integrating against dv (or the sphere measure).
        """

        if self.measure == 'gaussian':
            return self.weights / maxwellian(self.nodes)
        return self.weights

    def to_dict(self):
        return {'measure': self.measure, 'order': self.order, 'exactness': self.exactness,
                'dim': self.dim, 'size': self.size}


def _tensor(nodes1d, weights1d, dim):

    grids = np.meshgrid(*([nodes1d]*dim), indexing='ij')
    wgrids = np.meshgrid(*([weights1d]*dim), indexing='ij')
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.prod(np.stack([w.ravel() for w in wgrids], axis=-1), axis=-1)

    return nodes, weights


def gauss_hermite_rule(dim, order):
    """ Tensor Gauss-Hermite rule for the standard Gaussian measure M(v) dv.
    """

    if order < 1:
        raise ValueError('Quadrature order must be positive!')
    x, w = hermegauss(order)
    nodes, weights = _tensor(x, w / np.sqrt(2*np.pi), dim)

    return QuadratureGrid(nodes, weights, 'gaussian', exactness=2*order-1, order=order)


def mapped_rule(dim, order, scale=2.0):
    """ Tensor Gauss-Legendre rule mapped to the whole line by v = s t/(1-t^2),
    for integrands with algebraic decay (Lebesgue measure).
    """

    if order < 1:
        raise ValueError('Quadrature order must be positive!')
    t, w = leggauss(order)
    x = scale * t / (1 - t**2)
    jac = scale * (1 + t**2) / (1 - t**2)**2
    nodes, weights = _tensor(x, w*jac, dim)

    return QuadratureGrid(nodes, weights, 'lebesgue', exactness=None, order=order)


def box_rule(dim, order, halfwidth):
    """ Tensor Gauss-Legendre rule on the box [-halfwidth, halfwidth]^d (Lebesgue measure).
    """

    t, w = leggauss(order)
    nodes, weights = _tensor(halfwidth*t, halfwidth*w, dim)

    return QuadratureGrid(nodes, weights, 'lebesgue', exactness=2*order-1, order=order)


def build_quadrature(spec, order, **kwds):
    """
    Velocity quadrature matched to a basis specification.

    :Parameters:
        spec : BasisSpec
            Basis specification.
        order : int
            Nodes per dimension, at least N + 3.
        **kwds : keyword arguments
            scale : float | 2.0
                Map scale of the algebraic-decay rule (polynomial weight only).

    :Return:
        grid : QuadratureGrid
            Gauss-Hermite rule (Gaussian weight) or mapped Gauss-Legendre rule.
    """

    if order < spec.degree + 3:
        raise ValueError('Quadrature order ' + str(order) + ' is below N + 3 = ' + str(spec.degree + 3) + '!')

    if spec.is_gaussian:
        grid = gauss_hermite_rule(spec.dim, order)
    else:
        grid = mapped_rule(spec.dim, order, scale=kwds.pop('scale', 2.0))
    logger.debug('Quadrature order %d in d=%d: %d nodes', order, spec.dim, grid.size)

    return grid


def sphere_quadrature(d, order):
    """
    Quadrature on the unit sphere S^{d-1}, exact for polynomials of degree
    up to 2*order - 1 and symmetric under v -> -v.

    :Parameters:
        d : int
            Ambient dimension (2 or 3).
        order : int
            Rule order (>= 2). Circle: 2*order equispaced angles. Sphere:
            Gauss-Legendre in cos(theta) times 2*order azimuthal angles.
    """

    if order < 2:
        raise ValueError('Sphere quadrature order must be at least 2!')

    if d == 2:
        nphi = 2*order
        phi = 2*np.pi*np.arange(nphi)/nphi
        nodes = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        weights = np.full(nphi, 2*np.pi/nphi)
    elif d == 3:
        z, wz = leggauss(order)
        nphi = 2*order
        phi = np.pi*np.arange(nphi)/order
        zz, pp = np.meshgrid(z, phi, indexing='ij')
        rho = np.sqrt(1 - zz**2)
        nodes = np.stack([(rho*np.cos(pp)).ravel(), (rho*np.sin(pp)).ravel(), zz.ravel()], axis=-1)
        weights = np.repeat(wz, nphi) * (2*np.pi/nphi)
    else:
        raise ValueError('Unsupported sphere dimension ' + str(d) + '!')

    return QuadratureGrid(nodes, weights, 'sphere', exactness=2*order-1, order=order)


# =========================== #
#       Orthonormal bases      #
# =========================== #

class OrthonormalBasis(object):
    """
    Orthonormal trial basis b_a = R_a(v) * profile(v).

    For Gaussian weight R_a are the Hermite products indexed by the
    multi-indices and the profile is M. For polynomial weight the profile is
    (1 + |v|^2/w)^{-p} and R_a = sum_b C_ab T_b, with C from the pivoted Gram
    factorization of the raw trial functions T_b profile: Hermite products H_alpha
    of degree <= N, followed by the Maxwellian block H_beta M / profile of degree <= m.
    """

    def __init__(self, spec, alphas, coeffs=None, grid=None, gram_residual=0.0, malphas=()):

        self.spec = spec
        self.alphas = [tuple(int(x) for x in a) for a in alphas]
        self.malphas = [tuple(int(x) for x in a) for a in malphas]
        self._alpha_array = np.asarray(self.alphas, dtype='int64')
        self._malpha_array = np.asarray(self.malphas, dtype='int64').reshape(-1, spec.dim)
        self.coeffs = coeffs
        self.grid = grid
        self.gram_residual = gram_residual
        self._index = {a: i for i, a in enumerate(self.alphas)}

    @property
    def n(self):
        return len(self.alphas) + len(self.malphas)

    @property
    def dim(self):
        return self.spec.dim

    @property
    def degree(self):
        return self.spec.degree

    @property
    def is_gaussian(self):
        return self.spec.is_gaussian

    def index_of(self, alpha):
        """ Position of a multi-index (Gaussian bases only).
        """

        if self.coeffs is not None:
            raise RepresentationError('Multi-index positions are only defined for Hermite-product bases!')
        return self._index[tuple(alpha)]

    def raw_values(self, points):
        """ Values of the raw trial functions divided by the profile, shape (npts, n).
        """

        points = np.atleast_2d(points)
        raw = product_values(points, self._alpha_array, self.degree)
        if not self.malphas:
            return raw
        ratio = maxwellian(points) / self.profile(points)
        block = product_values(points, self._malpha_array, self.spec.maxwellian_degree) * ratio[:, None]

        return np.hstack([raw, block])

    def reduced_values(self, points):
        """ Values of R_a = b_a / profile at the points, shape (npts, n).
        """

        raw = self.raw_values(points)
        if self.coeffs is None:
            return raw
        return raw @ self.coeffs.T

    def profile(self, points):

        points = np.atleast_2d(points)
        if self.is_gaussian:
            return maxwellian(points)
        return (1 + np.sum(points**2, axis=-1)/self.spec.width)**(-self.spec.p)

    def weight_function(self, points):
        """ Density of the space's inner product: M^{-1} or <v>^{2k}.
        """

        points = np.atleast_2d(points)
        if self.is_gaussian:
            return 1 / maxwellian(points)
        return (1 + np.sum(points**2, axis=-1))**self.spec.k

    def evaluate(self, points):
        """ Values of the basis functions b_a at the points, shape (npts, n).
        """

        points = np.atleast_2d(points)
        return self.reduced_values(points) * self.profile(points)[:, None]

    def effective_weights(self, grid):
        """ Weights w_i such that <b_a, b_b> = sum_i w_i R_a(v_i) R_b(v_i).
        """

        if self.is_gaussian:
            if grid.measure == 'gaussian':
                return grid.weights
            return grid.weights * maxwellian(grid.nodes)

        return grid.lebesgue_weights() * self.weight_function(grid.nodes) * self.profile(grid.nodes)**2

    def moment_matrix(self, grid, multiplier=None):
        """ Galerkin matrix of a multiplication operator, entries <m b_b, b_a>.

        :Parameters:
            grid : QuadratureGrid
                Velocity quadrature.
            multiplier : 1D array/callable | None
                Multiplier values at the grid nodes (or function of the nodes); 1 when None.
        """

        eff = self.effective_weights(grid)
        if multiplier is not None:
            mvals = multiplier(grid.nodes) if callable(multiplier) else np.asarray(multiplier)
            eff = eff * mvals
        rv = self.reduced_values(grid.nodes)

        return (rv * eff[:, None]).T @ rv

    def gram(self, grid):
        return self.moment_matrix(grid)

    def hash(self):
        return self.spec.hash()

    def to_dict(self):
        return u.dictmerge(self.spec.to_dict(), {'n': self.n})


def _raw_gram(raw_basis, grid):
    """ Gram matrix of the raw trial functions T_a(v) profile(v) under <v>^{2k}.
    """

    raw = raw_basis.raw_values(grid.nodes)
    eff = raw_basis.effective_weights(grid)

    return (raw * eff[:, None]).T @ raw


def stable_mapped_quadrature(spec, order=None, max_order=64, tol=1e-10, scale=2.0):
    """
    Mapped quadrature whose order is doubled until the raw Gram matrix is
    stable to a relative tolerance.

    :Return:
        grid, gram : QuadratureGrid, 2D array
    """

    raw_basis = OrthonormalBasis(spec, multi_indices(spec.dim, spec.degree),
                                 malphas=multi_indices(spec.dim, spec.maxwellian_degree))
    order = order or max(spec.degree + 3, 12)
    grid = mapped_rule(spec.dim, order, scale=scale)
    gram = _raw_gram(raw_basis, grid)

    while True:
        if 2*order > max_order:
            wn.warn('Mapped quadrature reached the maximal order ' + str(order) + ' before Gram stability!')
            return grid, gram

        finer = mapped_rule(spec.dim, 2*order, scale=scale)
        gfine = _raw_gram(raw_basis, finer)
        scl = np.sqrt(np.outer(np.diag(gfine), np.diag(gfine)))
        change = np.max(np.abs(gfine - gram) / scl)
        logger.debug('Mapped order %d -> %d, relative Gram change %.3e', order, 2*order, change)
        order, grid, gram = 2*order, finer, gfine
        if change < tol:
            return grid, gram


def build_basis(spec, **kwds):
    """
    Build an orthonormal basis for a specification.

    :Parameters:
        spec : BasisSpec
            Basis specification.
        **kwds : keyword arguments
            ================  ===========  ===========  ========================================
             keyword           data type     default     meaning
            ================  ===========  ===========  ========================================
              order              int          None       Starting mapped order (polynomial weight)
              max_order          int           64        Largest mapped order tried
              tol               float        1e-12       Pivoted-Cholesky rank tolerance
              scale             float         2.0        Map scale of the algebraic-decay rule
            ================  ===========  ===========  ========================================

    :Return:
        basis : OrthonormalBasis
    """

    alphas = multi_indices(spec.dim, spec.degree)
    if spec.is_gaussian:
        # Hermite products times M are orthonormal in E by construction
        return OrthonormalBasis(spec, alphas)

    tol = kwds.pop('tol', 1e-12)
    grid, gram = stable_mapped_quadrature(spec, order=kwds.pop('order', None),
                    max_order=kwds.pop('max_order', 64), scale=kwds.pop('scale', 2.0))

    dscale = 1 / np.sqrt(np.diag(gram))
    gscaled = gram * np.outer(dscale, dscale)
    c, piv, rank, info = lapack.dpstrf(gscaled, tol=tol, lower=0)
    n = gram.shape[0]
    if info < 0:
        raise ValueError('Pivoted Gram factorization failed!')
    if rank < n:
        raise ValueError('Trial functions are numerically dependent (rank ' + str(rank) + ' < ' + str(n) + ')!')

    upper = np.triu(c)
    uinvt = sla.solve_triangular(upper, np.eye(n), trans='T', lower=False)
    coeffs = np.zeros((n, n))
    coeffs[:, piv - 1] = uinvt
    coeffs = coeffs * dscale[None, :]

    residual = np.max(np.abs(coeffs @ gram @ coeffs.T - np.eye(n)))
    if residual > 1e-8:
        wn.warn('Gram residual of the polynomial-weight basis is ' + '%.2e' % residual + '!')
    logger.info('Polynomial-weight basis n=%d, p=%d, mapped order %d, Gram residual %.2e',
                n, spec.p, grid.order, residual)

    return OrthonormalBasis(spec, alphas, coeffs=coeffs, grid=grid, gram_residual=residual,
                            malphas=multi_indices(spec.dim, spec.maxwellian_degree))


# =========================== #
#   Inner products, kernel     #
# =========================== #

def _weight_density(weight, nodes):

    if weight is None or weight == 'gaussian':
        return 1 / maxwellian(nodes)
    if isinstance(weight, BasisSpec):
        if weight.is_gaussian:
            return 1 / maxwellian(nodes)
        return (1 + np.sum(nodes**2, axis=-1))**weight.k
    if isinstance(weight, (tuple, list)) and weight[0] == 'polynomial':
        return (1 + np.sum(nodes**2, axis=-1))**weight[1]

    raise ValueError('Unknown weight ' + repr(weight) + '!')


def inner_product(f, g, weight=None, grid=None):
    """
    Weighted inner product <f, g> = int f conj(g) W dv, linear in f.

    :Parameters:
        f, g : 1D arrays
            Coefficient vectors on a common orthonormal basis (grid None),
            or function values at the nodes of a common grid.
        weight : str/BasisSpec/tuple | None
            'gaussian' (W = M^{-1}), ('polynomial', k) (W = <v>^{2k}) or a BasisSpec.
        grid : QuadratureGrid | None
            Grid the values live on.
    """

    f, g = np.asarray(f), np.asarray(g)
    if f.shape != g.shape:
        raise ValueError('Mismatched arguments of shapes ' + str(f.shape) + ' and ' + str(g.shape) + '!')

    if grid is None:
        return np.vdot(g, f)

    if f.shape[0] != grid.size:
        raise ValueError('Values do not live on the given grid!')
    dens = grid.lebesgue_weights() * _weight_density(weight, grid.nodes)

    return np.sum(dens * f * np.conj(g))


def project(basis, values, grid):
    """ Coefficients <f, b_a> of grid values f on an orthonormal basis.
    """

    values = np.asarray(values)
    if values.shape[0] != grid.size:
        raise ValueError('Values do not live on the given grid!')
    prof = basis.profile(grid.nodes)
    eff = basis.effective_weights(grid) / prof
    eff = eff.reshape((-1,) + (1,)*(values.ndim - 1))

    return basis.reduced_values(grid.nodes).T @ (eff * values)


def collision_invariants(points):
    """ Values of phi_0 = M, phi_j = v_j M, phi_{d+1} = (|v|^2 - d) M, shape (npts, d+2).
    """

    points = np.atleast_2d(points)
    d = points.shape[1]
    mw = maxwellian(points)
    cols = [mw] + [points[:, j]*mw for j in range(d)] + [(np.sum(points**2, axis=-1) - d)*mw]

    return np.stack(cols, axis=-1)


def analytic_kernel(basis, grid=None):
    """
    E-orthonormal coefficient vectors of phi_0, phi_1..phi_d and the
    normalized energy mode (|v|^2 - d) M / sqrt(2d), as columns of an (n, d+2) array.
    For polynomial-weight bases the functions are projected and orthonormalized
    in the basis pairing.
    """

    d = basis.dim
    if basis.coeffs is None and basis.is_gaussian:
        vecs = np.zeros((basis.n, d+2))
        vecs[basis.index_of((0,)*d), 0] = 1
        for j in range(d):
            vecs[basis.index_of(tuple(int(i == j) for i in range(d))), j+1] = 1
        for j in range(d):
            vecs[basis.index_of(tuple(2*int(i == j) for i in range(d))), d+1] = 1/np.sqrt(d)
        return vecs

    grid = grid or basis.grid
    coeffs = project(basis, collision_invariants(grid.nodes), grid)
    q, _ = np.linalg.qr(coeffs)
    # keep the orientation of the projected invariants
    signs = np.sign(np.real(np.sum(np.conj(q) * coeffs, axis=0)))
    signs[signs == 0] = 1

    return q * signs[None, :]


def is_signed_permutation(O):

    O = np.asarray(O)
    if O.ndim != 2 or O.shape[0] != O.shape[1]:
        return False
    if not np.all(np.isin(O, (-1, 0, 1))):
        return False
    return bool(np.all(np.sum(np.abs(O), axis=0) == 1) and np.all(np.sum(np.abs(O), axis=1) == 1))


def signed_permutation_operator(basis, O):
    """
    Matrix of f(v) -> f(O^{-1} v) on a Hermite-product basis, for a signed
    coordinate permutation O. With this convention Pi V(xi) Pi^{-1} = V(O xi).

    :Parameters:
        basis : OrthonormalBasis
            Gaussian-weight basis.
        O : 2D array
            d x d signed permutation matrix.
    """

    O = np.asarray(O)
    if not is_signed_permutation(O) or O.shape[0] != basis.dim:
        raise RepresentationError('Only signed coordinate permutations map the truncated basis to itself!')
    if basis.coeffs is not None:
        raise RepresentationError('Signed permutations are represented on Hermite-product bases only!')

    d = basis.dim
    # (O^T v)_k = s_k v_{pi(k)}
    perm = [int(np.nonzero(O[:, k])[0][0]) for k in range(d)]
    sgn = [int(O[perm[k], k]) for k in range(d)]

    Pi = np.zeros((basis.n, basis.n))
    for col, alpha in enumerate(basis.alphas):
        image = [0]*d
        sign = 1
        for k in range(d):
            image[perm[k]] = alpha[k]
            sign *= sgn[k]**alpha[k]
        Pi[basis.index_of(tuple(image)), col] = sign

    return Pi
