#! /usr/bin/env python
# -*- coding: utf-8 -*-

"""
@author: boltzspec developers

Fourier-mode operators L_xi = L - i v.xi, their spectra, resolvents and
contour spectral projectors.
"""

from __future__ import print_function, division
from . import utils as u, velocity_basis as vb
from .base import BoltzspecError
from .collision_operator import OperatorMatrix, N_CPU
import logging
import warnings as wn
import numpy as np
import pandas as pd
import dask as d
import scipy.linalg as sla
from scipy import sparse
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csgraph
from threadpoolctl import threadpool_limits


logger = logging.getLogger(__name__)


class SpectrumError(BoltzspecError):
    """ Dense eigensolver failure.
    """
    pass


class ResolventError(BoltzspecError, ValueError):
    """ Shift too close to the spectrum.
    """
    pass


class ContourError(BoltzspecError, ValueError):
    """ Contour passes too close to the spectrum.
    """
    pass


# =========================== #
#     Frequencies, contours    #
# =========================== #

class FrequencyPoint(object):
    """ Frequency xi with magnitude r = |xi| and direction xi/|xi| (None at r = 0).
    """

    def __init__(self, xi):

        self.xi = np.asarray(xi, dtype='float64').ravel()
        if not np.all(np.isfinite(self.xi)):
            raise ValueError('Frequency must be finite!')
        self.r = float(np.linalg.norm(self.xi))
        self.direction = self.xi / self.r if self.r > 0 else None

    @classmethod
    def from_polar(cls, r, direction):
        if r < 0:
            raise ValueError('Frequency magnitude must be nonnegative!')
        return cls(r * u.unit_vector(direction))

    @property
    def dim(self):
        return self.xi.size

    def __neg__(self):
        return FrequencyPoint(-self.xi)

    def to_dict(self):
        return {'xi': self.xi.tolist(), 'r': self.r}

    def __repr__(self):
        return 'FrequencyPoint(' + np.array2string(self.xi, separator=', ') + ')'


class ContourSpec(object):
    """ Circle |z - center| = radius discretized by the trapezoid rule.
    """

    def __init__(self, center=0., radius=1., nodes=64):

        if radius <= 0:
            raise ValueError('Contour radius must be positive!')
        if nodes < 16:
            raise ValueError('Contours need at least 16 nodes!')
        self.center = complex(center)
        self.radius = float(radius)
        self.nodes = int(nodes)

    def points(self, nodes=None, offset=0.):
        nodes = nodes or self.nodes
        theta = 2*np.pi*(np.arange(nodes) + offset)/nodes
        return self.center + self.radius*np.exp(1j*theta)

    def clearance(self, eigenvalues):
        """ Smallest distance between the circle and the eigenvalues.
        """

        return float(np.min(np.abs(np.abs(np.asarray(eigenvalues) - self.center) - self.radius)))

    def encloses(self, eigenvalues):
        return np.abs(np.asarray(eigenvalues) - self.center) < self.radius


class SpectralSlice(object):
    """
    Eigen-decomposition of one L_xi: eigenvalues sorted by descending real
    part, right eigenvectors as columns and biorthonormal left eigenvectors
    (left^H right = I).
    """

    def __init__(self, xi, eigenvalues, right, left, condition, basis=None):

        self.xi = xi
        self.basis = basis
        self.eigenvalues = eigenvalues
        self.right = right
        self.left = left
        self.condition = condition

    @property
    def n(self):
        return self.eigenvalues.size

    def select(self, a):
        """ Indices of the eigenvalues with Re lambda > -a.
        """

        return np.nonzero(np.real(self.eigenvalues) > -a)[0]

    def abscissa(self, exclude=()):
        """ Largest real part, optionally excluding some indices.
        """

        keep = np.setdiff1d(np.arange(self.n), np.asarray(exclude, dtype='int64'))
        return float(np.max(np.real(self.eigenvalues[keep])))

    def to_dict(self, a=None):
        dct = {'xi': self.xi.xi.tolist(), 'eigenvalues': u.complex_records(self.eigenvalues)}
        if a is not None:
            dct['branch_count'] = int(self.select(a).size)
        return dct


# =========================== #
#         Assembly            #
# =========================== #

def velocity_matrices(basis, quad):
    """
    Galerkin matrices V_k of multiplication by v_k, k = 1..d, so that
    V(xi~) = sum_k xi~_k V_k.
    """

    if basis.is_gaussian and (quad.exactness is None or quad.exactness < 2*basis.degree + 1):
        raise ValueError('Gaussian quadrature must be exact to degree 2N + 1!')

    mats = []
    for k in range(basis.dim):
        vals = basis.moment_matrix(quad, multiplier=quad.nodes[:, k])
        e = np.zeros(basis.dim)
        e[k] = 1.
        mats.append(OperatorMatrix(vals, basis, 'E' if basis.is_gaussian else 'E(k)', name='V' + str(k+1),
                    meta={'direction': e.tolist(), 'truncated_degree': basis.degree}))

    return mats


def combine_velocity(Vk, direction):
    """ V(xi~) from the axis matrices.
    """

    direction = u.unit_vector(direction)
    if len(Vk) != direction.size:
        raise ValueError('Direction has the wrong dimension!')
    vals = sum(c*V.values for c, V in zip(direction, Vk))

    return Vk[0].with_values(vals, name='V', meta={'direction': direction.tolist(),
                             'truncated_degree': Vk[0].meta.get('truncated_degree')})


def assemble_v_projection(basis, quad, direction):
    """
    Galerkin matrix of multiplication by v.xi~. The product raises the degree
    by one, so the top-degree block is truncated (recorded in meta).

    :Parameters:
        basis : OrthonormalBasis
            Trial basis.
        quad : QuadratureGrid
            Velocity quadrature of the basis.
        direction : 1D array
            Nonzero direction vector (normalized internally).
    """

    return combine_velocity(velocity_matrices(basis, quad), direction)


def velocity_along(V, direction):
    """ Values of V(xi~) from a direction-tagged matrix or the axis matrices, and a reference OperatorMatrix.
    """

    direction = u.unit_vector(direction)
    if isinstance(V, OperatorMatrix):
        dirv = np.asarray(V.meta.get('direction'))
        cosine = float(np.dot(dirv, direction))
        if abs(abs(cosine) - 1) > 1e-10:
            raise ValueError('Velocity matrix direction is not parallel to xi!')
        return np.sign(cosine) * V.values, V

    if len(V) != direction.size:
        raise ValueError('Direction dimension does not match the velocity matrices!')
    return sum(c*Vk.values for c, Vk in zip(direction, V)), V[0]


def assemble_L_xi(L, V, xi):
    """
    L_xi = L - i r V(xi~).

    :Parameters:
        L : OperatorMatrix
            Collision operator.
        V : OperatorMatrix/list
            Direction-tagged V(xi~) or the list of axis matrices.
        xi : FrequencyPoint/1D array
            Frequency.
    """

    xi = xi if isinstance(xi, FrequencyPoint) else FrequencyPoint(xi)
    if xi.dim != L.basis.dim:
        raise ValueError('Frequency dimension does not match the velocity dimension!')
    meta = u.dictmerge(L.meta, {'xi': xi.xi.tolist()})
    if xi.r == 0:
        return L.with_values(L.values.copy(), name='L_xi', meta=meta)

    vals, ref = velocity_along(V, xi.direction)
    L.check_space(ref)

    return L.with_values(L.values - 1j*xi.r*vals, name='L_xi', meta=meta)


def relative_bound(V, nu):
    """ Spectral norm of V nu^{-1}, the relative bound of v with respect to nu.
    """

    return float(np.linalg.norm(sla.solve(nu.values.T, V.values.T).T, 2))


# =========================== #
#     Spectra, resolvents      #
# =========================== #

def _clusters(values, tol):
    """ Groups of eigenvalues linked by chains of pairwise distances below tol.
    """

    close = np.abs(values[:, None] - values[None, :]) < tol
    count, labels = csgraph.connected_components(sparse.csr_matrix(close), directed=False)

    return [list(np.nonzero(labels == c)[0]) for c in range(count)]


def spectrum(L_xi, **kwds):
    """
    Full eigen-decomposition of an assembled L_xi.

    :Parameters:
        L_xi : OperatorMatrix
            Assembled operator.
        **kwds : keyword arguments
            cluster_tol : float | 1e-8
                Relative distance under which eigenvalues are treated as one
                cluster during biorthonormalization.

    :Return:
        slc : SpectralSlice
    """

    cluster_tol = kwds.pop('cluster_tol', 1e-8)
    A = L_xi.values
    try:
        w, vl, vr = sla.eig(A, left=True, right=True)
    except (sla.LinAlgError, ValueError) as err:
        raise SpectrumError('Eigensolver failed on a ' + str(A.shape) + ' matrix with norm ' +
                            '%.6e' % np.linalg.norm(A) + ' (' + str(err) + ')!')

    order = np.lexsort((np.imag(w), -np.real(w)))
    w, vl, vr = w[order], vl[:, order], vr[:, order]

    scale = max(np.max(np.abs(w)), 1.)
    for group in _clusters(w, cluster_tol*scale):
        G = np.conj(vl[:, group]).T @ vr[:, group]
        vl[:, group] = vl[:, group] @ np.conj(np.linalg.inv(G)).T

    condition = np.linalg.norm(vl, axis=0) * np.linalg.norm(vr, axis=0)
    if np.max(np.real(w)) > 1e-8:
        wn.warn('Eigenvalue with positive real part %.3e found!' % np.max(np.real(w)))

    xi = FrequencyPoint(L_xi.meta.get('xi', np.zeros(L_xi.basis.dim)))
    return SpectralSlice(xi, w, vr, vl, condition, basis=L_xi.basis)


def spectra(L, V, xis, ncores=N_CPU, scheduler='threads', **kwds):
    """
    Spectral slices for a list of frequencies, computed in parallel.
    """

    def _one(xi):
        return spectrum(assemble_L_xi(L, V, xi), **kwds)

    tasks = [d.delayed(_one)(xi) for xi in xis]
    with threadpool_limits(limits=1, user_api='blas'):
        slices = d.compute(*tasks, scheduler=scheduler, num_workers=ncores)

    return list(slices)


def eigen_projector(slc, indices):
    """ Spectral projector sum_i v_i w_i^H over the chosen eigenvalue indices.
    """

    idx = np.asarray(indices, dtype='int64')
    return slc.right[:, idx] @ np.conj(slc.left[:, idx]).T


def resolvent(L_xi, lam, eigenvalues=None):
    """
    Resolvent (lambda - L_xi)^{-1}.

    :Parameters:
        L_xi : OperatorMatrix/2D array
            Operator.
        lam : complex
            Shift away from the spectrum.
        eigenvalues : 1D array | None
            Spectrum of L_xi, computed when not given.
    """

    A = L_xi.values if isinstance(L_xi, OperatorMatrix) else np.asarray(L_xi)
    eigenvalues = sla.eigvals(A) if eigenvalues is None else np.asarray(eigenvalues)
    dist = np.abs(eigenvalues - lam)
    nearest = np.argmin(dist)
    if dist[nearest] <= 1e-10*np.linalg.norm(A, 2):
        raise ResolventError('Shift ' + str(lam) + ' hits the eigenvalue ' + str(eigenvalues[nearest]) + '!')

    eye = np.eye(A.shape[0])
    R = sla.solve(lam*eye - A, eye)
    residual = np.max(np.abs((lam*eye - A) @ R - eye))
    if residual > 1e-8:
        wn.warn('Resolvent residual %.2e exceeds 1e-8!' % residual)

    return R


def resolvent_neumann(L_xi0, L_xi, lam0, lam, terms=8):
    """
    Neumann expansion of R(lam, xi) around (lam0, xi0):
    R0 sum_n [((lam0 - lam) + L_xi - L_xi0) R0]^n with R0 = R(lam0, xi0).
    """

    A0 = L_xi0.values if isinstance(L_xi0, OperatorMatrix) else np.asarray(L_xi0)
    A = L_xi.values if isinstance(L_xi, OperatorMatrix) else np.asarray(L_xi)
    R0 = resolvent(A0, lam0)
    D = (lam0 - lam)*np.eye(A.shape[0]) + (A - A0)
    step = D @ R0
    term = np.eye(A.shape[0])
    total = term.copy()
    for _ in range(terms - 1):
        term = term @ step
        total = total + term

    return R0 @ total


def contour_projector(L_xi, contour, eigenvalues=None, **kwds):
    """
    Riesz projector (1/2 pi i) int_Gamma (z - L_xi)^{-1} dz by the trapezoid
    rule on a circle, doubling the nodes until P^2 = P within tolerance.

    :Parameters:
        L_xi : OperatorMatrix/2D array
            Operator.
        contour : ContourSpec
            Circle avoiding the spectrum.
        eigenvalues : 1D array | None
            Spectrum of L_xi, computed when not given.
        **kwds : keyword arguments
            tol : float | 1e-8
                Idempotency tolerance.
            max_nodes : int | 4096
                Largest node count tried.
    """

    tol = kwds.pop('tol', 1e-8)
    max_nodes = kwds.pop('max_nodes', 4096)
    A = L_xi.values if isinstance(L_xi, OperatorMatrix) else np.asarray(L_xi)
    eigenvalues = sla.eigvals(A) if eigenvalues is None else np.asarray(eigenvalues)
    if contour.clearance(eigenvalues) <= contour.radius/100:
        raise ContourError('Contour of radius ' + str(contour.radius) + ' about ' + str(contour.center) +
                           ' passes within radius/100 of the spectrum!')

    eye = np.eye(A.shape[0])

    def _sum(nodes, offset):
        zs = contour.points(nodes, offset)
        acc = np.zeros_like(A, dtype='complex128')
        for z in zs:
            acc += (z - contour.center) * sla.solve(z*eye - A, eye)
        return acc

    nodes = contour.nodes
    P = _sum(nodes, 0.) / nodes
    while True:
        residual = np.max(np.abs(P @ P - P))
        if residual < tol:
            break
        if 2*nodes > max_nodes:
            wn.warn('Contour projector idempotency residual %.2e at %d nodes!' % (residual, nodes))
            break
        # nested trapezoid: reuse the current nodes, add the midpoints
        P = (P*nodes + _sum(nodes, 0.5)) / (2*nodes)
        nodes *= 2
        logger.debug('Contour nodes doubled to %d (residual %.2e)', nodes, residual)

    return P


def projector_rank(P):
    """ Rank of a projector from its trace.
    """

    return int(np.rint(np.real(np.trace(P))))


def match_eigenvalues(a, b):
    """ Optimal bipartite matching of two eigenvalue lists.

    :Return:
        rows, cols, dist : index arrays into a and b, matched distances
    """

    a, b = np.asarray(a), np.asarray(b)
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)

    return rows, cols, cost[rows, cols]


def eigenvalue_confinement_scan(L, V, r_grid, a, direction=None, ret='constant', **kwds):
    """
    Confinement constant M = max_r max_j |lambda_j(r)|/r over the eigenvalues
    with Re lambda > -a.

    :Parameters:
        L : OperatorMatrix
            Collision operator.
        V : list of OperatorMatrix
            Axis velocity matrices.
        r_grid : 1D array
            Frequency magnitudes in (0, r_0].
        a : float
            Threshold of the hydrodynamic region.
        direction : 1D array | None
            Direction, e_1 when None.
        ret : str | 'constant'
            'constant' for M only, 'all' for (M, pandas DataFrame of the scan).
    """

    r_grid = np.asarray(r_grid, dtype='float64')
    if np.any(r_grid <= 0):
        raise ValueError('Confinement scans need r > 0!')
    direction = np.eye(L.basis.dim)[0] if direction is None else u.unit_vector(direction)

    slices = spectra(L, V, [FrequencyPoint.from_polar(r, direction) for r in r_grid], **kwds)
    rows = []
    for r, slc in zip(r_grid, slices):
        lam = slc.eigenvalues[slc.select(a)]
        rows.append({'r': r, 'count': lam.size, 'max_abs': float(np.max(np.abs(lam))) if lam.size else 0.,
                     'ratio': float(np.max(np.abs(lam)))/r if lam.size else 0.})
    table = pd.DataFrame(rows)
    mconf = float(table['ratio'].max())
    logger.info('Eigenvalue confinement constant %.6f over %d frequencies', mconf, len(r_grid))

    if ret == 'all':
        return mconf, table
    return mconf
