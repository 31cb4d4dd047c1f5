#! /usr/bin/env python
# -*- coding: utf-8 -*-

"""
@author: boltzspec developers

Small-frequency perturbation theory of L_xi around the kernel of L:
projector expansions, the Kato transform, the reduced operator, branch
tracing, and the first and second order branch coefficients.
"""

from __future__ import print_function, division
from . import utils as u, velocity_basis as vb, collision_operator as co, fourier_operator as fo
from .base import BoltzspecError
from itertools import combinations
import logging
import warnings as wn
import numpy as np
import pandas as pd
import xarray as xr
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment
from lmfit.models import PolynomialModel


logger = logging.getLogger(__name__)

# Branch labels: acoustic (-1, 1), entropy (0), shear (2)
LABELS = (-1, 0, 1, 2)
SHEAR = 2


class KatoError(BoltzspecError, ValueError):
    """ Projectors too far apart (or not idempotent) for the Kato transform.
    """
    pass


class BranchCountError(BoltzspecError):
    """ Wrong number of eigenvalues in the hydrodynamic region.
    """
    pass


class BranchCollisionError(BoltzspecError):
    """ Eigenvalues of distinct branches too close to separate.
    """
    pass


def sound_speed(d):
    """ |lambda^(1)| of the acoustic branches, sqrt(1 + 2/d).
    """

    return np.sqrt(1 + 2/d)


# =========================== #
#     Zeroth and first order   #
# =========================== #

def a0_matrix(d):
    """
    Matrix of -i P(0) v_1 P(0) on the normalized {phi_0, phi_1, phi_{d+1}}.
    """

    if d not in (2, 3):
        raise ValueError('A(0) is only provided for d = 2 or 3!')
    s = np.sqrt(2/d)

    return -1j*np.array([[0, 1, 0], [1, 0, s], [0, s, 0]], dtype='complex128')


def householder_frame(direction):
    """
    Orthogonal matrix with first column xi~, the Householder reflection
    taking e_1 to xi~ (identity at xi~ = e_1). Columns 2..d are C_1..C_{d-1}.
    """

    xt = u.unit_vector(direction)
    w = np.eye(xt.size)[0] - xt
    nw = np.dot(w, w)
    if nw < 1e-28:
        return np.eye(xt.size)

    return np.eye(xt.size) - 2*np.outer(w, w)/nw


def kernel_frame(basis, direction):
    """
    Orthonormal coefficient frame of ker L ordered as
    {C_1.vM, ..., C_{d-1}.vM, phi_0, xi~.vM, normalized phi_{d+1}}.
    """

    d = basis.dim
    K0 = vb.analytic_kernel(basis)
    H = householder_frame(direction)
    mom = K0[:, 1:d+1]

    return np.hstack([mom @ H[:, 1:], K0[:, :1], mom @ H[:, :1], K0[:, d+1:]])


def _block_modes(d, normalized=True):
    """ Eigenvectors of A(0) in {phi_0, xi~.vM, phi_{d+1}} coordinates.
    """

    c, s = sound_speed(d), np.sqrt(2/d)
    modes = {-1: np.array([1, c, s]), 0: np.array([1, 0, -1/s]), 1: np.array([1, -c, s])}
    if normalized:
        modes = {j: m/np.linalg.norm(m) for j, m in modes.items()}

    return modes


def first_order_modes(basis, direction):
    """
    First-order branch slopes and the zeroth-order mode functions.

    :Parameters:
        basis : OrthonormalBasis
            Trial basis.
        direction : 1D array
            Direction xi~.

    :Return:
        dct : dict
            'lambda1' maps the labels -1, 0, 1, 2 to lambda^(1); 'modes' maps
            -1, 0, 1 and (2, l) to unnormalized coefficient vectors of
            (1 -+ c xi~.v + (|v|^2-d)/d)M, (1 - (|v|^2-d)/2)M and C_l.vM.
    """

    d = basis.dim
    c = sound_speed(d)
    K = kernel_frame(basis, direction)
    modes = {j: K[:, d-1:] @ m for j, m in _block_modes(d, normalized=False).items()}
    for l in range(d-1):
        modes[(SHEAR, l+1)] = K[:, l].copy()

    return {'lambda1': {-1: -1j*c, 0: 0j, 1: 1j*c, 2: 0j}, 'modes': modes}


# =========================== #
#     Reduced resolvent        #
# =========================== #

def reduced_resolvent_matrix(L, kernel=None):
    """
    Matrix of the reduced resolvent S at 0: S = 0 on ker L and S = L^{-1}
    on its orthogonal complement, from the deflated system (L + Pi) S = 1 - Pi.
    """

    if not L.basis.is_gaussian:
        raise ValueError('The reduced resolvent is built on the Gaussian-weight space!')
    K0 = vb.analytic_kernel(L.basis) if kernel is None else kernel
    Pi = K0 @ np.conj(K0).T
    eye = np.eye(L.n)
    try:
        S = sla.solve(L.values + Pi, eye - Pi)
    except sla.LinAlgError as err:
        raise ValueError('Deflated system L + Pi is singular (' + str(err) + ')!')

    residual = np.max(np.abs(L.values @ S - (eye - Pi)))
    if residual > 1e-8:
        wn.warn('Reduced resolvent residual %.2e exceeds 1e-8!' % residual)

    return S


def reduced_resolvent_apply(L, f, S=None):
    """ S f, the solution of L x = f - Pi f with Pi x = 0.
    """

    f = np.asarray(f)
    if S is not None:
        return S @ f

    K0 = vb.analytic_kernel(L.basis)
    Pi = K0 @ np.conj(K0).T
    try:
        return sla.solve(L.values + Pi, f - Pi @ f)
    except sla.LinAlgError as err:
        raise ValueError('Deflated system L + Pi is singular (' + str(err) + ')!')


def second_order_coeffs(L, V, direction, S=None):
    """
    Second-order branch coefficients <S v.xi~ psi_j, v.xi~ psi_j>_E for the
    normalized zeroth-order modes psi_j; the shear value is averaged over the
    d-1 frame vectors.

    :Return:
        coeffs : dict
            Real lambda_j^(2) for j = -1, 0, 1, 2.
    """

    d = L.basis.dim
    S = reduced_resolvent_matrix(L) if S is None else S
    Vx, _ = fo.velocity_along(V, direction)
    K = kernel_frame(L.basis, direction)

    coeffs = {}
    for j, m in _block_modes(d).items():
        w = Vx @ (K[:, d-1:] @ m)
        coeffs[j] = float(np.real(np.vdot(w, S @ w)))
    shear = []
    for l in range(d-1):
        w = Vx @ K[:, l]
        shear.append(float(np.real(np.vdot(w, S @ w))))
    coeffs[SHEAR] = float(np.mean(shear))

    logger.info('Second-order coefficients %s', coeffs)
    return coeffs


def transport_summary(coeffs, d):
    """
    Read the second-order coefficients as transport data: sound damping,
    thermal diffusivity and kinematic viscosity. The linearized Navier-Stokes
    relation damping = ((d-1) viscosity + diffusivity)/d is reported as a residual.
    """

    damping = -coeffs[1]
    kappa = -coeffs[0]
    mu = -coeffs[SHEAR]
    predicted = ((d-1)*mu + kappa)/d

    return {'dim': d, 'sound_speed': sound_speed(d), 'sound_damping': damping,
            'thermal_diffusivity': kappa, 'kinematic_viscosity': mu, 'prandtl': mu/kappa,
            'navier_stokes_damping': predicted, 'damping_relation_residual': abs(damping - predicted)}


# =========================== #
#    Projectors, Kato, L~      #
# =========================== #

def total_projector_expansion(L, V, direction, r_grid, radius=None, **kwds):
    """
    First-order expansion P(xi) = P(0) + |xi| P^(1)(xi~) + o(|xi|) of the
    total hydrodynamic projector.

    :Parameters:
        L : OperatorMatrix
            Collision operator (Gaussian space).
        V : OperatorMatrix/list
            Velocity matrices.
        direction : 1D array
            Direction xi~.
        r_grid : 1D array
            Frequencies in (0, r_0].
        radius : float | None
            Contour radius about 0, half the spectral gap when None.
        **kwds : keyword arguments
            nodes : int | 64
                Initial contour nodes.
            pbar, pbenv : progress bar options.

    :Return:
        dct : dict
            P0, P1, S, r, residual (max-norm remainder per r) and the fitted
            log-log order of the remainder.
    """

    nodes = kwds.pop('nodes', 64)
    pbar = kwds.pop('pbar', False)
    pbenv = kwds.pop('pbenv', 'classic')

    r_grid = np.asarray(r_grid, dtype='float64')
    if np.any(r_grid <= 0):
        raise ValueError('Projector expansions need r > 0!')
    radius = co.spectral_gap(L)/2 if radius is None else radius
    contour = fo.ContourSpec(0., radius, nodes)

    P0 = fo.contour_projector(L, contour)
    S = reduced_resolvent_matrix(L)
    Vx, _ = fo.velocity_along(V, direction)
    P1 = 1j*(P0 @ Vx @ S + S @ Vx @ P0)

    residual = []
    for r in u.progress(r_grid, pbar, pbenv, desc='projectors'):
        L_xi = fo.assemble_L_xi(L, V, fo.FrequencyPoint.from_polar(r, direction))
        P = fo.contour_projector(L_xi, contour)
        residual.append(float(np.max(np.abs(P - P0 - r*P1))))
    residual = np.array(residual)
    order = u.loglog_slope(r_grid, residual) if r_grid.size > 1 else np.nan
    logger.info('Total projector remainder order %.3f', order)

    return {'P0': P0, 'P1': P1, 'S': S, 'r': r_grid, 'residual': residual, 'order': order}


def kato_transform(P, Q, **kwds):
    """
    Kato's pairing U = U'(1 - R)^{-1/2} with U' = QP + (1-Q)(1-P) and
    R = (P-Q)^2, which satisfies U P U^{-1} = Q.

    :Parameters:
        P, Q : 2D arrays
            Projectors with |P - Q| < 1.
        **kwds : keyword arguments
            tol : float | 1e-14
                Truncation threshold of the binomial series.
            max_terms : int | 100000
                Series length limit.
    """

    tol = kwds.pop('tol', 1e-14)
    max_terms = kwds.pop('max_terms', 100000)

    P = np.asarray(P, dtype='complex128')
    Q = np.asarray(Q, dtype='complex128')
    for name, X in (('P', P), ('Q', Q)):
        res = np.max(np.abs(X @ X - X))
        if res > 1e-7:
            raise KatoError(name + ' is not idempotent (residual %.2e)!' % res)
    dist = np.linalg.norm(P - Q, 2)
    if dist >= 1:
        raise KatoError('Kato transform needs |P - Q| < 1, got %.6f!' % dist)

    eye = np.eye(P.shape[0])
    R = (P - Q) @ (P - Q)
    term, series = eye.astype('complex128'), eye.astype('complex128')
    for n in range(max_terms):
        # binomial coefficients of (1 - R)^{-1/2}
        term = (term @ R) * ((2*n + 1)/(2*n + 2))
        series = series + term
        if np.linalg.norm(term) < tol:
            break
    Uprime = Q @ P + (eye - Q) @ (eye - P)

    return Uprime @ series


def kato_range_angle(U, kernel, Q):
    """ Largest principal angle between U(ker L) and the range of Q.
    """

    return float(np.max(co.principal_angles(U @ kernel, sla.orth(Q))))


def reduced_operator(L_xi, P_xi, U, r, frame=None):
    """
    Reduced operator (1/r) U^{-1} L_xi U restricted to ker L, in the
    coordinates of the kernel frame {C_l.vM, phi_0, xi~.vM, phi_{d+1}}.

    :Parameters:
        L_xi : OperatorMatrix
            Operator at xi = r xi~.
        P_xi : 2D array | None
            Total projector at xi (checked against U when given).
        U : 2D array
            Kato transform from P(0) to P(xi).
        r : float
            |xi| > 0.
        frame : 2D array | None
            Kernel frame; built from the direction of L_xi when None.
    """

    if r <= 0:
        raise ValueError('The reduced operator needs r > 0!')
    if frame is None:
        frame = kernel_frame(L_xi.basis, fo.FrequencyPoint(L_xi.meta['xi']).direction)

    UK = U @ frame
    try:
        X = sla.solve(U, L_xi.values @ UK)
    except sla.LinAlgError as err:
        raise KatoError('Kato transform is singular (' + str(err) + ')!')

    if P_xi is not None:
        leak = np.max(np.abs(P_xi @ UK - UK))
        if leak > 1e-7:
            wn.warn('U(ker L) leaves the range of P(xi) by %.2e!' % leak)

    return np.conj(frame).T @ X / r


def block_residual(Lt, d):
    """ Largest entry coupling the shear block to {phi_0, xi~.vM, phi_{d+1}}.
    """

    return float(max(np.max(np.abs(Lt[:d-1, d-1:])), np.max(np.abs(Lt[d-1:, :d-1]))))


# =========================== #
#       Branch tracing         #
# =========================== #

def assign_branches(slc, a, frame):
    """
    Assign the eigenvalues with Re lambda > -a to the branches by eigenvector
    content: overlap with the A(0) modes in the {phi_0, xi~.vM, phi_{d+1}}
    block, and weight on the shear vectors C_l.vM.

    :Return:
        assignment : dict
            Label -> list of eigenvalue indices of the slice.
    """

    d = frame.shape[1] - 2
    idx = slc.select(a)
    if idx.size != d + 2:
        raise BranchCountError('Found ' + str(idx.size) + ' eigenvalues with Re > -a at |xi| = ' +
                               '%.6g' % slc.xi.r + ', expected ' + str(d+2) + '!')

    coords = np.conj(frame).T @ slc.right[:, idx]
    coords = coords / np.linalg.norm(coords, axis=0)
    shear = np.linalg.norm(coords[:d-1], axis=0)**2
    block = coords[d-1:]
    modes = _block_modes(d)

    slots = [-1, 0, 1] + [SHEAR]*(d-1)
    score = np.zeros((idx.size, len(slots)))
    for col, lab in enumerate(slots):
        score[:, col] = shear if lab == SHEAR else np.abs(modes[lab] @ block)**2
    rows, cols = linear_sum_assignment(-score)

    assignment = {lab: [] for lab in LABELS}
    for i, c in zip(rows, cols):
        assignment[slots[c]].append(int(idx[i]))

    return assignment


def _branch_values(slc, assignment):

    vals = np.array([np.mean(slc.eigenvalues[assignment[j]]) for j in LABELS])
    shear = slc.eigenvalues[assignment[SHEAR]]
    spread = float(np.max(np.abs(shear[:, None] - shear[None, :]))) if shear.size > 1 else 0.

    return vals, spread


def _nearest_consistent(history, r, vals):
    """ True if quadratic extrapolation of the last three points pairs with the content labels.
    """

    pts = history[-3:]
    pred = 0.
    for k, (rk, vk) in enumerate(pts):
        weight = np.prod([(r - rm)/(rk - rm) for m, (rm, _) in enumerate(pts) if m != k])
        pred = pred + weight*vk
    rows, cols = linear_sum_assignment(np.abs(vals[:, None] - pred[None, :]))

    return bool(np.all(rows == cols))


class BranchTable(object):
    """
    Hydrodynamic branch eigenvalues lambda_j(r) along one direction, stored
    as an xarray DataArray with dimensions (r, branch).
    """

    def __init__(self, direction, r, values, dim, crossing=None, refined=None, spread=None):

        r = np.asarray(r, dtype='float64')
        self.data = xr.DataArray(np.asarray(values, dtype='complex128'), dims=('r', 'branch'),
                                 coords={'r': r, 'branch': list(LABELS)},
                                 attrs={'direction': list(np.asarray(direction, dtype='float64'))})
        self.dim = dim
        self.multiplicity = {-1: 1, 0: 1, 1: 1, SHEAR: dim - 1}
        self.crossing = np.zeros(r.size, dtype='bool') if crossing is None else np.asarray(crossing)
        self.refined = [] if refined is None else list(refined)
        self.spread = np.zeros(r.size) if spread is None else np.asarray(spread)
        self.coefficients = None

    @property
    def r(self):
        return self.data.coords['r'].values

    @property
    def direction(self):
        return np.asarray(self.data.attrs['direction'])

    def branch(self, j):
        return self.data.sel(branch=j).values

    def conjugation_residual(self):
        """ max |lambda_1 - conj(lambda_{-1})|.
        """

        return float(np.max(np.abs(self.branch(1) - np.conj(self.branch(-1)))))

    def reality_residual(self):
        """ max |Im lambda_j| over the entropy and shear branches.
        """

        return float(max(np.max(np.abs(np.imag(self.branch(0)))), np.max(np.abs(np.imag(self.branch(SHEAR))))))

    def fit(self, degree=4, rmax=None):
        """ Fit the Taylor coefficients lambda^(1), lambda^(2); results also kept in self.coefficients.
        """

        self.coefficients = fit_branch_coefficients(self, degree=degree, rmax=rmax)
        return self.coefficients

    def to_frame(self):
        """ Long-format table with columns (r, branch, re, im, multiplicity, crossing).
        """

        rows = []
        for i, r in enumerate(self.r):
            for j in LABELS:
                lam = self.data.values[i, LABELS.index(j)]
                rows.append({'r': r, 'branch': j, 're': float(np.real(lam)), 'im': float(np.imag(lam)),
                             'multiplicity': self.multiplicity[j], 'crossing': bool(self.crossing[i])})

        return pd.DataFrame(rows, columns=['r', 'branch', 're', 'im', 'multiplicity', 'crossing'])


def trace_branches(L, V, direction, r_grid, a, **kwds):
    """
    Trace the four hydrodynamic branches over an increasing r grid.

    :Parameters:
        L : OperatorMatrix
            Collision operator.
        V : OperatorMatrix/list
            Velocity matrices.
        direction : 1D array
            Direction xi~.
        r_grid : 1D array
            Increasing frequencies in (0, r_0].
        a : float
            Threshold of the hydrodynamic region Re lambda > -a.
        **kwds : keyword arguments
            =============  ==========  ====================================================
            keyword        data type   meaning
            =============  ==========  ====================================================
            max_refine     int         midpoints inserted when continuation disagrees (8)
            cluster_tol    float       allowed spread of the shear cluster (1e-7)
            crossing_tol   float       |lambda_0 - lambda_2| flagged as crossing (1e-7)
            pbar           bool        progress bar toggle (False)
            pbenv          str         progress bar environment ('classic')
            =============  ==========  ====================================================

    :Return:
        table : BranchTable
    """

    max_refine = kwds.pop('max_refine', 8)
    cluster_tol = kwds.pop('cluster_tol', 1e-7)
    crossing_tol = kwds.pop('crossing_tol', 1e-7)
    pbar = kwds.pop('pbar', False)
    pbenv = kwds.pop('pbenv', 'classic')

    r_grid = np.asarray(r_grid, dtype='float64')
    if r_grid.size == 0 or r_grid[0] <= 0 or np.any(np.diff(r_grid) <= 0):
        raise ValueError('Branch tracing needs an increasing grid of r > 0!')
    direction = u.unit_vector(direction)
    frame = kernel_frame(L.basis, direction)

    def _solve(r):
        slc = fo.spectrum(fo.assemble_L_xi(L, V, fo.FrequencyPoint.from_polar(r, direction)))
        return _branch_values(slc, assign_branches(slc, a, frame))

    history, spreads, refined = [], [], []
    queue = list(r_grid)
    bar = u.tqdmenv(pbenv)(total=r_grid.size, disable=not pbar, desc='branches')
    while queue:
        r = queue.pop(0)
        vals, spread = _solve(r)
        if len(history) >= 3 and not _nearest_consistent(history, r, vals):
            if len(refined) < max_refine:
                rmid = (history[-1][0] + r)/2
                queue[:0] = [rmid, r]
                refined.append(rmid)
                logger.debug('Branch continuation refined at r = %.6g', rmid)
                continue
            wn.warn('Nearest-neighbour continuation disagrees with the eigenvector labels at r = %.6g!' % r)
        history.append((r, vals))
        spreads.append(spread)
        if r not in refined:
            bar.update(1)
    bar.close()

    rs = np.array([h[0] for h in history])
    values = np.array([h[1] for h in history])
    spreads = np.array(spreads)
    crossing = np.abs(values[:, LABELS.index(0)] - values[:, LABELS.index(SHEAR)]) < crossing_tol
    if np.any(crossing):
        wn.warn('Entropy and shear branches cross at r = ' + str(rs[crossing].tolist()) + '!')
    if np.any(spreads > cluster_tol):
        wn.warn('Shear cluster spread %.2e exceeds %.0e!' % (spreads.max(), cluster_tol))

    return BranchTable(direction, rs, values, L.basis.dim, crossing=crossing, refined=refined, spread=spreads)


def _polyfit(x, y, degree):
    """ Polynomial fit through the origin on x scaled to [0, 1].
    """

    scale = np.max(np.abs(x))
    model = PolynomialModel(degree=degree)
    params = model.make_params(**{'c' + str(i): 0. for i in range(degree + 1)})
    params['c0'].set(value=0., vary=False)
    out = model.fit(y, params, x=x/scale)
    coefs = [out.best_values['c' + str(i)]/scale**i for i in range(degree + 1)]

    return coefs, float(np.sqrt(np.mean(out.residual**2)))


def fit_branch_coefficients(table, degree=4, rmax=None):
    """
    Fit lambda_j(r) = lambda^(1) r + lambda^(2) r^2 + ... separately on the
    real and imaginary parts of each branch.

    :Return:
        fits : dict
            Label -> {'lambda1', 'lambda2' (complex), 'residual'}.
    """

    r = table.r
    keep = r <= (rmax if rmax is not None else r.max())
    if keep.sum() < degree + 1:
        raise ValueError('Need at least ' + str(degree + 1) + ' grid points for the fit!')

    fits = {}
    for j in LABELS:
        lam = table.branch(j)[keep]
        cre, res_re = _polyfit(r[keep], np.real(lam), degree)
        cim, res_im = _polyfit(r[keep], np.imag(lam), degree)
        fits[j] = {'lambda1': complex(cre[1], cim[1]), 'lambda2': complex(cre[2], cim[2]),
                   'residual': max(res_re, res_im)}

    return fits


# =========================== #
#   Branch projectors, triples #
# =========================== #

class ProjectorSet(object):
    """
    Branch projectors P_{-1}, P_0, P_1, P_2 at one frequency, their total and
    (optionally) the fitted expansion terms.
    """

    def __init__(self, xi, branches, eigenvalues, total=None, expansion=None):

        self.xi = xi
        self.branches = branches
        self.eigenvalues = eigenvalues
        self.total = sum(branches[j] for j in LABELS) if total is None else total
        self.expansion = expansion or {}

    def ranks(self):
        return {j: fo.projector_rank(self.branches[j]) for j in LABELS}

    def algebra_residual(self):
        """ max |P_j P_k - delta_jk P_j| over all pairs.
        """

        res = 0.
        for j in LABELS:
            for k in LABELS:
                prod = self.branches[j] @ self.branches[k]
                target = self.branches[j] if j == k else 0.
                res = max(res, float(np.max(np.abs(prod - target))))
        return res

    def sum_residual(self, reference=None):
        """ max |sum_j P_j - P| against the stored total or a reference projector.
        """

        ref = self.total if reference is None else reference
        return float(np.max(np.abs(sum(self.branches[j] for j in LABELS) - ref)))

    def intertwining_residual(self, L_xi):
        """ max_j |L_xi P_j - lambda_j P_j|.
        """

        A = L_xi.values if isinstance(L_xi, co.OperatorMatrix) else L_xi
        return float(max(np.max(np.abs(A @ self.branches[j] - self.eigenvalues[j]*self.branches[j])) for j in LABELS))


def branch_projectors(slc, assignment, **kwds):
    """
    Spectral projectors of the branches, P_j = V_j (W_j^H V_j)^{-1} W_j^H from
    the right (V) and left (W) eigenvectors of each group.

    :Parameters:
        slc : SpectralSlice
            Spectrum at xi.
        assignment : dict
            Branch label -> eigenvalue indices (see assign_branches).
        **kwds : keyword arguments
            sep_tol : float | 1e-6
                Smallest admissible distance between eigenvalues of different branches.
            total : 2D array | None
                Contour projector used as the total.
    """

    sep_tol = kwds.pop('sep_tol', 1e-6)
    total = kwds.pop('total', None)

    lam = slc.eigenvalues
    for j, k in combinations(LABELS, 2):
        gap = np.min(np.abs(lam[assignment[j]][:, None] - lam[assignment[k]][None, :]))
        if gap <= sep_tol:
            raise BranchCollisionError('Branches ' + str(j) + ' and ' + str(k) + ' are %.2e apart at |xi| = %.6g!'
                                       % (gap, slc.xi.r))

    branches, eigenvalues = {}, {}
    for j in LABELS:
        Vj = slc.right[:, assignment[j]]
        Wh = np.conj(slc.left[:, assignment[j]]).T
        branches[j] = Vj @ sla.solve(Wh @ Vj, Wh)
        eigenvalues[j] = complex(np.mean(lam[assignment[j]]))

    return ProjectorSet(slc.xi, branches, eigenvalues, total=total)


class EigenTriple(object):
    """ Branch label, right function e and left functional f (coefficient vectors).
    """

    def __init__(self, label, right, left, expansion=None):

        self.label = label
        self.right = right
        self.left = left
        self.expansion = expansion or {}

    def __repr__(self):
        return 'EigenTriple(' + repr(self.label) + ')'


def eigentriples(slc, pset, gram=None):
    """
    Right functions e_alpha = P_j e_alpha^(0) (the shear family Gram-Schmidt
    orthogonalized) and left functionals f_alpha with P_j g = sum <g, f_alpha>_G e_alpha.

    :Parameters:
        slc : SpectralSlice
            Spectrum the projectors came from (carries basis and xi).
        pset : ProjectorSet
            Branch projectors.
        gram : 2D array | None
            Gram matrix G of the pairing on the coefficients; identity (E) when None.
    """

    basis = slc.basis
    n = slc.n
    G = np.eye(n) if gram is None else np.asarray(gram)
    modes = first_order_modes(basis, slc.xi.direction)['modes']

    def _dot(x, y):
        return np.vdot(y, G @ x)

    def _left(P, e):
        return sla.solve(G, np.conj(P).T @ (G @ e))

    triples = []
    for j in (-1, 0, 1):
        e = pset.branches[j] @ modes[j]
        e = e / np.sqrt(np.real(_dot(e, e)))
        triples.append(EigenTriple(j, e, _left(pset.branches[j], e)))

    done = []
    for l in range(basis.dim - 1):
        e = pset.branches[SHEAR] @ modes[(SHEAR, l+1)]
        for prev in done:
            e = e - _dot(e, prev)*prev
        nrm = np.sqrt(np.real(_dot(e, e)))
        if nrm < 1e-10:
            raise ValueError('Degenerate Gram matrix in the shear family!')
        e = e / nrm
        done.append(e)
        triples.append(EigenTriple((SHEAR, l+1), e, _left(pset.branches[SHEAR], e)))

    return triples


def biorthogonality_matrix(triples, gram=None):
    """ Matrix <e_alpha, f_beta>_G, the identity for a consistent family.
    """

    G = np.eye(triples[0].right.size) if gram is None else np.asarray(gram)
    E = np.stack([t.right for t in triples], axis=1)
    F = np.stack([t.left for t in triples], axis=1)

    return np.conj(F).T @ G @ E


def _linear_fit(r, stack):
    """ Least-squares X0 + r X1 + r^2 X2 fit of a stack of arrays over r.
    """

    r = np.asarray(r, dtype='float64')
    design = np.stack([np.ones_like(r), r, r**2], axis=1)
    flat = np.reshape(stack, (r.size, -1))
    sol = np.linalg.lstsq(design, flat, rcond=None)[0]
    shape = np.shape(stack)[1:]

    return sol[0].reshape(shape), sol[1].reshape(shape)


def fit_projector_expansion(sets, r_grid, kernel=None):
    """
    Fitted P_j^(0) and P_j^(1) per branch (and for the total) from projector
    sets along one direction.

    :Return:
        dct : dict
            'P0', 'P1' (label -> matrix, plus 'total'), 'kernel_residual'
            |sum_j P_j^(0) - Pi| and the per-r remainder after the linear terms.
    """

    r_grid = np.asarray(r_grid, dtype='float64')
    if len(sets) != r_grid.size or r_grid.size < 3:
        raise ValueError('Need one projector set per r and at least three frequencies!')

    P0, P1, remainder = {}, {}, {}
    for j in list(LABELS) + ['total']:
        stack = np.array([s.total if j == 'total' else s.branches[j] for s in sets])
        P0[j], P1[j] = _linear_fit(r_grid, stack)
        remainder[j] = np.array([np.max(np.abs(P - P0[j] - r*P1[j])) for r, P in zip(r_grid, stack)])

    dct = {'P0': P0, 'P1': P1, 'remainder': remainder}
    if kernel is not None:
        Pi = kernel @ np.conj(kernel).T
        dct['kernel_residual'] = float(np.max(np.abs(sum(P0[j] for j in LABELS) - Pi)))

    return dct


def eigentriple_expansion(families, r_grid):
    """
    Fitted e^(0), e^(1), f^(0), f^(1) per label from eigentriple families
    along one direction, with the log-log order of |e(r) - e^(0)|.

    :Parameters:
        families : list of lists of EigenTriple
            One family per r, labels in the same order.
        r_grid : 1D array
            Frequencies.
    """

    r_grid = np.asarray(r_grid, dtype='float64')
    if len(families) != r_grid.size or r_grid.size < 3:
        raise ValueError('Need one eigentriple family per r and at least three frequencies!')

    out = []
    for pos, first in enumerate(families[0]):
        E = np.array([fam[pos].right for fam in families])
        F = np.array([fam[pos].left for fam in families])
        e0, e1 = _linear_fit(r_grid, E)
        f0, f1 = _linear_fit(r_grid, F)
        dev = np.linalg.norm(E - e0[None, :], axis=1)
        expansion = {'e0': e0, 'e1': e1, 'f0': f0, 'f1': f1, 'order': u.loglog_slope(r_grid, dev)}
        out.append(EigenTriple(first.label, e0, f0, expansion=expansion))

    return out
