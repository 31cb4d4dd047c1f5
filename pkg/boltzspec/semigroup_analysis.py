#! /usr/bin/env python
# -*- coding: utf-8 -*-

"""
@author: boltzspec developers

Semigroups exp(t L_xi): hydrodynamic splitting, remainder decay fits,
resolvent scans on vertical lines and the uniform gap scan.
"""

from __future__ import print_function, division
from . import utils as u, collision_operator as co, fourier_operator as fo
from .base import BoltzspecError
import logging
import warnings as wn
import numpy as np
import pandas as pd
import scipy.linalg as sla
from lmfit.models import LinearModel


logger = logging.getLogger(__name__)

# Largest t|A|_1 handed to a single expm call
EXP_GUARD = 1e4
DECAY_WINDOW = (2., 10.)
NORM_FLOOR = 1e-12


class DecayError(BoltzspecError):
    """ Remainder norm does not decay.
    """
    pass


class ExponentialOverflowError(BoltzspecError, ValueError):
    """ t|A| beyond the guard of a single exponential.
    """
    pass


def _values(A):
    return A.values if isinstance(A, co.OperatorMatrix) else np.asarray(A)


def collision_time(dim):
    """ 1/nu(0), the physical length of one collision-frequency time unit.
    """

    return 1/co.nu_radial(0., dim)


# =========================== #
#        Exponentials          #
# =========================== #

def matrix_exponential(A, t, guard=EXP_GUARD):
    """
    exp(tA) by scaling and squaring with a Pade approximant.

    :Parameters:
        A : 2D array/OperatorMatrix
            Square matrix with finite entries.
        t : float
            Time t >= 0.
        guard : float | 1e4
            Largest admissible t|A|_1; beyond it the caller must split the interval.
    """

    A = _values(A)
    if t < 0:
        raise ValueError('Semigroups are evaluated for t >= 0!')
    if not np.all(np.isfinite(A)):
        raise ValueError('Matrix has non-finite entries!')
    load = t*np.linalg.norm(A, 1)
    if load > guard:
        raise ExponentialOverflowError('t|A| = %.3e exceeds the guard %.1e, split the interval!' % (load, guard))

    return sla.expm(t*A)


def expm_eig(A, t):
    """ exp(tA) from the eigendecomposition, for diagonalizable A.
    """

    w, vr = sla.eig(_values(A))
    return vr @ np.diag(np.exp(t*w)) @ np.linalg.inv(vr)


def semigroup(A, t_grid, guard=EXP_GUARD):
    """
    exp(tA) on a time grid, splitting t into equal steps where t|A| exceeds the guard.

    :Return:
        stack : 3D array
            Exponentials of shape (nt, n, n).
    """

    A = _values(A)
    norm1 = np.linalg.norm(A, 1)
    out = []
    for t in np.asarray(t_grid, dtype='float64'):
        steps = max(1, int(np.ceil(t*norm1/guard)))
        step = matrix_exponential(A, t/steps, guard)
        out.append(np.linalg.matrix_power(step, steps) if steps > 1 else step)

    return np.array(out)


def semigroup_property_residual(A, t, s):
    """ max |exp((t+s)A) - exp(tA) exp(sA)|.
    """

    return float(np.max(np.abs(matrix_exponential(A, t + s) - matrix_exponential(A, t) @ matrix_exponential(A, s))))


def contractivity(A, t_grid):
    """ Largest spectral norm of exp(tA) over the grid.
    """

    return float(max(np.linalg.norm(E, 2) for E in semigroup(A, t_grid)))


def spectral_splitting_residual(L_xi, pset, t):
    """ max_j |exp(t L_xi) P_j - e^{t lambda_j} P_j|.
    """

    E = matrix_exponential(L_xi, t)
    return float(max(np.max(np.abs(E @ P - np.exp(t*pset.eigenvalues[j])*P)) for j, P in pset.branches.items()))


# =========================== #
#         Decay fits           #
# =========================== #

class DecayReport(object):
    """
    Norms of a semigroup (or its remainder) on a time grid with the fitted
    bound norm(t) <= C_fit exp(gamma_fit t).

    Times t are in collision-frequency units; the physical time is t*time_scale
    and rate = gamma_fit/time_scale is the physical decay rate.
    """

    def __init__(self, xi, t, norms, gamma_fit, C_fit, regime, time_scale=1., **kwds):

        self.xi = xi
        self.t = np.asarray(t, dtype='float64')
        self.norms = np.asarray(norms, dtype='float64')
        self.gamma_fit = gamma_fit
        self.C_fit = C_fit
        self.regime = regime
        self.time_scale = time_scale
        self.spectral_rate = kwds.pop('spectral_rate', None)
        self.commutation_residual = kwds.pop('commutation_residual', None)
        self.initial_residual = kwds.pop('initial_residual', None)

    @property
    def rate(self):
        return self.gamma_fit/self.time_scale

    def bound_holds(self, rtol=1e-12):
        """ norms <= C_fit exp(gamma_fit t) pointwise on the grid.
        """

        return bool(np.all(self.norms <= self.C_fit*np.exp(self.gamma_fit*self.t)*(1 + rtol)))

    def rate_consistent(self, slack=0.05):
        """ Fitted rate below the spectral abscissa plus the relative slack.
        """

        if self.spectral_rate is None:
            return None
        return bool(self.rate <= self.spectral_rate + slack*abs(self.spectral_rate))

    def to_dict(self):

        dct = {'xi': self.xi.xi.tolist(), 'regime': self.regime, 'gamma_fit': self.gamma_fit,
               'C_fit': self.C_fit, 'time_scale': self.time_scale, 'rate': self.rate,
               'norms': [{'t': t, 'v_norm': n} for t, n in zip(self.t.tolist(), self.norms.tolist())]}
        for key in ('spectral_rate', 'commutation_residual', 'initial_residual'):
            if getattr(self, key) is not None:
                dct[key] = getattr(self, key)
        return dct


def fit_decay(t, norms, window=DECAY_WINDOW, floor=NORM_FLOOR):
    """
    Fit log(norm) = log(C) + gamma t over the time window.

    :Return:
        gamma, C : float
            Fitted rate and the smallest prefactor with norm <= C exp(gamma t)
            on the whole grid.
    """

    t = np.asarray(t, dtype='float64')
    norms = np.asarray(norms, dtype='float64')
    keep = (t >= window[0]) & (t <= window[1]) & (norms > floor)
    if keep.sum() < 2:
        raise DecayError('Fewer than two usable remainder norms in the window ' + str(window) + '!')

    model = LinearModel()
    params = model.make_params(slope=-1., intercept=0.)
    out = model.fit(np.log(norms[keep]), params, x=t[keep])
    gamma = float(out.best_values['slope'])
    if gamma >= 0:
        raise DecayError('Remainder does not decay (fitted rate %.3e)!' % gamma)
    C = float(np.max(norms*np.exp(-gamma*t)))

    return gamma, C


def splitting_check(L_xi, pset, t_grid, **kwds):
    """
    Remainder V(t) = exp(t L_xi) - sum_j e^{t lambda_j} P_j of the hydrodynamic
    splitting, with its commutation residuals and decay fit.

    :Parameters:
        L_xi : OperatorMatrix
            Operator at |xi| <= r_0.
        pset : ProjectorSet
            Branch projectors and eigenvalues at xi.
        t_grid : 1D array
            Times in collision-frequency units.
        **kwds : keyword arguments
            time_scale : float | 1/nu(0)
                Physical length of one time unit.
            r0 : float | None
                Small-frequency bound, checked when given.
            window : tuple | (2, 10)
                Fit window.
    """

    time_scale = kwds.pop('time_scale', collision_time(L_xi.basis.dim))
    r0 = kwds.pop('r0', None)
    window = kwds.pop('window', DECAY_WINDOW)

    xi = fo.FrequencyPoint(L_xi.meta.get('xi', np.zeros(L_xi.basis.dim)))
    if r0 is not None and xi.r > r0:
        raise ValueError('Splitting applies to |xi| <= r_0!')

    t_grid = np.asarray(t_grid, dtype='float64')
    eye = np.eye(L_xi.n)
    norms, comm = [], 0.
    for t, E in zip(t_grid, semigroup(L_xi, t_grid*time_scale)):
        Vt = E - sum(np.exp(t*time_scale*pset.eigenvalues[j])*P for j, P in pset.branches.items())
        norms.append(np.linalg.norm(Vt, 2))
        for P in pset.branches.values():
            comm = max(comm, np.max(np.abs(P @ Vt)), np.max(np.abs(Vt @ P)))

    V0 = eye - pset.total
    initial = float(np.max(np.abs(V0 @ V0 - V0)))
    gamma, C = fit_decay(t_grid, norms, window)

    # complementary spectrum, physical units
    hydro = np.array(list(pset.eigenvalues.values()))
    evals = sla.eigvals(L_xi.values)
    dist = np.min(np.abs(evals[:, None] - hydro[None, :]), axis=1)
    rest = evals[dist > 1e-6]
    spectral_rate = float(np.max(np.real(rest))) if rest.size else None

    report = DecayReport(xi, t_grid, norms, gamma, C, 'small-xi', time_scale, spectral_rate=spectral_rate,
                         commutation_residual=float(comm), initial_residual=initial)
    logger.info('Remainder decay at |xi| = %.4g: gamma %.5f, C %.4f', xi.r, gamma, C)
    if comm > 1e-6:
        wn.warn('Commutation residual %.2e exceeds 1e-6!' % comm)

    return report


def large_xi_decay(L, V, xi, t_grid, **kwds):
    """
    Full semigroup norm decay at |xi| >= r_0, compared with the spectral abscissa.

    :Parameters:
        L : OperatorMatrix
            Collision operator.
        V : OperatorMatrix/list
            Velocity matrices.
        xi : FrequencyPoint/1D array
            Frequency with |xi| >= r_0.
        t_grid : 1D array
            Times in collision-frequency units.
        **kwds : keyword arguments
            r0 : float | None
                Small-frequency bound, checked when given.
            time_scale, window : see splitting_check.
    """

    time_scale = kwds.pop('time_scale', collision_time(L.basis.dim))
    r0 = kwds.pop('r0', None)
    window = kwds.pop('window', DECAY_WINDOW)

    xi = xi if isinstance(xi, fo.FrequencyPoint) else fo.FrequencyPoint(xi)
    if r0 is not None and xi.r < r0:
        raise ValueError('Large-frequency decay applies to |xi| >= r_0!')

    L_xi = fo.assemble_L_xi(L, V, xi)
    t_grid = np.asarray(t_grid, dtype='float64')
    norms = [np.linalg.norm(E, 2) for E in semigroup(L_xi, t_grid*time_scale)]
    gamma, C = fit_decay(t_grid, norms, window)
    abscissa = float(np.max(np.real(sla.eigvals(L_xi.values))))

    report = DecayReport(xi, t_grid, norms, gamma, C, 'large-xi', time_scale, spectral_rate=abscissa)
    logger.info('Semigroup decay at |xi| = %.4g: rate %.5f, spectral abscissa %.5f', xi.r, report.rate, abscissa)

    return report


# =========================== #
#     Resolvent line scans     #
# =========================== #

class ResolventScan(object):
    """ Spectral norms of R(beta + i tau) along a vertical line and their supremum K_beta.
    """

    def __init__(self, beta, tau, norms, edge_ok, edge_bound_ok):

        self.beta = beta
        self.tau = np.asarray(tau, dtype='float64')
        self.norms = np.asarray(norms, dtype='float64')
        self.sup = float(np.max(self.norms))
        self.edge_ok = edge_ok
        self.edge_bound_ok = edge_bound_ok

    def to_frame(self):
        return pd.DataFrame({'tau': self.tau, 'norm': self.norms})

    def to_dict(self):
        return {'beta': self.beta, 'K_beta': self.sup, 'edge_ok': self.edge_ok,
                'edge_bound_ok': self.edge_bound_ok,
                'norms': [{'tau': t, 'norm': n} for t, n in zip(self.tau.tolist(), self.norms.tolist())]}


def resolvent_line_scan(L_xi, beta, tau_grid):
    """
    Sample |R(beta + i tau)| over a tau grid.

    The edge check passes when the maximum lies inside the window or the
    norms decrease toward both ends; the Neumann check verifies
    |R| <= 2/|tau| wherever |tau| > 2|L_xi|.
    """

    A = _values(L_xi)
    evals = sla.eigvals(A)
    clearance = np.min(np.abs(np.real(evals) - beta))
    if clearance <= 1e-8:
        raise fo.ResolventError('Line Re z = ' + str(beta) + ' hits the spectrum!')

    tau = np.sort(np.asarray(tau_grid, dtype='float64'))
    eye = np.eye(A.shape[0])
    norms = np.array([1/sla.svdvals((beta + 1j*t)*eye - A)[-1] for t in tau])

    peak = int(np.argmax(norms))
    inside = 0 < peak < tau.size - 1
    decreasing = tau.size < 2 or (norms[0] <= norms[1] and norms[-1] <= norms[-2])
    big = np.abs(tau) > 2*np.linalg.norm(A, 2)
    bound_ok = bool(np.all(norms[big] <= 2/np.abs(tau[big]))) if np.any(big) else True

    return ResolventScan(beta, tau, norms, bool(inside or decreasing), bound_ok)


# =========================== #
#     Uniform gap scan         #
# =========================== #

def gap_uniformity_scan(L, V, r_grid, directions, r0, a, **kwds):
    """
    Second spectral abscissa over frequencies and directions: max Re over
    the non-hydrodynamic eigenvalues for r <= r_0, over all eigenvalues beyond.

    :Parameters:
        L : OperatorMatrix
            Collision operator.
        V : list of OperatorMatrix
            Axis velocity matrices.
        r_grid : 1D array
            Frequencies |xi| >= 0.
        directions : list of 1D arrays
            Directions xi~.
        r0 : float
            Small-frequency bound.
        a : float
            Hydrodynamic threshold.
        **kwds : keyword arguments
            Passed to fourier_operator.spectra (ncores, scheduler).

    :Return:
        b_emp, table : float, pandas DataFrame
            Empirical uniform gap inf(-abscissa) and the scan.
    """

    r_grid = np.asarray(r_grid, dtype='float64')
    points, keys = [], []
    for k, dirv in enumerate(directions):
        for r in r_grid:
            points.append(fo.FrequencyPoint.from_polar(r, dirv))
            keys.append((k, r))

    slices = fo.spectra(L, V, points, **kwds)
    rows = []
    for (k, r), slc in zip(keys, slices):
        hydro = slc.select(a) if r <= r0 else np.array([], dtype='int64')
        rows.append({'direction': k, 'r': r, 'abscissa': slc.abscissa(exclude=hydro),
                     'hydrodynamic': int(hydro.size)})
    table = pd.DataFrame(rows, columns=['direction', 'r', 'abscissa', 'hydrodynamic'])
    b_emp = float(-table['abscissa'].max())
    logger.info('Empirical uniform gap %.6f over %d slices', b_emp, len(rows))

    return b_emp, table
