#! /usr/bin/env python
# -*- coding: utf-8 -*-

"""
@author: boltzspec developers

Command-line front end. Every subcommand reads one RunConfig (built-in
defaults, then the JSON file of --config, then explicit flags), works on a
SpectralSession and writes a JSON document or a CSV table.

Exit codes: 0 on success, 1 when an invariant check fails, 2 on
configuration errors.
"""

from __future__ import print_function, division
from . import utils as u, velocity_basis as vb, collision_operator as co, fourier_operator as fo, \
    hydrodynamic_branches as hb, semigroup_analysis as sg, weighted_spaces as ws, validation as vd
from .base import BoltzspecError, save_matrix, content_hash
from .session import SpectralSession
import argparse
import json
import logging
import sys
import numpy as np
import pandas as pd


logger = logging.getLogger(__name__)

SUBCOMMANDS = ('nu', 'assemble', 'spectrum', 'branches', 'coeffs', 'projectors',
               'semigroup', 'enlargement', 'validate')
FLOAT_FORMAT = '%.17g'


class ConfigError(BoltzspecError, ValueError):
    """ Invalid or inconsistent run configuration.
    """
    pass


# =========================== #
#        Configuration         #
# =========================== #

DEFAULTS = {
    'dim': 3,
    'degree': 6,
    'quad_order': None,
    'sphere_order': None,
    'nu_extra_order': 8,
    'k': 6.0,
    'p': None,
    'width': None,
    'poly_degree': None,
    'poly_quad_order': None,
    'r0': 0.3,
    'a': None,
    'contour_nodes': 64,
    'xi': None,
    'xi_grid': None,
    'direction': None,
    'r_grid': '0.01:0.3:30',
    't_grid': '0:10:101',
    'beta': None,
    'tau_grid': '-50:50:201',
    'speed_grid': '0:12:121',
    'R_cut': 6.0,
    'delta': 0.5,
    'fit_degree': 4,
    'samples': 200,
    'checks': None,
    'include_ek': True,
    'seed': 0,
    'threads': None,
    'cache_dir': None,
    'out': None,
    'pbar': False,
}


class RunConfig(object):
    """
    Every tunable of a run. Attributes mirror the keys of DEFAULTS.

    :Parameters:
        **kwds : keyword arguments
            Values overriding the defaults; unknown keys are rejected.
    """

    def __init__(self, **kwds):

        unknown = set(kwds) - set(DEFAULTS)
        if unknown:
            raise ConfigError('Unknown configuration keys ' + str(sorted(unknown)) + '!')
        for key, val in u.dictmerge(DEFAULTS, kwds).items():
            setattr(self, key, val)

    @classmethod
    def from_sources(cls, path=None, overrides=None):
        """ Defaults < JSON file < explicit overrides.
        """

        layers = []
        if path is not None:
            try:
                with open(path, 'r', encoding='utf-8') as fh:
                    layers.append(json.load(fh))
            except (OSError, ValueError) as err:
                raise ConfigError('Cannot read configuration file ' + repr(path) + ' (' + str(err) + ')!')
            if not isinstance(layers[0], dict):
                raise ConfigError('Configuration file must hold a JSON object!')
        layers.append(overrides or {})

        return cls(**u.dictmerge({}, layers))

    def to_dict(self):
        return {key: getattr(self, key) for key in DEFAULTS}

    def _grid(self, name, positive=False, nonnegative=False, rmax=None):

        try:
            grid = u.parse_grid(getattr(self, name))
        except ValueError as err:
            raise ConfigError(name + ': ' + str(err))
        if positive and np.any(grid <= 0):
            raise ConfigError(name + ' must hold positive values!')
        if nonnegative and np.any(grid < 0):
            raise ConfigError(name + ' must hold nonnegative values!')
        if rmax is not None and np.any(grid > rmax):
            raise ConfigError(name + ' exceeds r0 = ' + str(rmax) + '!')
        return grid

    def _vector(self, name):

        try:
            vec = u.parse_vector(getattr(self, name), self.dim)
        except ValueError as err:
            raise ConfigError(name + ': ' + str(err) + ' (dimension mismatch)')
        return vec

    def validate(self):
        """ Re-check every module precondition; raises ConfigError.
        """

        if self.dim not in (2, 3):
            raise ConfigError('Only velocity dimensions 2 and 3 are supported!')
        for key in ('degree', 'poly_degree'):
            val = getattr(self, key)
            if val is not None and (int(val) != val or val < 2):
                raise ConfigError(key + ' must be an integer >= 2!')
        degree = self.degree
        if self.quad_order is not None and self.quad_order < degree + 3:
            raise ConfigError('quad_order must be at least degree + 3 = ' + str(degree + 3) + '!')
        if self.sphere_order is not None and 2*self.sphere_order - 1 < 2*degree:
            raise ConfigError('sphere_order must be at least degree + 1 = ' + str(degree + 1) + '!')
        if self.k <= ws.k_star():
            raise ConfigError('k must exceed k_* = %.6f!' % ws.k_star())
        pdeg = self.poly_degree or degree
        if self.p is not None and self.p < vb.min_decay_exponent(pdeg, self.k, self.dim):
            raise ConfigError('p must be at least ' + str(vb.min_decay_exponent(pdeg, self.k, self.dim)) + '!')
        if self.r0 <= 0:
            raise ConfigError('r0 must be positive!')
        if self.a is not None and self.a <= 0:
            raise ConfigError('a must be positive!')
        if self.contour_nodes < 16:
            raise ConfigError('contour_nodes must be at least 16!')
        if self.delta <= 0 or self.R_cut < 0:
            raise ConfigError('Cutoff needs R_cut >= 0 and delta > 0!')
        if self.threads is not None and self.threads < 1:
            raise ConfigError('threads must be positive!')
        for key in ('fit_degree', 'samples', 'nu_extra_order'):
            if getattr(self, key) < 1:
                raise ConfigError(key + ' must be positive!')

        if self.xi is not None:
            self._vector('xi')
        if self.direction is not None:
            vec = self._vector('direction')
            if not np.any(vec):
                raise ConfigError('direction must be nonzero!')
        self._grid('r_grid', positive=True, rmax=self.r0)
        self._grid('t_grid', nonnegative=True)
        self._grid('tau_grid')
        self._grid('speed_grid', nonnegative=True)
        if self.xi_grid is not None:
            self._grid('xi_grid', nonnegative=True)
        if self.checks is not None and not isinstance(self.checks, (list, tuple)):
            raise ConfigError('checks must be a list of check names!')

        return self


# =========================== #
#        Argument parser       #
# =========================== #

def _common_parser():
    """ Flags shared by every subcommand. Absent flags leave no attribute, so
    only explicit flags override the configuration file.
    """

    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    add = common.add_argument
    add('--config', dest='config_path', help='JSON configuration file')
    add('--cache-dir', dest='cache_dir', help='matrix cache directory')
    add('--seed', type=int, help='random seed')
    add('--threads', type=int, help='parallel workers')
    add('--out', help='output file (stdout when absent)')
    add('-v', '--verbose', action='count', help='-v info, -vv debug')
    add('--pbar', action='store_true', help='show progress bars')

    add('--dim', type=int, help='velocity dimension (2 or 3)')
    add('--degree', type=int, help='maximal polynomial degree N')
    add('--quad-order', dest='quad_order', type=int, help='Gauss-Hermite nodes per dimension')
    add('--sphere-order', dest='sphere_order', type=int, help='sphere rule order')
    add('--nu-extra-order', dest='nu_extra_order', type=int, help='extra nodes for the nu multiplier')
    add('--k', type=float, help='polynomial weight exponent')
    add('--p', type=int, help='decay exponent of the polynomial-weight profile')
    add('--width', type=float, help='width of the polynomial-weight profile')
    add('--poly-degree', dest='poly_degree', type=int, help='degree of the polynomial-weight basis')
    add('--poly-quad-order', dest='poly_quad_order', type=int, help='mapped quadrature order')
    add('--r0', type=float, help='small-frequency bound')
    add('--a', type=float, help='hydrodynamic threshold')
    add('--contour-nodes', dest='contour_nodes', type=int, help='initial contour nodes')
    add('--xi', help='frequency, comma-separated')
    add('--xi-grid', dest='xi_grid', help='frequency magnitudes start:stop:steps')
    add('--direction', help='direction, comma-separated')
    add('--r-grid', dest='r_grid', help='branch frequencies start:stop:steps')
    add('--t-grid', dest='t_grid', help='times in collision units start:stop:steps')
    add('--beta', type=float, help='abscissa of the resolvent line scan')
    add('--tau-grid', dest='tau_grid', help='ordinates of the resolvent line scan')
    add('--speed-grid', dest='speed_grid', help='speeds for the nu bounds')
    add('--R-cut', dest='R_cut', type=float, help='surrogate cutoff radius')
    add('--delta', type=float, help='surrogate mollification width')
    add('--fit-degree', dest='fit_degree', type=int, help='branch fit polynomial degree')
    add('--samples', type=int, help='random vectors for sampled checks')
    add('--checks', nargs='+', help='subset of validation checks')
    add('--no-ek', dest='include_ek', action='store_false', help='skip the E(k) checks')

    return common


def build_parser():

    parser = argparse.ArgumentParser(prog='boltzspec',
                description='Spectral analysis of the linearized hard-sphere Boltzmann operator.')
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True
    common = _common_parser()
    helps = {'nu': 'collision frequency bounds',
             'assemble': 'assemble L (cached) and write the matrix',
             'spectrum': 'spectrum of L_xi at one frequency or along a grid',
             'branches': 'trace the hydrodynamic branches',
             'coeffs': 'first- and second-order branch coefficients',
             'projectors': 'branch projectors and their expansion',
             'semigroup': 'semigroup splitting and decay',
             'enlargement': 'compare the E and E(k) spectra',
             'validate': 'run the invariant suite'}
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])

    return parser


def parse_args(argv=None):
    """ Parse the command line into (command, config path, overrides, verbosity).
    """

    args = vars(build_parser().parse_args(argv))
    command = args.pop('command')
    path = args.pop('config_path', None)
    verbose = args.pop('verbose', 0)

    return command, path, args, verbose


def configure_logging(verbose):

    level = logging.WARNING if not verbose else (logging.INFO if verbose == 1 else logging.DEBUG)
    logging.basicConfig(level=level, format='%(asctime)s %(name)s %(levelname)s: %(message)s')
    logging.captureWarnings(True)


# =========================== #
#           Outputs            #
# =========================== #

def emit_json(doc, out=None):
    """ Write a JSON document to a file, or to stdout when out is None.
    """

    text = u.dump_json(doc, out)
    if out is None:
        sys.stdout.write(text)


def emit_frame(frame, out=None):
    """ Write a table as CSV with 17 significant digits.
    """

    frame.to_csv(out if out is not None else sys.stdout, index=False, float_format=FLOAT_FORMAT)


def _records(dct):
    return [{'branch': j, 're': float(np.real(v)), 'im': float(np.imag(v))} for j, v in dct.items()]


# =========================== #
#          Subcommands         #
# =========================== #

def cmd_nu(session, config):

    speeds = u.parse_grid(config.speed_grid)
    bounds = co.estimate_nu_bounds(speeds, session.dim)
    values = co.nu_radial(speeds, session.dim)
    doc = u.dictmerge(bounds.to_dict(), {'nu_at_zero': co.nu_radial(0., session.dim),
                      'values': [{'v': v, 'nu': n} for v, n in zip(speeds.tolist(), values.tolist())]})
    emit_json(doc, config.out)


def cmd_assemble(session, config):

    L = session.L
    meta = {'name': 'L', 'basis': session.spec.to_dict(), 'basis_hash': session.basis.hash(),
            'quad_order': session.quad_order, 'sphere_order': session.sphere_order}
    if config.out is not None:
        save_matrix(L.values, config.out, meta=meta)
        logger.info('Wrote %s', config.out)

    doc = u.dictmerge(meta, {'n': L.n, 'sha256': content_hash(np.ascontiguousarray(L.values)),
                      'kernel_dimension': int(session.kernel.shape[1]), 'spectral_gap': session.a0,
                      'hermitian_residual': L.hermitian_residual(),
                      'conservation_residual': co.conservation_residual(L)})
    emit_json(doc, None if config.out is None else config.out + '.summary.json')


def cmd_spectrum(session, config):

    a = session.a
    if config.xi_grid is None:
        emit_json(session.slice().to_dict(a=a), config.out)
        return

    direction = session.direction
    frame = hb.kernel_frame(session.basis, direction)
    r_grid = u.parse_grid(config.xi_grid)
    points = [fo.FrequencyPoint.from_polar(r, direction) for r in r_grid]
    rows = []
    for r, slc in zip(r_grid, fo.spectra(session.L, session.V, points, ncores=session.ncores)):
        idx = slc.select(a)
        labels = {}
        if 0 < r <= config.r0 and idx.size == session.dim + 2:
            labels = {i: j for j, ids in hb.assign_branches(slc, a, frame).items() for i in ids}
        for i in idx:
            rows.append({'r': r, 'branch': labels.get(int(i), ''), 're': float(np.real(slc.eigenvalues[i])),
                         'im': float(np.imag(slc.eigenvalues[i]))})
    emit_frame(pd.DataFrame(rows, columns=['r', 'branch', 're', 'im']), config.out)


def _trace(session, config):
    return hb.trace_branches(session.L, session.V, session.direction, session.grid('r_grid'), session.a,
                             pbar=config.pbar)


def cmd_branches(session, config):
    emit_frame(_trace(session, config).to_frame(), config.out)


def cmd_coeffs(session, config):

    d = session.dim
    table = _trace(session, config)
    fits = table.fit(degree=config.fit_degree)
    formula = hb.second_order_coeffs(session.L, session.V, session.direction)
    exact = hb.first_order_modes(session.basis, session.direction)['lambda1']

    doc = {'dim': d, 'degree': config.degree, 'direction': session.direction.tolist(),
           'lambda1': _records({j: fits[j]['lambda1'] for j in hb.LABELS}),
           'lambda1_exact': _records(exact),
           'lambda2': _records({j: fits[j]['lambda2'] for j in hb.LABELS}),
           'lambda2_formula': [{'branch': j, 'value': v} for j, v in formula.items()],
           'lambda2_relative_deviation': [{'branch': j, 'value': abs(np.real(fits[j]['lambda2']) - formula[j])
                                           / abs(formula[j])} for j in hb.LABELS],
           'fit_residuals': [{'branch': j, 'residual': fits[j]['residual']} for j in hb.LABELS],
           'conjugation_residual': table.conjugation_residual(),
           'crossings': int(np.sum(table.crossing)), 'refined': len(table.refined),
           'transport': hb.transport_summary(formula, d)}
    emit_json(doc, config.out)


def _projector_set(session, xi=None):

    xi = session.xi if xi is None else xi
    slc = session.slice(xi)
    total = fo.contour_projector(session.L_xi(xi), session.contour, eigenvalues=slc.eigenvalues)
    assignment = hb.assign_branches(slc, session.a, hb.kernel_frame(session.basis, xi.direction))

    return slc, hb.branch_projectors(slc, assignment, total=total)


def cmd_projectors(session, config):

    xi = session.xi
    if xi.r == 0 or xi.r > config.r0:
        raise ConfigError('Branch projectors need 0 < |xi| <= r0!')
    slc, pset = _projector_set(session)
    triples = hb.eigentriples(slc, pset)
    B = hb.biorthogonality_matrix(triples)
    exp = hb.total_projector_expansion(session.L, session.V, xi.direction, session.grid('r_grid'),
                                       radius=session.a/2, nodes=config.contour_nodes, pbar=config.pbar)

    doc = {'xi': xi.xi.tolist(), 'eigenvalues': _records(pset.eigenvalues), 'ranks': pset.ranks(),
           'algebra_residual': pset.algebra_residual(), 'sum_residual': pset.sum_residual(),
           'intertwining_residual': pset.intertwining_residual(session.L_xi()),
           'kernel_residual': float(np.max(np.abs(exp['P0'] - co.kernel_projector(session.kernel)))),
           'biorthogonality_residual': float(np.max(np.abs(B - np.eye(B.shape[0])))),
           'expansion': {'order': exp['order'],
                         'remainder': [{'r': r, 'residual': res} for r, res in zip(exp['r'].tolist(),
                                       exp['residual'].tolist())]}}
    emit_json(doc, config.out)


def cmd_semigroup(session, config):

    xi = session.xi
    t_grid = session.grid('t_grid')
    if xi.r == 0:
        raise ConfigError('Semigroup splitting needs xi != 0!')
    if xi.r <= config.r0:
        _, pset = _projector_set(session)
        report = sg.splitting_check(session.L_xi(), pset, t_grid, time_scale=session.time_scale, r0=config.r0)
    else:
        report = sg.large_xi_decay(session.L, session.V, xi, t_grid, time_scale=session.time_scale, r0=config.r0)

    doc = u.dictmerge(report.to_dict(), {'bound_holds': report.bound_holds(),
                                         'rate_consistent': report.rate_consistent()})
    if config.beta is not None:
        doc['resolvent'] = sg.resolvent_line_scan(session.L_xi(), config.beta, session.grid('tau_grid')).to_dict()
    emit_json(doc, config.out)


def cmd_enlargement(session, config):

    xi = session.xi
    disc = session.ek
    cmp = ws.compare_spectra(session.slice(), fo.spectrum(disc.L_xi(xi)), session.a, k=config.k)
    nu0 = co.estimate_nu_bounds(u.parse_grid(config.speed_grid), session.dim).nu0
    sur = ws.surrogate_splitting(disc.L, disc.nu, config.R_cut, config.delta, samples=config.samples,
                                 seed=config.seed)

    doc = u.dictmerge(cmp.to_dict(), {'k_star': ws.k_star(), 'p': disc.basis.spec.p,
                      'kernel_residual': ws.kernel_residual(disc),
                      'conservation_defect': disc.meta.get('conservation_defect'),
                      'a1_analytic': ws.analytic_dissipativity_constant(config.k, nu0),
                      'a1_emp': sur.a1_emp,
                      'C_A': ws.regularization_check(sur, samples=config.samples, seed=config.seed)})
    emit_json(doc, config.out)


def cmd_validate(session, config):

    report = vd.run_suite(session, names=config.checks, include_ek=config.include_ek, pbar=config.pbar)
    emit_frame(report.drop(columns=['seconds']), config.out)
    vd.assert_suite(report)


COMMANDS = {'nu': cmd_nu, 'assemble': cmd_assemble, 'spectrum': cmd_spectrum, 'branches': cmd_branches,
            'coeffs': cmd_coeffs, 'projectors': cmd_projectors, 'semigroup': cmd_semigroup,
            'enlargement': cmd_enlargement, 'validate': cmd_validate}
THRESHOLD_FREE = ('nu', 'assemble')


def run_subcommand(name, config, session=None):
    """
    Run one subcommand.

    :Parameters:
        name : str
            Subcommand name.
        config : RunConfig
            Configuration (validated here).
        session : SpectralSession | None
            Reused operators, built from the configuration when None.

    :Return:
        code : int
            0 on success, 1 on an invariant failure, 2 on a configuration error.
    """

    try:
        if name not in COMMANDS:
            raise ConfigError('Unknown subcommand ' + repr(name) + '!')
        config.validate()
        session = SpectralSession(config) if session is None else session
        if name not in THRESHOLD_FREE:
            try:
                session.a
            except ValueError as err:
                raise ConfigError(str(err))
        COMMANDS[name](session, config)
    except ConfigError as err:
        logger.error('Configuration error: %s', err)
        return 2
    except vd.InvariantError as err:
        logger.error('%s', err)
        return 1
    except BoltzspecError as err:
        logger.error('%s: %s', type(err).__name__, err)
        return 1

    return 0


def main(argv=None):

    command, path, overrides, verbose = parse_args(argv)
    configure_logging(verbose)
    try:
        config = RunConfig.from_sources(path, overrides)
    except ConfigError as err:
        logger.error('Configuration error: %s', err)
        return 2

    return run_subcommand(command, config)


if __name__ == '__main__':
    sys.exit(main())
