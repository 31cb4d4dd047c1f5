#! /usr/bin/env python
# -*- coding: utf-8 -*-

"""
@author: boltzspec developers

Operator family of one run configuration, assembled on first use.
"""

from __future__ import print_function, division
from . import utils as u, velocity_basis as vb, collision_operator as co, \
    fourier_operator as fo, semigroup_analysis as sg, weighted_spaces as ws
from .base import MatrixCache
import logging
import numpy as np


logger = logging.getLogger(__name__)


class SpectralSession(object):
    """
    Lazily assembled operators for one configuration: the Gaussian-weight
    basis and quadratures, L (through the matrix cache), nu, the axis velocity
    matrices, the gap a_0, the surrogate margin a_1, the hydrodynamic
    threshold a and, on request, the E(k) discretization.

    :Parameters:
        config : object
            Run configuration with the attributes of cli.RunConfig.
        cache : MatrixCache | None
            Matrix cache, built from config.cache_dir when None.
    """

    def __init__(self, config, cache=None):

        self.config = config
        self.cache = cache if cache is not None else MatrixCache(config.cache_dir)
        self.ncores = config.threads or co.N_CPU
        self.pbenv = getattr(config, 'pbenv', 'classic')
        self._store = {}

    def _lazy(self, name, builder):

        if name not in self._store:
            self._store[name] = builder()
        return self._store[name]

    # ==== Gaussian-weight space ==== #

    @property
    def dim(self):
        return self.config.dim

    @property
    def quad_order(self):
        return self.config.quad_order or self.config.degree + 3

    @property
    def sphere_order(self):
        return self.config.sphere_order or self.config.degree + 1

    @property
    def spec(self):
        return self._lazy('spec', lambda: vb.BasisSpec(self.dim, self.config.degree))

    @property
    def basis(self):
        return self._lazy('basis', lambda: vb.build_basis(self.spec))

    @property
    def quad(self):
        return self._lazy('quad', lambda: vb.build_quadrature(self.spec, self.quad_order))

    @property
    def sphere(self):
        return self._lazy('sphere', lambda: vb.sphere_quadrature(self.dim, self.sphere_order))

    def material(self, name, **extra):
        """ Cache key material of an operator on the Gaussian-weight basis.
        """

        return u.dictmerge({'name': name, 'basis': self.spec.to_dict(), 'quad_order': self.quad_order,
                            'sphere_order': self.sphere_order}, extra)

    def _build_L(self):

        builder = lambda: co.assemble_L(self.basis, self.quad, self.sphere, ncores=self.ncores).values
        values = self.cache.fetch(self.material('L', method='taylor-moment'), builder)
        meta = {'quad_order': self.quad_order, 'sphere_order': self.sphere_order, 'method': 'taylor-moment'}

        return co.OperatorMatrix(values, self.basis, 'E', name='L', meta=meta)

    @property
    def L(self):
        return self._lazy('L', self._build_L)

    def _build_nu(self):

        extra = self.config.nu_extra_order
        builder = lambda: co.assemble_nu_multiplier(self.basis, self.quad, extra_order=extra).values
        values = self.cache.fetch(self.material('nu', extra_order=extra), builder)

        return co.OperatorMatrix(values, self.basis, 'E', name='nu', meta={'quad_order': self.quad_order + extra})

    @property
    def nu(self):
        return self._lazy('nu', self._build_nu)

    @property
    def V(self):
        return self._lazy('V', lambda: fo.velocity_matrices(self.basis, self.quad))

    @property
    def kernel(self):
        return self._lazy('kernel', lambda: co.kernel_basis(self.L))

    @property
    def time_scale(self):
        return sg.collision_time(self.dim)

    # ==== Constants ==== #

    @property
    def a0(self):
        return self._lazy('a0', lambda: co.spectral_gap(self.L))

    @property
    def surrogate(self):
        return self._lazy('surrogate', lambda: ws.surrogate_splitting(self.L, self.nu, self.config.R_cut,
                          self.config.delta, samples=self.config.samples, seed=self.config.seed))

    @property
    def a1(self):
        return self.surrogate.a1_emp

    def _threshold(self):

        bound = min(self.a0, self.a1)
        if bound <= 0:
            raise ValueError('No admissible threshold: min(a_0, a_1_emp) = %.4e is not positive!' % bound)
        a = self.config.a
        if a is None:
            a = bound/2
        elif a >= bound:
            raise ValueError('Threshold a = %.6g must lie below min(a_0, a_1_emp) = %.6g!' % (a, bound))
        logger.info('Threshold a = %.6f (a_0 %.6f, a_1_emp %.6f)', a, self.a0, self.a1)

        return a

    @property
    def a(self):
        return self._lazy('a', self._threshold)

    @property
    def contour(self):
        """ Fixed circle of radius a/2 about 0 enclosing the hydrodynamic group.
        """

        return fo.ContourSpec(0., self.a/2, self.config.contour_nodes)

    # ==== Frequencies and grids ==== #

    @property
    def direction(self):

        if self.config.direction is None:
            return np.eye(self.dim)[0]
        return u.unit_vector(u.parse_vector(self.config.direction, self.dim))

    @property
    def xi(self):

        if self.config.xi is None:
            return fo.FrequencyPoint.from_polar(0.1, self.direction)
        return fo.FrequencyPoint(u.parse_vector(self.config.xi, self.dim))

    def grid(self, name):
        """ Parsed grid of a configuration field (r_grid, t_grid, tau_grid, xi_grid).
        """

        return u.parse_grid(getattr(self.config, name))

    def L_xi(self, xi=None):
        return fo.assemble_L_xi(self.L, self.V, self.xi if xi is None else xi)

    def slice(self, xi=None):
        return fo.spectrum(self.L_xi(xi))

    # ==== Polynomial-weight space ==== #

    @property
    def poly_spec(self):

        cfg = self.config
        return self._lazy('poly_spec', lambda: vb.BasisSpec(self.dim, cfg.poly_degree or cfg.degree,
                          weight='polynomial', k=cfg.k, p=cfg.p, width=cfg.width))

    def _build_ek(self):

        spec = self.poly_spec
        basis = vb.build_basis(spec, order=self.config.poly_quad_order)
        star_order, sphere_order = spec.degree//2 + 4, spec.degree//2 + 3
        made = {}

        def _assemble():
            made['disc'] = ws.assemble_in_Ek(spec, basis=basis, star_order=star_order,
                                sphere_order=sphere_order, ncores=self.ncores)
            return made['disc'].L.values

        material = {'name': 'L_Ek', 'basis': spec.to_dict(), 'v_order': basis.grid.order,
                    'star_order': star_order, 'sphere_order': sphere_order}
        values = self.cache.fetch(material, _assemble)
        if 'disc' in made:
            return made['disc']

        meta = {'method': 'weak-form', 'star_order': star_order, 'sphere_order': sphere_order,
                'v_order': basis.grid.order, 'k': spec.k, 'p': spec.p, 'maxwellian_degree': spec.maxwellian_degree,
                'conservation_defect': None}
        L = co.OperatorMatrix(values, basis, 'E(k)', name='L', meta=meta)
        V = fo.velocity_matrices(basis, basis.grid)
        nu = co.OperatorMatrix(basis.moment_matrix(basis.grid, co.compute_nu(basis.grid.nodes)),
                               basis, 'E(k)', name='nu')

        return ws.EkDiscretization(basis, L, V, nu, meta)

    @property
    def ek(self):
        return self._lazy('ek', self._build_ek)

    def summary(self):
        """ Sizes and derived constants of the session.
        """

        return {'dim': self.dim, 'degree': self.config.degree, 'n': self.basis.n,
                'quad_order': self.quad_order, 'sphere_order': self.sphere_order,
                'a0': self.a0, 'a1_emp': self.a1, 'a': self.a, 'r0': self.config.r0,
                'time_scale': self.time_scale}
