import logging

from . import utils

__version_info__ = ('0', '1', '0')
__version__ = '.'.join(__version_info__)
__author__ = 'boltzspec developers'
__all__ = ['utils', 'base', 'velocity_basis', 'collision_operator', 'fourier_operator',
           'hydrodynamic_branches', 'semigroup_analysis', 'weighted_spaces', 'session',
           'validation', 'cli']

logging.getLogger(__name__).addHandler(logging.NullHandler())
