#! /usr/bin/env python
# -*- coding: utf-8 -*-

"""
@author: boltzspec developers
"""

from boltzspec import cli, validation as vd
from unittest import mock
import json
import os
import tempfile
import unittest as unit
import pandas as pd


SMALL = ['--dim', '2', '--degree', '4', '--threads', '2']


class TestRunConfig(unit.TestCase):
    """ Class for unit testing of configuration layering and validation
    """

    def test_explicit_flags_only(self):
        """ Testing that absent flags leave no override.
        """

        command, path, overrides, verbose = cli.parse_args(['nu', '--dim', '2', '-vv'])
        self.assertEqual(command, 'nu')
        self.assertIsNone(path)
        self.assertEqual(overrides, {'dim': 2})
        self.assertEqual(verbose, 2)

        _, _, overrides, _ = cli.parse_args(['validate', '--checks', 'k_star', 'L_symmetry', '--no-ek'])
        self.assertEqual(overrides, {'checks': ['k_star', 'L_symmetry'], 'include_ek': False})

    def test_precedence(self):
        """ Testing defaults < configuration file < explicit flags.
        """

        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'run.json')
            with open(path, 'w') as fh:
                json.dump({'dim': 2, 'degree': 5, 'r0': 0.2}, fh)
            config = cli.RunConfig.from_sources(path, {'degree': 4})
        self.assertEqual(config.dim, 2)
        self.assertEqual(config.degree, 4)
        self.assertEqual(config.r0, 0.2)
        self.assertEqual(config.contour_nodes, cli.DEFAULTS['contour_nodes'])

    def test_bad_sources(self):
        """ Testing unknown keys and unreadable files.
        """

        with self.assertRaises(cli.ConfigError):
            cli.RunConfig(dimension=3)
        with self.assertRaises(cli.ConfigError):
            cli.RunConfig.from_sources('/nonexistent/run.json')
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'list.json')
            with open(path, 'w') as fh:
                json.dump([1, 2], fh)
            with self.assertRaises(cli.ConfigError):
                cli.RunConfig.from_sources(path)

    def test_validation(self):
        """ Testing the precondition checks of a configuration.
        """

        cli.RunConfig().validate()
        bad = [{'dim': 4}, {'degree': 1}, {'quad_order': 5}, {'sphere_order': 3}, {'k': 5.},
               {'p': 2, 'k': 6.}, {'r0': 0.}, {'a': -1.}, {'contour_nodes': 8}, {'delta': 0.},
               {'threads': 0}, {'xi': '0.1,0'}, {'direction': '0,0,0'}, {'r_grid': '0.01:0.5:10'},
               {'t_grid': '-1:1:3'}, {'xi_grid': '0:1'}, {'checks': 'k_star'}]
        for kwds in bad:
            with self.assertRaises(cli.ConfigError, msg=str(kwds)):
                cli.RunConfig(**kwds).validate()

        with self.assertRaises(cli.ConfigError) as ctx:
            cli.RunConfig(xi='0,0').validate()
        self.assertIn('dimension mismatch', str(ctx.exception))


class TestCommands(unit.TestCase):
    """ Class for unit testing of the subcommands and their exit codes
    """

    def setUp(self):

        self.tmp = tempfile.TemporaryDirectory()
        self.cache = os.path.join(self.tmp.name, 'cache')

    def tearDown(self):
        self.tmp.cleanup()

    def _path(self, name):
        return os.path.join(self.tmp.name, name)

    def test_dimension_mismatch(self):
        """ Testing exit code 2 for a two-component xi in three dimensions.
        """

        self.assertEqual(cli.main(['spectrum', '--xi', '0,0']), 2)
        self.assertEqual(cli.run_subcommand('bogus', cli.RunConfig()), 2)

    def test_nu(self):
        """ Testing the collision frequency document.
        """

        out = self._path('nu.json')
        self.assertEqual(cli.main(['nu', '--dim', '2', '--out', out]), 0)
        with open(out) as fh:
            doc = json.load(fh)
        self.assertIn('schema_version', doc)
        self.assertEqual(doc['dim'], 2)
        self.assertLessEqual(doc['nu0'], doc['nu1'])
        self.assertEqual(len(doc['values']), 121)

    def test_assemble_is_reproducible(self):
        """ Testing byte-identical matrices and summaries across a cached rerun.
        """

        out = self._path('L.bin')
        args = ['assemble'] + SMALL + ['--cache-dir', self.cache, '--out', out]
        self.assertEqual(cli.main(args), 0)
        with open(out, 'rb') as fh:
            first = fh.read()
        with open(out + '.summary.json', 'rb') as fh:
            first_summary = fh.read()

        self.assertEqual(cli.main(args), 0)
        with open(out, 'rb') as fh:
            self.assertEqual(fh.read(), first)
        with open(out + '.summary.json', 'rb') as fh:
            self.assertEqual(fh.read(), first_summary)

        summary = json.loads(first_summary)
        self.assertEqual(summary['kernel_dimension'], 4)
        self.assertEqual(summary['n'], 15)

    def test_spectrum_grid(self):
        """ Testing the spectrum table along a frequency grid.
        """

        out = self._path('spectrum.csv')
        args = ['spectrum'] + SMALL + ['--cache-dir', self.cache, '--xi-grid', '0.05:0.2:4', '--out', out]
        self.assertEqual(cli.main(args), 0)
        table = pd.read_csv(out)
        self.assertEqual(list(table.columns), ['r', 'branch', 're', 'im'])
        self.assertEqual(len(table), 16)

    def test_validate(self):
        """ Testing the validation report and the invariant failure exit code.
        """

        out = self._path('report.csv')
        args = ['validate'] + SMALL + ['--cache-dir', self.cache, '--checks', 'k_star', 'L_symmetry',
                                       'conservation', '--out', out]
        self.assertEqual(cli.main(args), 0)
        table = pd.read_csv(out)
        self.assertNotIn('seconds', table.columns)
        self.assertEqual(len(table), 3)

        with mock.patch.object(vd.InvariantSuite, 'symmetry', return_value=1.):
            self.assertEqual(cli.main(args), 1)


if __name__ == '__main__':
    unit.main()
