#!/usr/bin/env python
import json
import os
import unittest

import mock
import numpy as np
from testfixtures import LogCapture, OutputCapture, TempDirectory

from unit_test_setup import gibbsbd, CONFIG_DIR
from gibbsbd import cli

THRESHOLD = os.path.join(CONFIG_DIR, 'threshold.toml')

SIMULATE = b'''
kind = "simulate"
seed = 2
activity = 1.0
t_end = 1.0
replicas = 20

[potential]
kind = "hard_sphere"
r = 0.5

[region]
lower = [0.0]
upper = [2.0]
'''


def read_report(path):
    with open(os.path.join(path, 'report.json')) as f:
        return json.load(f)


def errors(log):
    return [r.getMessage() for r in log.records if r.levelname == 'ERROR']


class TestMain(unittest.TestCase):
    def test_threshold(self):
        with TempDirectory() as d:
            code = cli.main(['threshold', '--spec', THRESHOLD,
                             '--out-dir', d.path, '-q'])
            self.assertEqual(code, cli.EXIT_OK)
            report = read_report(d.path)
            self.assertAlmostEqual(report['result']['lambda_star'],
                                   0.318310, places=6)
            self.assertTrue(os.path.exists(
                os.path.join(d.path, 'thresholds.csv')))

    def test_invalid_config(self):
        with TempDirectory() as d:
            path = d.write('bad.toml', b'kind = "simulate"\nseed = -1\n')
            with LogCapture() as log:
                code = cli.main(['run', '--spec', path, '-q'])
            self.assertEqual(code, cli.EXIT_INVALID)
            messages = errors(log)
            self.assertTrue(any('seed' in m for m in messages), messages)
            self.assertTrue(any('potential' in m for m in messages), messages)

    def test_missing_config(self):
        with LogCapture() as log:
            code = cli.main(['run', '--spec',
                             os.path.join(CONFIG_DIR, 'missing.toml'), '-q'])
        self.assertEqual(code, cli.EXIT_ERROR)
        self.assertEqual(len(errors(log)), 1)

    def test_failed_check(self):
        failed = gibbsbd.ExperimentResult('threshold',
                                          checks={'improvement': False})
        with TempDirectory() as d, LogCapture() as log, \
                mock.patch('gibbsbd.cli.run_experiment',
                           return_value=failed):
            code = cli.main(['threshold', '--spec', THRESHOLD,
                             '--out-dir', d.path, '-q'])
            self.assertEqual(code, cli.EXIT_FAILED)
            self.assertFalse(read_report(d.path)['passed'])
        self.assertIn('improvement', errors(log)[0])

    def test_runtime_error(self):
        with TempDirectory() as d, LogCapture() as log, \
                mock.patch('gibbsbd.cli.run_experiment',
                           side_effect=gibbsbd.DegenerateSampler('stuck')):
            code = cli.main(['run', '--spec', THRESHOLD,
                             '--out-dir', d.path, '-q'])
        self.assertEqual(code, cli.EXIT_ERROR)
        self.assertEqual(errors(log), ['DegenerateSampler: stuck'])

    def test_singular_oracle(self):
        with TempDirectory() as d, LogCapture() as log, \
                mock.patch('gibbsbd.oracle.linalg.solve',
                           side_effect=np.linalg.LinAlgError('singular')):
            spec = d.write('oracle.toml',
                           SIMULATE.replace(b'kind = "simulate"',
                                            b'kind = "oracle"\ncells = 2'))
            code = cli.main(['run', '--spec', spec, '--out-dir', d.path,
                             '-q'])
        self.assertEqual(code, cli.EXIT_ERROR)
        self.assertTrue(errors(log)[0].startswith('OracleMismatch: '))

    def test_runs_are_reproducible(self):
        with TempDirectory() as d:
            spec = d.write('sim.toml', SIMULATE)
            outputs = []
            for name, jobs in (('one', '1'), ('two', '2')):
                out = os.path.join(d.path, name)
                code = cli.main(['simulate', '--spec', spec, '--out-dir', out,
                                 '--jobs', jobs, '-q'])
                self.assertEqual(code, cli.EXIT_OK)
                outputs.append(out)
            for name in ('counts.csv',):
                with open(os.path.join(outputs[0], name), 'rb') as f:
                    a = f.read()
                with open(os.path.join(outputs[1], name), 'rb') as f:
                    b = f.read()
                self.assertEqual(a, b)
            self.assertEqual(read_report(outputs[0])['result'],
                             read_report(outputs[1])['result'])

    def test_version(self):
        with OutputCapture() as output:
            with self.assertRaises(SystemExit) as ctx:
                cli.main(['--version'])
        self.assertEqual(ctx.exception.code, 0)
        output.compare('gibbsbd ' + gibbsbd.__version__)


class TestResolveConfig(unittest.TestCase):
    def test_overrides(self):
        args = cli.build_parser().parse_args(
            ['run', '--spec', THRESHOLD, '--seed', '11', '--format', 'json'])
        config = cli.resolve_config(args)
        self.assertEqual(config.seed, 11)
        self.assertEqual(config.output.format, 'json')
        self.assertEqual(config.kind, 'threshold')

    def test_seed_from_command_line(self):
        with TempDirectory() as d:
            spec = d.write('sim.toml', SIMULATE.replace(b'seed = 2\n', b''))
            args = cli.build_parser().parse_args(
                ['simulate', '--spec', spec, '--seed', '9'])
            config = cli.resolve_config(args)
        self.assertEqual(config.seed, 9)

    def test_command_sets_kind(self):
        with TempDirectory() as d:
            spec = d.write('sim.toml', SIMULATE)
            args = cli.build_parser().parse_args(
                ['couple', '--spec1', spec, '--t-end', '0.5'])
            config = cli.resolve_config(args)
        self.assertEqual(config.kind, 'couple')
        self.assertEqual(config.t_end, 0.5)

    def test_second_chain(self):
        with TempDirectory() as d:
            spec1 = d.write('one.toml', SIMULATE)
            spec2 = d.write('two.toml', SIMULATE + b'''
[boundary]
kind = "points"
points = [[2.2]]
''')
            args = cli.build_parser().parse_args(
                ['couple', '--spec1', spec1, '--spec2', spec2])
            config = cli.resolve_config(args)
            self.assertEqual(config.boundary.kind, 'empty')
            self.assertEqual(config.boundary2.points, [[2.2]])

            other = d.write('three.toml', SIMULATE.replace(b'0.5', b'0.25'))
            args = cli.build_parser().parse_args(
                ['couple', '--spec1', spec1, '--spec2', other])
            with self.assertRaises(gibbsbd.ValidationError) as ctx:
                cli.resolve_config(args)
        self.assertEqual([p for p, _ in ctx.exception.errors],
                         ['spec2.potential'])


if __name__ == '__main__':
    unittest.main()
