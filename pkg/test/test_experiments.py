#!/usr/bin/env python
import math
import unittest

from unit_test_setup import gibbsbd

HARD_RODS = {'kind': 'hard_sphere', 'dim': 1, 'r': 0.5}
UNIT = {'lower': [0.0], 'upper': [1.0]}


def make(kind, **data):
    data.setdefault('seed', 3)
    data['kind'] = kind
    return gibbsbd.ExperimentConfig.from_dict(data)


class TestThreshold(unittest.TestCase):
    def test_hard_disks(self):
        config = make('threshold', potential={'kind': 'hard_sphere',
                                              'dim': 2, 'r': 1.0})
        result = gibbsbd.run_experiment(config)
        self.assertAlmostEqual(result.payload['lambda_star'], 1 / math.pi,
                               places=6)
        self.assertEqual(result.checks, {'improvement': True})
        self.assertTrue(result.passed)
        header, rows = result.tables['thresholds']
        self.assertEqual(header, ('name', 'value'))
        self.assertEqual(rows[0][0], 'lambda_star')


class TestSimulate(unittest.TestCase):
    def test_poisson_counts(self):
        config = make('simulate', activity=2.0, t_end=2.0, replicas=400,
                      potential={'kind': 'zero', 'dim': 1}, region=UNIT,
                      tolerances={'alpha': 1e-4})
        result = gibbsbd.run_experiment(config)
        self.assertEqual(sorted(result.checks), ['feasible', 'poisson_counts'])
        self.assertTrue(result.passed)
        header, rows = result.tables['counts']
        self.assertEqual(len(rows), 11)
        self.assertEqual(rows[0][1:], (0.0, 0.0))
        expected = 2.0 * (1 - math.exp(-2.0))
        self.assertLess(abs(rows[-1][1] - expected), 4 * rows[-1][2] + 1e-12)
        self.assertEqual(result.snapshots, [])

    def test_hard_rods_stay_feasible(self):
        config = make('simulate', activity=3.0, t_end=1.0, replicas=20,
                      times=[0.0, 0.5, 1.0], potential=HARD_RODS,
                      region={'lower': [0.0], 'upper': [3.0]},
                      initial=[[0.25], [1.0]], output={'snapshots': True})
        result = gibbsbd.run_experiment(config)
        self.assertEqual(result.checks, {'feasible': True})
        self.assertEqual(len(result.tables['counts'][1]), 3)
        self.assertEqual(result.tables['counts'][1][0][1], 2.0)
        self.assertEqual(len(result.snapshots), 20)
        self.assertEqual(result.snapshots[4]['replica'], 4)

    def test_activity_fraction(self):
        config = make('simulate', activity_fraction=0.5, t_end=0.5,
                      replicas=2, potential={'kind': 'hard_sphere', 'dim': 1,
                                             'r': 1.0},
                      region=UNIT)
        result = gibbsbd.run_experiment(config)
        self.assertAlmostEqual(result.payload['spec']['activity'], 0.25,
                               places=6)

    def test_times_past_horizon(self):
        config = make('simulate', activity=1.0, t_end=1.0, replicas=2,
                      times=[0.5, 2.0], potential=HARD_RODS, region=UNIT)
        self.assertRaises(gibbsbd.DomainError,
                          lambda: gibbsbd.run_experiment(config))

    def test_reproducible(self):
        config = make('simulate', activity=1.0, t_end=1.0, replicas=10,
                      potential=HARD_RODS, region=UNIT)
        a = gibbsbd.run_experiment(config)
        b = gibbsbd.run_experiment(config.with_overrides(jobs=2))
        self.assertEqual(a.tables, b.tables)
        self.assertEqual(a.payload, b.payload)


class TestCouple(unittest.TestCase):
    def test_shared_boundary(self):
        config = make('couple', activity=0.5, t_end=3.0, replicas=200,
                      potential=HARD_RODS,
                      region={'lower': [0.0], 'upper': [2.0]},
                      initial2=[[0.5], [1.5]],
                      tolerances={'z': 4.0, 'alpha': 1e-4})
        result = gibbsbd.run_experiment(config)
        self.assertEqual(sorted(result.checks),
                         ['absorption', 'contraction', 'marginal_chain1',
                          'marginal_chain2'])
        self.assertTrue(result.passed, result.failures)
        self.assertAlmostEqual(result.payload['delta'], 0.5, places=6)
        self.assertEqual(result.payload['absorption_violations'], 0)
        header, rows = result.tables['disagreement']
        self.assertEqual(rows[0][1], 2.0)
        self.assertEqual(rows[0][4], 2.0)
        self.assertEqual(len(result.tables['tv'][1]), 11)

    def test_bound_starts_from_initial_pair(self):
        config = make('couple', activity=0.5, t_end=3.0, replicas=50,
                      times=[1.0, 2.0, 3.0], potential=HARD_RODS,
                      region={'lower': [0.0], 'upper': [2.0]},
                      initial2=[[0.5], [1.5]],
                      tolerances={'z': 4.0, 'alpha': 1e-6})
        result = gibbsbd.run_experiment(config)
        self.assertEqual(result.payload['initial_disagreement'], 2.0)
        delta = result.payload['delta']
        header, rows = result.tables['disagreement']
        self.assertEqual([r[0] for r in rows], [1.0, 2.0, 3.0])
        for t, _, _, _, bound in rows:
            self.assertAlmostEqual(bound, 2.0 * math.exp(-delta * t))
        self.assertTrue(result.checks['contraction'])

    def test_different_boundaries_skip_absorption(self):
        config = make('couple', activity=0.5, t_end=1.0, replicas=30,
                      potential=HARD_RODS,
                      region={'lower': [0.0], 'upper': [2.0]},
                      boundary2={'kind': 'points', 'points': [[2.3]]},
                      tolerances={'alpha': 1e-6})
        result = gibbsbd.run_experiment(config)
        self.assertFalse(result.payload['same_boundary'])
        self.assertEqual(sorted(result.checks),
                         ['marginal_chain1', 'marginal_chain2'])


class TestPartition(unittest.TestCase):
    def test_no_interaction(self):
        config = make('partition', activity=1.0, region=UNIT,
                      potential={'kind': 'zero', 'dim': 1})
        result = gibbsbd.run_experiment(config)
        payload = result.payload
        self.assertLessEqual(abs(payload['estimate'] - math.e),
                             payload['error_bound'] + 1e-12)
        self.assertEqual(result.checks, {})
        self.assertIn('terms', result.tables)


class TestOracle(unittest.TestCase):
    def test_tables(self):
        config = make('oracle', activity=0.5, cells=4, potential=HARD_RODS,
                      region=UNIT)
        result = gibbsbd.run_experiment(config)
        self.assertEqual(result.checks, {})
        header, rows = result.tables['stationary']
        self.assertEqual(header, ('state', 'pi', 'gibbs'))
        self.assertAlmostEqual(sum(r[1] for r in rows), 1.0)
        for _, pi, gibbs in rows:
            self.assertAlmostEqual(pi, gibbs, places=8)
        self.assertEqual(rows[0][0], '0 0 0 0')
        self.assertNotIn('coalescence', result.tables)

    def test_simulated_comparison(self):
        config = make('oracle', activity=0.5, cells=2, t_end=10.0,
                      replicas=8000, potential=HARD_RODS, region=UNIT,
                      boundary2={'kind': 'points', 'points': [[1.2]]},
                      tolerances={'z': 4.0})
        result = gibbsbd.run_experiment(config)
        self.assertEqual(sorted(result.checks),
                         ['detailed_balance', 'oracle_tv'])
        self.assertTrue(result.passed, result.failures)
        self.assertEqual(result.payload['comparison']['samples'], 8000)
        balance = result.payload['detailed_balance']
        self.assertEqual(balance['burn_in'], 5.0)
        self.assertGreater(balance['jumps'], 1000)
        header, rows = result.tables['flux']
        self.assertEqual(header[:2], ('from', 'to'))
        self.assertIn(('0 0', '1 0'), [r[:2] for r in rows])
        header, rows = result.tables['coalescence']
        self.assertEqual(rows[0][0], 0.0)
        self.assertAlmostEqual(rows[0][1], 1.0)


class TestGNZ(unittest.TestCase):
    def test_identity(self):
        config = make('gnz-check', activity=0.5, replicas=3, samples=300,
                      potential=HARD_RODS,
                      region={'lower': [0.0], 'upper': [2.0]},
                      tolerances={'z': 4.0})
        result = gibbsbd.run_experiment(config)
        self.assertEqual(result.payload['allowed_failures'], 0)
        self.assertEqual(result.checks, {'gnz_identity': True})
        self.assertEqual(len(result.tables['gnz'][1]), 3)


class TestPercolate(unittest.TestCase):
    def test_ordered_hitting(self):
        config = make('percolate', activity=0.2, t_end=0.5, replicas=200,
                      potential={'kind': 'hard_sphere', 'dim': 1, 'r': 1.0},
                      boundary_pair='saturated',
                      grid={'n': 3, 'm': 0, 'chain': [3, 2, 1],
                            't_values': [0.5]},
                      tolerances={'z': 4.0})
        result = gibbsbd.run_experiment(config)
        self.assertEqual(sorted(result.checks),
                         ['ceiling', 'locality', 'ordered_hitting_t0.5'])
        self.assertTrue(result.passed, result.failures)
        self.assertEqual(result.payload['boundary_counts'], [0, 2])
        self.assertEqual(len(result.tables['ordered_hitting'][1]), 1)

    def test_time_defaults_to_window_midpoint(self):
        config = make('percolate', activity=0.2, replicas=20,
                      potential={'kind': 'hard_sphere', 'dim': 1, 'r': 1.0},
                      boundary_pair='saturated', grid={'n': 3, 'm': 0})
        result = gibbsbd.run_experiment(config)
        window = gibbsbd.percolation_window(3, 0, 1, 1.0, 0.2, 0.0)
        self.assertAlmostEqual(window, 3 / (math.e ** 2 * 3 * 0.2))
        self.assertAlmostEqual(result.payload['window'], window)
        self.assertAlmostEqual(result.payload['t'], window / 2)
        self.assertTrue(result.payload['in_window'])


class TestSpatialMixing(unittest.TestCase):
    def test_rows(self):
        config = make('spatial-mixing', activity=0.1, replicas=100,
                      potential={'kind': 'hard_sphere', 'dim': 1, 'r': 1.0},
                      boundary_pair='single_point',
                      grid={'k': 0, 'n_values': [1, 2]},
                      tolerances={'z': 4.0})
        result = gibbsbd.run_experiment(config)
        self.assertEqual(sorted(result.checks), ['decay', 'monotone'])
        header, rows = result.tables['spatial_mixing']
        self.assertEqual([r[0] for r in rows], [1, 2])
        self.assertEqual(len(header), len(rows[0]))


class TestResult(unittest.TestCase):
    def test_failures(self):
        result = gibbsbd.ExperimentResult('simulate', checks={'b': False,
                                                              'a': True})
        self.assertFalse(result.passed)
        self.assertEqual(result.failures, ['b'])
        self.assertEqual(result.to_dict()['passed'], False)
        self.assertTrue(gibbsbd.ExperimentResult('oracle').passed)


if __name__ == '__main__':
    unittest.main()
