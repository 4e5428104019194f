#!/usr/bin/env python
import math
import unittest

import numpy as np

from unit_test_setup import gibbsbd

INF = float('inf')


class TestBuiltins(unittest.TestCase):
    def test_hard_sphere(self):
        phi = gibbsbd.hard_sphere(1, 0.5)
        self.assertEqual(phi.local_stability, 0.0)
        self.assertEqual(phi.range, 0.5)
        self.assertEqual(phi.evaluate([0.0], [0.3]), INF)
        self.assertEqual(phi.evaluate([0.0], [0.5]), 0.0)
        self.assertEqual(phi.core_radius, 0.5)

    def test_strauss(self):
        phi = gibbsbd.strauss(2, 1.0, 1.5)
        self.assertEqual((phi.local_stability, phi.range), (0.0, 1.0))
        self.assertEqual(phi.evaluate([0, 0], [0.6, 0.6]), 1.5)
        self.assertIsNone(phi.core_radius)

    def test_square_well(self):
        phi = gibbsbd.square_well(1, 0.5, 1.0, 0.2, 0.4)
        self.assertEqual(phi.local_stability, 0.4)
        self.assertEqual(phi.evaluate([0.0], [0.25]), INF)
        self.assertAlmostEqual(phi.evaluate([0.0], [0.75]), -0.2)
        self.assertEqual(phi.evaluate([0.0], [1.0]), 0.0)
        self.assertEqual(phi.breakpoints, (0.5,))

    def test_square_well_needs_packing_bound(self):
        self.assertEqual(gibbsbd.packing_bound(1, 0.5, 1.0), 2)
        with self.assertRaises(gibbsbd.ValidationError) as ctx:
            gibbsbd.square_well(1, 0.5, 1.0, 0.2, 0.3)
        self.assertEqual([p for p, _ in ctx.exception.errors], ['L_bound'])

    def test_zero(self):
        phi = gibbsbd.zero_potential(3)
        self.assertEqual((phi.range, phi.local_stability), (0.0, 0.0))
        self.assertEqual(phi.evaluate([0, 0, 0], [0, 0, 0]), 0.0)

    def test_all_errors_reported_together(self):
        with self.assertRaises(gibbsbd.ValidationError) as ctx:
            gibbsbd.make_builtin('square_well', 1, r0=1.0, R=0.5, a=-1.0,
                                 L_bound=0.0)
        paths = sorted(p for p, _ in ctx.exception.errors)
        self.assertEqual(paths, ['R', 'a'])

    def test_unknown_and_missing_params(self):
        self.assertRaises(gibbsbd.InvalidFieldValue,
                          lambda: gibbsbd.make_builtin('lennard_jones'))
        with self.assertRaises(gibbsbd.ValidationError) as ctx:
            gibbsbd.make_builtin('strauss', 1, r=1.0, gamma=2.0)
        self.assertEqual(sorted(p for p, _ in ctx.exception.errors),
                         ['beta', 'gamma'])

    def test_symmetric_and_bounded_range(self):
        rng = np.random.default_rng(0)
        for phi in (gibbsbd.hard_sphere(2, 0.5), gibbsbd.strauss(2, 1.0, 1.0),
                    gibbsbd.square_well(2, 0.3, 0.6, 0.1, 5.0)):
            for _ in range(200):
                x, y = rng.uniform(-1, 1, size=(2, 2))
                self.assertEqual(phi.evaluate(x, y), phi.evaluate(y, x))
                if np.linalg.norm(x - y) >= phi.range:
                    self.assertEqual(phi.evaluate(x, y), 0.0)

    def test_vectorized_energies(self):
        phi = gibbsbd.strauss(1, 1.0, 2.0)
        pts = np.array([[0.0], [0.5], [3.0]])
        self.assertEqual(phi.pair_energy(pts), 2.0)
        self.assertEqual(phi.influence([0.2], pts), 4.0)
        self.assertEqual(phi.cross_energy(pts, [[2.5]]), 2.0)
        self.assertEqual(phi.influence([0.2], np.zeros((0, 1))), 0.0)


class TestCustomAndScaled(unittest.TestCase):
    def test_custom_needs_one_callable(self):
        self.assertRaises(gibbsbd.DomainError,
                          lambda: gibbsbd.make_custom(1, 1.0, 0.0))

    def test_custom_profile(self):
        phi = gibbsbd.make_custom(1, 1.0, 0.0, profile=lambda r: 1.0 - r)
        self.assertFalse(phi.certified)
        self.assertAlmostEqual(phi.evaluate([0.0], [0.25]), 0.75)
        self.assertEqual(phi.evaluate([0.0], [1.5]), 0.0)

    def test_custom_rejects_negative_infinity(self):
        phi = gibbsbd.make_custom(1, 1.0, 0.0, profile=lambda r: -INF)
        self.assertRaises(gibbsbd.DomainError,
                          lambda: phi.evaluate([0.0], [0.5]))

    def test_scale_keeps_hard_cores(self):
        phi = gibbsbd.scale_potential(
            gibbsbd.square_well(1, 0.5, 1.0, 0.2, 0.4), 2.0)
        self.assertAlmostEqual(phi.local_stability, 0.8)
        self.assertEqual(phi.evaluate([0.0], [0.1]), INF)
        self.assertAlmostEqual(phi.evaluate([0.0], [0.75]), -0.4)
        self.assertEqual(phi.range, 1.0)


class TestTemperedness(unittest.TestCase):
    def test_hard_sphere_1d(self):
        est = gibbsbd.weak_temperedness_constant(gibbsbd.hard_sphere(1, 0.5))
        self.assertAlmostEqual(est.c_hat, 1.0, places=9)
        self.assertEqual(est.method, 'quadrature')

    def test_strauss_1d(self):
        est = gibbsbd.weak_temperedness_constant(
            gibbsbd.strauss(1, 1.0, 1.0))
        self.assertAlmostEqual(est.c_hat, 2 * (1 - math.exp(-1)), places=6)
        self.assertAlmostEqual(est.c_hat, est.c_full, places=9)

    def test_square_well_1d(self):
        est = gibbsbd.weak_temperedness_constant(
            gibbsbd.square_well(1, 0.5, 1.0, 0.2, 0.4))
        self.assertAlmostEqual(est.c_hat, 1 + (1 - math.exp(-0.2)), places=6)
        self.assertAlmostEqual(est.c_full, 1 + (math.exp(0.2) - 1), places=6)
        self.assertLessEqual(est.c_hat, est.c_full + est.abs_error)

    def test_square_well_monotone_in_depth(self):
        previous = None
        for a in (0.05, 0.1, 0.2, 0.4):
            phi = gibbsbd.square_well(2, 0.5, 1.0, a, a * 20)
            est = gibbsbd.weak_temperedness_constant(phi)
            lam = gibbsbd.uniqueness_threshold(phi, est)
            if previous is not None:
                self.assertGreater(est.c_hat, previous[0])
                self.assertLess(lam, previous[1])
            previous = (est.c_hat, lam)

    def test_monte_carlo_fallback(self):
        phi = gibbsbd.make_custom(
            1, 0.5, 0.0,
            evaluate=lambda x, y: INF if abs(x[0] - y[0]) < 0.5 else 0.0)
        self.assertRaises(gibbsbd.DomainError,
                          lambda: gibbsbd.weak_temperedness_constant(phi))
        est = gibbsbd.weak_temperedness_constant(
            phi, centers=[[0.0]], samples=20000)
        self.assertEqual(est.method, 'monte_carlo')
        self.assertAlmostEqual(est.c_hat, 1.0, places=9)


class TestThresholds(unittest.TestCase):
    def test_hard_sphere_2d(self):
        phi = gibbsbd.hard_sphere(2, 1.0)
        est = gibbsbd.weak_temperedness_constant(phi)
        self.assertAlmostEqual(gibbsbd.uniqueness_threshold(phi, est),
                               1 / math.pi, delta=1e-6)
        self.assertAlmostEqual(gibbsbd.penrose_ruelle_threshold(phi, est),
                               1 / (math.e * math.pi), delta=1e-6)

    def test_strauss_1d(self):
        phi = gibbsbd.strauss(1, 1.0, 1.0)
        est = gibbsbd.weak_temperedness_constant(phi)
        self.assertAlmostEqual(gibbsbd.uniqueness_threshold(phi, est),
                               1 / (2 * (1 - math.exp(-1))), delta=1e-6)
        self.assertAlmostEqual(gibbsbd.penrose_ruelle_threshold(phi, est),
                               0.290988, delta=1e-6)

    def test_zero_potential_sentinels(self):
        report = gibbsbd.threshold_report(gibbsbd.zero_potential(2))
        self.assertEqual(report['lambda_star'], INF)
        self.assertEqual(report['lambda_penrose_ruelle'], INF)
        self.assertIsNone(report['improvement_ratio'])

    def test_improvement_ratio(self):
        for phi in (gibbsbd.hard_sphere(1, 0.5), gibbsbd.hard_sphere(3, 1.0),
                    gibbsbd.strauss(2, 1.0, 0.7)):
            report = gibbsbd.threshold_report(phi)
            self.assertGreaterEqual(report['improvement_ratio'],
                                    math.e - 1e-6)
        report = gibbsbd.threshold_report(
            gibbsbd.square_well(1, 0.5, 1.0, 0.2, 0.4))
        self.assertGreater(report['improvement_ratio'], math.e)

    def test_report_fields(self):
        report = gibbsbd.threshold_report(gibbsbd.hard_sphere(2, 1.0))
        for key in ('c_hat', 'c_full', 'abs_error', 'attractive_mass',
                    'lambda_star', 'lambda_penrose_ruelle',
                    'lambda_cluster_expansion', 'lambda_analyticity',
                    'local_stability_certified'):
            self.assertIn(key, report)
        self.assertTrue(report['local_stability_certified'])
        # without attraction the analyticity bound is e^2 / (e C)
        self.assertAlmostEqual(report['lambda_analyticity'],
                               math.e / math.pi, places=6)


if __name__ == '__main__':
    unittest.main()
