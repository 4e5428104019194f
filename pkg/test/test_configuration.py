#!/usr/bin/env python
import unittest

import numpy as np

from unit_test_setup import gibbsbd

INF = float('inf')

a, b, c = (0.1,), (0.4,), (0.9,)


def config(**named):
    locs = {'a': a, 'b': b, 'c': c}
    return gibbsbd.PointConfiguration(
        [(locs[k], m) for k, m in named.items()])


def random_config(rng, size, support):
    idx = rng.integers(0, len(support), size=size)
    return gibbsbd.PointConfiguration.from_points([support[i] for i in idx])


class TestAlgebra(unittest.TestCase):
    eta = config(a=2, b=1)
    xi = config(a=1, c=1)

    def test_examples(self):
        self.assertEqual(gibbsbd.intersect(self.eta, self.xi), config(a=1))
        self.assertEqual(gibbsbd.union(self.eta, self.xi),
                         config(a=2, b=1, c=1))
        self.assertEqual(gibbsbd.subtract(self.eta, self.xi),
                         config(a=1, b=1))
        self.assertEqual(gibbsbd.sym_diff(self.eta, self.xi),
                         config(a=1, b=1, c=1))
        self.assertEqual(gibbsbd.sym_diff(self.eta, self.eta), gibbsbd.EMPTY)

    def test_identities_on_random_configurations(self):
        rng = np.random.default_rng(5)
        support = [(x,) for x in np.linspace(0, 1, 6).tolist()]
        for _ in range(100):
            eta = random_config(rng, rng.integers(0, 8), support)
            xi = random_config(rng, rng.integers(0, 8), support)
            inter = gibbsbd.intersect(eta, xi)
            self.assertEqual(gibbsbd.union(eta, xi),
                             gibbsbd.sym_diff(eta, xi) + inter)
            self.assertEqual(eta, gibbsbd.subtract(eta, xi) + inter)
            self.assertEqual(gibbsbd.sym_diff(eta, xi),
                             gibbsbd.sym_diff(xi, eta))
            self.assertTrue(inter <= eta and inter <= xi)

    def test_sym_diff_bounds_box_discrepancy(self):
        rng = np.random.default_rng(6)
        support = [(x,) for x in np.linspace(0, 1, 5).tolist()]
        for _ in range(30):
            eta = random_config(rng, 5, support)
            xi = random_config(rng, 5, support)
            diff = gibbsbd.sym_diff(eta, xi).count
            best = 0
            for lo in range(5):
                for hi in range(lo, 5):
                    box = gibbsbd.BoxRegion([support[lo][0] - 0.01],
                                            [support[hi][0] + 0.01])
                    best = max(best, abs(eta.count_in(box) - xi.count_in(box)))
            self.assertLessEqual(best, diff)
            plus = gibbsbd.subtract(eta, xi).count
            minus = gibbsbd.subtract(xi, eta).count
            self.assertEqual(diff, plus + minus)

    def test_restrict(self):
        eta = gibbsbd.PointConfiguration.from_points([(0.5,), (2.0,)])
        unit = gibbsbd.BoxRegion([0], [1])
        self.assertEqual(gibbsbd.restrict(eta, unit),
                         gibbsbd.PointConfiguration.from_points([(0.5,)]))
        self.assertEqual(gibbsbd.restrict(gibbsbd.EMPTY, unit), gibbsbd.EMPTY)
        once = eta.restrict(unit)
        self.assertEqual(once.restrict(unit), once)

    def test_add_remove(self):
        eta = config(a=1).add_point(b)
        self.assertEqual(eta, config(a=1, b=1))
        self.assertEqual(eta.remove_point(b), config(a=1))
        self.assertRaises(gibbsbd.ContractViolation,
                          lambda: eta.remove_point(c))

    def test_invalid_atoms(self):
        self.assertRaises(gibbsbd.DomainError,
                          lambda: gibbsbd.PointConfiguration([(a, -1)]))
        self.assertRaises(gibbsbd.DomainError,
                          lambda: gibbsbd.PointConfiguration(
                              [(a, 1), ((0.1, 0.2), 1)]))

    def test_json_round_trip(self):
        eta = config(a=2, c=1)
        self.assertEqual(eta.to_list(), [{'coords': [0.1], 'mult': 2},
                                         {'coords': [0.9], 'mult': 1}])
        self.assertEqual(gibbsbd.PointConfiguration.from_json(eta.to_json()),
                         eta)

    def test_as_array(self):
        eta = config(a=2)
        self.assertEqual(eta.as_array().tolist(), [[0.1], [0.1]])
        self.assertEqual(gibbsbd.EMPTY.as_array(2).shape, (0, 2))


class TestEnergy(unittest.TestCase):
    def test_empty(self):
        phi = gibbsbd.strauss(1, 1.0, 1.0)
        self.assertEqual(gibbsbd.energy(gibbsbd.EMPTY, phi), 0.0)
        self.assertEqual(gibbsbd.influence((0.0,), gibbsbd.EMPTY, phi), 0.0)

    def test_hard_core_overlap(self):
        phi = gibbsbd.hard_sphere(1, 0.5)
        eta = gibbsbd.PointConfiguration.from_points([(0.0,), (0.3,)])
        self.assertEqual(gibbsbd.energy(eta, phi), INF)
        self.assertEqual(gibbsbd.influence((0.1,), config(a=1), phi), INF)
        self.assertFalse(gibbsbd.is_feasible(eta, phi))
        self.assertFalse(gibbsbd.is_feasible(config(a=2), phi))
        self.assertTrue(gibbsbd.is_feasible(gibbsbd.EMPTY, phi))

    def test_strauss_three_points(self):
        phi = gibbsbd.strauss(1, 1.0, 1.0)
        eta = gibbsbd.PointConfiguration.from_points([(0.0,), (0.5,), (0.9,)])
        self.assertEqual(gibbsbd.energy(eta, phi), 3.0)

    def test_multiplicity_self_pairs(self):
        phi = gibbsbd.strauss(1, 1.0, 1.0)
        self.assertEqual(gibbsbd.energy(config(a=3), phi), 3.0)

    def test_incremental_identity(self):
        rng = np.random.default_rng(7)
        phi = gibbsbd.square_well(1, 0.2, 0.5, 0.3, 1.0)
        for _ in range(50):
            pts = (rng.random((4, 1)) * 3).tolist()
            eta = gibbsbd.PointConfiguration.from_points(pts)
            x = tuple((rng.random(1) * 3).tolist())
            before = gibbsbd.energy(eta, phi)
            after = gibbsbd.energy(eta.add_point(x), phi)
            w = gibbsbd.influence(x, eta, phi)
            if INF in (before, w):
                self.assertEqual(after, INF)
            else:
                self.assertAlmostEqual(after, before + w)

    def test_influence_bounded_below(self):
        rng = np.random.default_rng(8)
        phi = gibbsbd.square_well(1, 0.5, 1.0, 0.2, 0.4)
        for _ in range(300):
            pts = (rng.random((rng.integers(1, 6), 1)) * 3).tolist()
            eta = gibbsbd.PointConfiguration.from_points(pts)
            if not gibbsbd.is_feasible(eta, phi):
                continue
            x = tuple((rng.random(1) * 3).tolist())
            self.assertGreaterEqual(gibbsbd.influence(x, eta, phi),
                                    -phi.local_stability - 1e-12)
            self.assertGreaterEqual(gibbsbd.energy(eta, phi),
                                    -phi.local_stability / 2 * eta.count
                                    - 1e-12)


class TestConditionalEnergy(unittest.TestCase):
    unit = gibbsbd.BoxRegion([0], [1])
    phi = gibbsbd.strauss(1, 1.0, 1.0)

    def test_empty_inside(self):
        xi = gibbsbd.PointConfiguration.from_points([(1.5,)])
        self.assertEqual(gibbsbd.conditional_energy(
            gibbsbd.EMPTY, xi, self.unit, self.phi), 0.0)

    def test_no_boundary(self):
        eta = gibbsbd.PointConfiguration.from_points([(0.1,), (0.6,)])
        self.assertEqual(
            gibbsbd.conditional_energy(eta, gibbsbd.EMPTY, self.unit,
                                       self.phi),
            gibbsbd.energy(eta, self.phi))

    def test_cross_pair(self):
        eta = gibbsbd.PointConfiguration.from_points([(0.8,)])
        xi = gibbsbd.PointConfiguration.from_points([(1.5,)])
        self.assertEqual(gibbsbd.conditional_energy(eta, xi, self.unit,
                                                    self.phi), 1.0)

    def test_point_addition_identity(self):
        xi = gibbsbd.PointConfiguration.from_points([(1.5,), (-0.3,)])
        eta = gibbsbd.PointConfiguration.from_points([(0.2,), (0.9,)])
        x = (0.55,)
        lhs = gibbsbd.conditional_energy(eta.add_point(x), xi, self.unit,
                                         self.phi)
        rhs = gibbsbd.conditional_energy(eta, xi, self.unit, self.phi) + \
            gibbsbd.influence(x, eta + xi, self.phi)
        self.assertAlmostEqual(lhs, rhs)

    def test_support_outside_region(self):
        eta = gibbsbd.PointConfiguration.from_points([(1.2,)])
        self.assertRaises(gibbsbd.ContractViolation,
                          lambda: gibbsbd.conditional_energy(
                              eta, gibbsbd.EMPTY, self.unit, self.phi))

    def test_stability_lower_bound(self):
        rng = np.random.default_rng(9)
        phi = gibbsbd.square_well(1, 0.5, 1.0, 0.2, 0.4)
        xi = gibbsbd.PointConfiguration.from_points([(-0.6,), (1.7,)])
        for _ in range(200):
            eta = gibbsbd.PointConfiguration.from_points(
                rng.random((rng.integers(1, 4), 1)).tolist())
            h = gibbsbd.conditional_energy(eta, xi, self.unit, phi)
            if h < INF:
                self.assertGreaterEqual(
                    h, -1.5 * phi.local_stability * eta.count - 1e-12)


if __name__ == '__main__':
    unittest.main()
