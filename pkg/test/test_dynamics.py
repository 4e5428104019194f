#!/usr/bin/env python
import math
import unittest

import numpy as np

from unit_test_setup import gibbsbd, unit_interval, kernel, rng, Z, StuckRng

INF = float('inf')


def points(*xs):
    return gibbsbd.PointConfiguration.from_points([(x,) for x in xs])


class TestSimulate(unittest.TestCase):
    def test_trajectory_shape(self):
        spec = kernel(2.0, gibbsbd.hard_sphere(1, 0.2), unit_interval())
        eta0 = points(0.1, 0.5)
        traj = gibbsbd.simulate(spec, eta0, 5.0, rng(1))
        self.assertEqual(traj.jump_times[0], 0.0)
        self.assertEqual(len(traj), len(traj.events) + 1)
        self.assertTrue(all(a < b for a, b in
                            zip(traj.jump_times, traj.jump_times[1:])))
        self.assertLessEqual(traj.jump_times[-1], 5.0)
        self.assertEqual(traj.state_at(0.0), eta0)
        phi = spec.potential
        for eta, n in zip(traj.iter_states(), traj.counts):
            self.assertEqual(eta.count, n)
            self.assertTrue(gibbsbd.is_feasible(eta, phi))
            self.assertEqual(eta.restrict(spec.region), eta)
        meta = traj.metadata
        self.assertEqual(meta['jumps'], len(traj.events))
        self.assertEqual(meta['proposals'] - meta['rejections'],
                         sum(1 for sign, _ in traj.events if sign > 0))

    def test_zero_waiting_times_are_nudged(self):
        tiny = float(np.nextafter(0.0, 1.0))
        spec = kernel(1.0, gibbsbd.zero_potential(1), unit_interval())
        traj = gibbsbd.simulate(spec, points(0.3), 10 * tiny, StuckRng())
        self.assertEqual(traj.jump_times, [k * tiny for k in range(11)])
        self.assertEqual(traj.metadata['ties'], 10)
        self.assertEqual([sign for sign, _ in traj.events],
                         [gibbsbd.dynamics.DEATH, gibbsbd.dynamics.BIRTH] * 5)

    def test_state_lookup_is_right_continuous(self):
        spec = kernel(1.0, gibbsbd.zero_potential(1), unit_interval())
        traj = gibbsbd.simulate(spec, points(0.3), 3.0, rng(2))
        states = traj.states
        for i, t in enumerate(traj.jump_times):
            self.assertEqual(gibbsbd.state_at(traj, t), states[i])
        self.assertEqual(traj.state_at(3.0), states[-1])
        self.assertRaises(gibbsbd.RangeError, lambda: traj.state_at(3.5))
        self.assertRaises(gibbsbd.RangeError, lambda: traj.count_at(-1))

    def test_seed_determinism(self):
        spec = kernel(1.5, gibbsbd.strauss(1, 0.3, 0.8), unit_interval())
        first = gibbsbd.simulate(spec, gibbsbd.EMPTY, 4.0, rng(3, 2))
        second = gibbsbd.simulate(spec, gibbsbd.EMPTY, 4.0, rng(3, 2))
        self.assertEqual(first.to_dict(), second.to_dict())

    def test_dict_round_trip(self):
        spec = kernel(1.0, gibbsbd.zero_potential(1), unit_interval())
        traj = gibbsbd.simulate(spec, points(0.3), 2.0, rng(4))
        again = gibbsbd.Trajectory.from_dict(traj.to_dict())
        self.assertEqual(again.states, traj.states)
        self.assertEqual(again.jump_times, traj.jump_times)

    def test_zero_time_horizon(self):
        spec = kernel(1.0, gibbsbd.zero_potential(1), unit_interval())
        traj = gibbsbd.simulate(spec, points(0.3), 0.0, rng(5))
        self.assertEqual(traj.events, [])
        self.assertEqual(traj.state_at(0.0), points(0.3))

    def test_empty_and_silent(self):
        spec = kernel(0.0, gibbsbd.zero_potential(1), unit_interval())
        traj = gibbsbd.simulate(spec, gibbsbd.EMPTY, 10.0, rng(6))
        self.assertEqual(len(traj), 1)

    def test_start_outside_region(self):
        spec = kernel(1.0, gibbsbd.zero_potential(1), unit_interval())
        self.assertRaises(gibbsbd.ContractViolation,
                          lambda: gibbsbd.simulate(spec, points(1.5), 1.0,
                                                   rng()))

    def test_infeasible_start(self):
        spec = kernel(1.0, gibbsbd.hard_sphere(1, 0.5), unit_interval())
        self.assertRaises(gibbsbd.ContractViolation,
                          lambda: gibbsbd.simulate(spec, points(0.1, 0.2),
                                                   1.0, rng()))

    def test_bad_horizon(self):
        spec = kernel(1.0, gibbsbd.zero_potential(1), unit_interval())
        for t_end in (-1.0, INF):
            self.assertRaises(gibbsbd.DomainError,
                              lambda: gibbsbd.simulate(spec, gibbsbd.EMPTY,
                                                       t_end, rng()))

    def test_wrong_stability_constant(self):
        phi = gibbsbd.make_custom(1, 1.0, 0.0, profile=lambda r: -1.0)
        spec = kernel(1.0, phi, unit_interval())
        self.assertRaises(gibbsbd.RateBoundViolation,
                          lambda: spec.acceptance(-1.0))
        self.assertEqual(spec.acceptance(INF), 0.0)
        self.assertEqual(spec.acceptance(0.0), 1.0)


class TestCountLaw(unittest.TestCase):
    """Without interaction the count process is M/M/infinity."""

    def counts(self, activity, eta0, t, replicas=2000, seed=10):
        spec = kernel(activity, gibbsbd.zero_potential(1), unit_interval())
        return [gibbsbd.simulate(spec, eta0, t, rng(seed, i)).count_at(t)
                for i in range(replicas)]

    def test_pure_births(self):
        counts = self.counts(2.0, gibbsbd.EMPTY, 1.0)
        mean, se = gibbsbd.mean_and_se(counts)
        self.assertLess(abs(mean - 2.0 * (1 - math.exp(-1))), Z * se)

    def test_pure_deaths(self):
        counts = self.counts(0.0, points(0.1, 0.2, 0.3, 0.4, 0.5), 1.0,
                             seed=11)
        mean, se = gibbsbd.mean_and_se(counts)
        self.assertLess(abs(mean - 5 * math.exp(-1)), Z * se)
        self.assertLessEqual(max(counts), 5)


class TestTotalRate(unittest.TestCase):
    def test_zero_potential(self):
        spec = kernel(2.0, gibbsbd.zero_potential(1), unit_interval())
        value, err = gibbsbd.total_rate(spec, points(0.1, 0.2, 0.3))
        self.assertAlmostEqual(value, 5.0)

    def test_hard_rods_blocked_space(self):
        spec = kernel(2.0, gibbsbd.hard_sphere(1, 0.5), unit_interval())
        self.assertAlmostEqual(gibbsbd.total_rate(spec, points(0.0)).value,
                               1 + 2.0 * 0.5, places=7)
        self.assertAlmostEqual(gibbsbd.total_rate(spec, points(0.5)).value,
                               1.0, places=7)

    def test_boundary_blocks_births(self):
        xi = points(1.25)
        spec = kernel(1.0, gibbsbd.hard_sphere(1, 0.5), unit_interval(), xi)
        rate = gibbsbd.total_rate(spec, gibbsbd.EMPTY)
        self.assertAlmostEqual(rate.value, 0.75, places=7)
        self.assertEqual(rate.deaths, 0)

    def test_monte_carlo_in_two_dimensions(self):
        spec = kernel(1.0, gibbsbd.zero_potential(2), unit_interval(2))
        rate = gibbsbd.total_rate(spec, gibbsbd.EMPTY, samples=1000)
        self.assertAlmostEqual(rate.value, 1.0)


if __name__ == '__main__':
    unittest.main()
