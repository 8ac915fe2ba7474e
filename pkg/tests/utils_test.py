import unittest

import numpy as np
from scipy import integrate

from nltlab.utils import (
    RunningIntegral,
    bump,
    is_power_of_two,
    periodic_distance,
    smooth_step,
)


class TestUtils(unittest.TestCase):
    def test_is_power_of_two(self):
        self.assertTrue(all(is_power_of_two(n) for n in (1, 2, 64, 4096)))
        self.assertFalse(any(is_power_of_two(n) for n in (0, -4, 3, 100)))

    def test_periodic_distance(self):
        x = np.array([0.0, 1.0, 5.0, 9.5])
        d = periodic_distance(x, 1.0, 10.0)
        np.testing.assert_allclose(d, [-1.0, 0.0, 4.0, -1.5])

    def test_bump(self):
        r = np.linspace(-1.5, 1.5, 31)
        values = bump(r)
        self.assertEqual(bump(np.array([0.0]))[0], 1.0)
        self.assertTrue(np.all(values[np.abs(r) >= 1.0] == 0.0))
        self.assertTrue(np.all(values >= 0.0))
        np.testing.assert_allclose(values, values[::-1], atol=1e-14)

    def test_smooth_step(self):
        t = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
        np.testing.assert_allclose(smooth_step(t), [0.0, 0.0, 0.5, 1.0, 1.0])
        s = np.linspace(0.0, 1.0, 101)
        self.assertTrue(np.all(np.diff(smooth_step(s)) >= 0.0))


class TestRunningIntegral(unittest.TestCase):
    def test_quadratic_is_exact(self):
        """Non-uniform samples of a quadratic integrate exactly."""
        t = np.array([0.0, 0.1, 0.25, 0.3, 0.7, 1.0])
        f = 3.0 * t**2 - t + 2.0
        integral = RunningIntegral()
        for tk, fk in zip(t, f):
            value = integral.add(tk, fk)
        self.assertAlmostEqual(value, 1.0 - 0.5 + 2.0, places=13)

    def test_two_samples_use_the_trapezoid(self):
        integral = RunningIntegral()
        integral.add(0.0, 1.0)
        self.assertEqual(integral.add(2.0, 3.0), 4.0)

    def test_repeated_time_is_ignored(self):
        integral = RunningIntegral()
        integral.add(0.0, 1.0)
        integral.add(1.0, 1.0)
        self.assertEqual(integral.add(1.0, 100.0), 1.0)

    def test_matches_simpson(self):
        t = np.linspace(0.0, 2.0, 201)
        f = np.sin(3.0 * t) * np.exp(-t)
        integral = RunningIntegral()
        for tk, fk in zip(t, f):
            integral.add(tk, fk)
        self.assertAlmostEqual(integral.value, integrate.simpson(f, x=t), places=6)

    def test_third_order(self):
        def error(n):
            t = np.linspace(0.0, 2.0, n + 1)
            integral = RunningIntegral()
            for tk in t:
                integral.add(tk, np.sin(3.0 * tk) * np.exp(-tk))
            exact = (3.0 - np.exp(-2.0) * (np.sin(6.0) + 3.0 * np.cos(6.0))) / 10.0
            return abs(integral.value - exact)

        order = np.log2(error(64) / error(128))
        self.assertGreater(order, 2.7)
        self.assertLess(order, 3.3)
