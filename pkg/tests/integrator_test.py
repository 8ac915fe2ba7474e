import math
import unittest

import numpy as np
import pytest

from nltlab.errors import NltError
from nltlab.integrator import (
    RunStatus,
    Stepper,
    StepperConfig,
    blowup_indicator,
    cfl_dt,
    integrate,
    spectral_tail_fraction,
)
from nltlab.models import ModelSpec, rhs
from nltlab.spectral import Grid, SpectralField, lp_norm


def exact_solution(grid, t):
    return SpectralField.from_function(grid, lambda x: np.exp(np.sin(x - t)))


def manufactured_forcing(spec):
    """Source term that makes exp(sin(x - t)) an exact solution."""

    def forcing(t):
        theta = exact_solution(spec.grid, t)
        theta_t = SpectralField.from_function(
            spec.grid, lambda x: -np.cos(x - t) * np.exp(np.sin(x - t))
        )
        return theta_t - rhs(theta, spec)

    return forcing


class TestIndicators(unittest.TestCase):
    def setUp(self):
        self.grid = Grid(64)
        self.spec = ModelSpec(grid=self.grid)

    def test_blowup_indicator_of_cosine(self):
        theta = SpectralField.from_function(self.grid, np.cos)
        indicator = blowup_indicator(theta, self.spec)
        self.assertAlmostEqual(indicator.theta_x_inf, 1.0, places=12)
        self.assertAlmostEqual(indicator.u_x_inf, 1.0, places=12)
        self.assertAlmostEqual(indicator.total, 2.0, places=12)
        self.assertAlmostEqual(indicator.tail_fraction, 0.0, places=20)

    def test_tail_fraction(self):
        self.assertEqual(spectral_tail_fraction(SpectralField.zeros(self.grid)), 0.0)
        high = SpectralField.from_function(self.grid, lambda x: np.cos(30 * x))
        self.assertAlmostEqual(spectral_tail_fraction(high), 1.0, places=12)

    def test_cfl(self):
        theta = SpectralField.from_function(self.grid, lambda x: 2.0 * np.cos(x))
        dt = cfl_dt(theta, self.spec, safety=0.5, dt_max=None)
        self.assertAlmostEqual(dt, 0.5 * self.grid.dx / 2.0, places=12)
        self.assertEqual(cfl_dt(theta, self.spec, dt_max=1e-3), 1e-3)
        still = self.spec.with_params(transport=False)
        self.assertEqual(cfl_dt(theta, still, dt_max=0.25), 0.25)


class TestLinearFlow(unittest.TestCase):
    def test_exact_decay(self):
        """Without transport each mode decays like exp(-(nu |k|^gamma + eps k^2) t)."""
        grid = Grid(32)
        spec = ModelSpec(nu=1.0, gamma=1.0, epsilon=0.01, transport=False, grid=grid)
        theta0 = SpectralField.from_function(grid, lambda x: np.sin(3 * x))
        config = StepperConfig(dt=0.05, dt_max=0.05, adaptive=False)
        state = integrate(theta0, spec, 1.0, config)
        self.assertEqual(state.status, RunStatus.FINISHED)
        self.assertAlmostEqual(state.t, 1.0, places=12)
        expected = math.exp(-3.09 * state.t) * np.sin(3 * grid.x)
        np.testing.assert_allclose(state.theta.physical, expected, atol=1e-12)

    def test_horizon_clipping(self):
        grid = Grid(16)
        spec = ModelSpec(nu=1.0, transport=False, grid=grid)
        theta0 = SpectralField.from_function(grid, np.cos)
        config = StepperConfig(dt=0.01, adaptive=False)
        state = integrate(theta0, spec, 0.025, config)
        self.assertEqual(state.status, RunStatus.FINISHED)
        self.assertEqual(state.step_count, 3)
        self.assertAlmostEqual(state.t, 0.025, places=14)


class TestAccuracy(unittest.TestCase):
    def _error(self, spec, dt, horizon):
        config = StepperConfig(dt=dt, dt_max=1.0, safety=1.0, adaptive=False)
        stepper = Stepper(spec, config, manufactured_forcing(spec), horizon)
        state = stepper.run(exact_solution(spec.grid, 0.0))
        self.assertEqual(state.status, RunStatus.FINISHED)
        return lp_norm(state.theta - exact_solution(spec.grid, state.t), np.inf)

    def test_fourth_order(self):
        spec = ModelSpec(nu=0.5, gamma=1.0, epsilon=0.01, grid=Grid(64))
        coarse = self._error(spec, 0.04, 0.4)
        fine = self._error(spec, 0.02, 0.4)
        self.assertLess(fine, 1e-5)
        self.assertGreaterEqual(math.log2(coarse / fine), 3.8)


class TestStepControl(unittest.TestCase):
    def setUp(self):
        self.grid = Grid(64)
        self.spec = ModelSpec(grid=self.grid)
        self.theta0 = SpectralField.from_function(self.grid, lambda x: 1.0 + 0.5 * np.cos(x))

    def test_reruns_are_bit_identical(self):
        a = integrate(self.theta0, self.spec, 0.3)
        b = integrate(self.theta0, self.spec, 0.3)
        self.assertEqual(a.step_count, b.step_count)
        np.testing.assert_array_equal(a.theta.physical, b.theta.physical)

    def test_split_run_matches_single_run(self):
        config = StepperConfig(dt=0.01, adaptive=False)
        stepper = Stepper(self.spec, config, horizon=0.2)
        whole = stepper.run(self.theta0)
        first = stepper.run(self.theta0, max_steps=7)
        self.assertEqual(first.status, RunStatus.RUNNING)
        self.assertEqual(first.step_count, 7)
        second = stepper.run(first.theta, t0=first.t)
        self.assertEqual(second.status, RunStatus.FINISHED)
        self.assertEqual(second.t, whole.t)
        np.testing.assert_array_equal(second.theta.physical, whole.theta.physical)

    def test_rejection_shrinks_the_step(self):
        stepper = Stepper(self.spec, StepperConfig(dt=1.0, dt_max=1.0, adaptive=False))
        state = stepper.initial_state(self.theta0)
        new = stepper.step(state)
        self.assertFalse(new.accepted)
        self.assertEqual(new.rejections, 1)
        self.assertEqual(new.t, 0.0)
        self.assertAlmostEqual(new.dt, stepper.cfl(self.theta0))

    def test_resolution_lost(self):
        state = Stepper(self.spec, StepperConfig(dt_min=1.0)).run(self.theta0)
        self.assertEqual(state.status, RunStatus.RESOLUTION_LOST)
        self.assertEqual(state.step_count, 0)

    def test_blowup_detection(self):
        rng = np.random.default_rng(0)
        theta0 = SpectralField.from_physical(self.grid, rng.standard_normal(self.grid.n))
        config = StepperConfig(blowup_threshold=0.0, tail_threshold=0.0)
        state = Stepper(self.spec, config, horizon=1.0).run(theta0)
        self.assertEqual(state.status, RunStatus.BLOWUP_DETECTED)
        self.assertEqual(state.step_count, 1)
        self.assertGreater(state.indicator.integral, 0.0)

    def test_terminal_states(self):
        stepper = Stepper(self.spec, horizon=0.05)
        state = stepper.run(self.theta0)
        self.assertEqual(state.status, RunStatus.FINISHED)
        self.assertTrue(state.status.is_terminal)
        with pytest.raises(NltError):
            stepper.step(state)
        with pytest.raises(NltError):
            state.with_status(RunStatus.RUNNING)
        self.assertIs(state.with_status(RunStatus.FINISHED).status, RunStatus.FINISHED)

    def test_on_step_callback(self):
        times = []
        config = StepperConfig(dt=0.01, adaptive=False)
        Stepper(self.spec, config, horizon=0.05).run(
            self.theta0, on_step=lambda s: times.append(s.t)
        )
        self.assertEqual(len(times), 6)
        self.assertEqual(times[0], 0.0)
        self.assertTrue(all(np.diff(times) > 0.0))
