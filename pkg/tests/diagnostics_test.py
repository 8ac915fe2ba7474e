import math
import unittest

from hypothesis import given, settings
from hypothesis import strategies as st
import numpy as np
import pytest

from nltlab.diagnostics import (
    BesovTrajectory,
    DiagnosticsEngine,
    SpaceTimeBump,
    Trajectory,
    a_priori_bound_check,
    energy_identity_residual,
    h1_energy_identity_residual,
    h2_growth_check,
    h_half_energy_residual,
    l1_budget_residual,
    l1_identity_residual,
    l2_energy_residual,
    max_principle_monitor,
    model2_l1_budget,
    model2_weak_form_residual,
    positivity_monitor,
    sobolev_interpolation_ratio,
    summarize,
    weak_form_residual,
)
from nltlab.errors import NltDegenerateError, NltInapplicableError, NltParameterError
from nltlab.integrator import Stepper, StepperConfig
from nltlab.models import ModelFamily, ModelSpec
from nltlab.spectral import Grid, SpectralField

GRID = Grid(128)

SPECS = [
    ModelSpec(nu=0.3, gamma=1.2, epsilon=0.01, grid=GRID),
    ModelSpec(family=ModelFamily.MODEL2, alpha=0.3, gamma=0.5, nu=1.0, grid=GRID),
    ModelSpec(
        family=ModelFamily.MODEL3, beta=0.2, gamma=2.0, nu=0.5, sign=-1, grid=GRID
    ),
    ModelSpec(nu=1.0, gamma=0.7, transport=False, grid=GRID),
]


def random_field(grid, seed, max_mode=32, decay=0.1, mean=0.0):
    """Band-limited below the dealiasing cutoff."""
    rng = np.random.default_rng(seed)
    m = np.arange(1, max_mode + 1)
    coefficients = np.zeros(grid.n // 2 + 1, dtype=complex)
    coefficients[0] = mean
    coefficients[1 : max_mode + 1] = (
        rng.standard_normal(max_mode) + 1j * rng.standard_normal(max_mode)
    ) * np.exp(-decay * m)
    return SpectralField.from_spectral(grid, coefficients)


def observed_run(spec, theta0, horizon, dt=None):
    engine = DiagnosticsEngine(spec)
    config = StepperConfig(dt=dt, adaptive=dt is None)
    state = Stepper(spec, config, horizon=horizon).run(theta0, on_step=engine.observe)
    engine.finalize(state)
    return engine, state


class TestInstantaneousIdentities(unittest.TestCase):
    @settings(max_examples=10, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_energy_identities(self, seed):
        theta = random_field(GRID, seed, mean=0.5)
        for spec in SPECS:
            self.assertLess(energy_identity_residual(theta, spec), 1e-10)
            self.assertLess(h1_energy_identity_residual(theta, spec), 1e-10)
            self.assertLess(h_half_energy_residual(theta, spec), 1e-10)

    def test_constant_field(self):
        theta = SpectralField.from_physical(GRID, np.full(GRID.n, 2.0))
        self.assertEqual(energy_identity_residual(theta, SPECS[0]), 0.0)

    @settings(max_examples=20, deadline=None)
    @given(
        st.integers(min_value=0, max_value=2**32 - 1),
        st.floats(min_value=0.0, max_value=1.0),
    )
    def test_interpolation_inequality(self, seed, lam):
        f = random_field(GRID, seed)
        self.assertLessEqual(sobolev_interpolation_ratio(f, 0.5, 2.0, lam), 1.0 + 1e-12)

    def test_interpolation_errors(self):
        f = random_field(GRID, 1)
        with pytest.raises(NltParameterError):
            sobolev_interpolation_ratio(f, 0.0, 1.0, 1.5)
        with pytest.raises(NltDegenerateError):
            sobolev_interpolation_ratio(SpectralField.zeros(GRID), 0.0, 1.0, 0.5)


class TestModel1Run(unittest.TestCase):
    """Positive data under model1: the L1 identity and the a priori bounds."""

    @classmethod
    def setUpClass(cls):
        cls.grid = Grid(64)
        cls.spec = ModelSpec(nu=0.1, gamma=1.0, grid=cls.grid)
        theta0 = SpectralField.from_function(cls.grid, lambda x: 1.0 + 0.5 * np.cos(x))
        cls.engine, cls.state = observed_run(cls.spec, theta0, 0.5)

    def test_streaming_residuals(self):
        worst = self.engine.worst_residuals()
        self.assertLess(worst["l1_identity"], 1e-6)
        self.assertLess(worst["l2_budget"], 1e-6)
        self.assertLess(worst["energy_identity"], 1e-9)
        self.assertLess(worst["h1_identity"], 1e-9)
        self.assertLess(worst["h_half_identity"], 1e-9)

    def test_trajectory_identities(self):
        trajectory = self.engine.trajectory
        self.assertLess(abs(l1_identity_residual(trajectory, self.spec)), 1e-6)
        self.assertLess(a_priori_bound_check(trajectory), 1e-6)
        self.assertLess(max_principle_monitor(trajectory, relative=True), 1e-8)
        self.assertGreater(positivity_monitor(trajectory), 0.3)

    def test_energy_report(self):
        report = l2_energy_residual(self.engine.trajectory, self.spec)
        self.assertTrue(report.finite)
        self.assertLess(report.identity_residual, 1e-9)
        self.assertLess(report.budget_residual, 1e-6)
        self.assertLess(report.bound_ratio, 1.0)

    def test_records_and_snapshots(self):
        trajectory = self.engine.trajectory
        self.assertEqual(len(trajectory), self.state.step_count + 1)
        self.assertEqual(trajectory.snapshot_times[0], 0.0)
        self.assertEqual(trajectory.snapshot_times[-1], self.state.t)
        self.assertEqual(trajectory.records[-1].status, "finished")
        record = trajectory.records[0].to_dict()
        self.assertEqual(set(record["norms"]), {"L1", "L2", "Linf", "H1/2", "Hgamma/2", "H2", "B3/2_2,1"})

    def test_summary(self):
        summary = summarize(self.engine)
        self.assertIn("l1_identity", summary)
        self.assertIn("a_priori_excess", summary)
        self.assertTrue(summary["besov"]["bound_holds"])

    def test_l1_identity_rejects_signed_data(self):
        trajectory = Trajectory(self.grid)
        trajectory.add_snapshot(0.0, SpectralField.from_function(self.grid, np.cos))
        with pytest.raises(NltInapplicableError):
            l1_budget_residual(trajectory, self.spec, 0.5)

    def test_invalid_strides(self):
        with pytest.raises(NltParameterError):
            DiagnosticsEngine(self.spec, snapshot_stride=0)


class TestModel2Run(unittest.TestCase):
    def test_l1_budget(self):
        grid = Grid(64)
        spec = ModelSpec(family=ModelFamily.MODEL2, alpha=0.3, gamma=0.5, nu=1.0, grid=grid)
        theta0 = SpectralField.from_function(grid, lambda x: 1.0 + 0.5 * np.cos(x))
        engine, _ = observed_run(spec, theta0, 0.2)
        self.assertLess(abs(model2_l1_budget(engine.trajectory, spec)), 1e-6)
        self.assertIn("l1_budget", summarize(engine))


class TestWeakForm(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.grid = Grid(128)
        cls.spec = ModelSpec(epsilon=1e-2, grid=cls.grid)
        theta0 = SpectralField.from_function(cls.grid, lambda x: 1.0 + 0.5 * np.cos(x))
        cls.engine, _ = observed_run(cls.spec, theta0, 0.2, dt=2e-3)
        cls.psi = SpaceTimeBump(center=math.pi, width=2.0, duration=0.5)

    def test_viscous_defect_matches(self):
        report = weak_form_residual(self.engine.trajectory, self.psi, self.spec)
        self.assertGreater(report.scale, 0.0)
        self.assertLess(abs(report.relative_mismatch), 1e-6)
        self.assertEqual(report.as_dict()["quadrature"], "simpson")

    def test_model2_form_reduces_to_model1_form(self):
        """With alpha = 0 and nu = 0 both functionals coincide."""
        first = weak_form_residual(self.engine.trajectory, self.psi, self.spec)
        second = model2_weak_form_residual(self.engine.trajectory, self.psi, self.spec)
        self.assertAlmostEqual(first.value / first.scale, second.value / first.scale, places=8)
        self.assertAlmostEqual(first.viscous_defect, second.viscous_defect, places=12)

    def test_negative_test_function(self):
        psi = SpaceTimeBump(center=math.pi, width=2.0, duration=0.5, amplitude=-1.0)
        with pytest.raises(NltInapplicableError):
            weak_form_residual(self.engine.trajectory, psi, self.spec)

    def test_bump_parameters(self):
        with pytest.raises(NltParameterError):
            SpaceTimeBump(center=0.0, width=0.0, duration=1.0)
        self.assertEqual(self.psi.profile(0.0), 1.0)
        self.assertEqual(self.psi.profile(0.5), 0.0)
        self.assertEqual(self.psi.profile_derivative(0.0), 0.0)


class TestTrajectoryMonitors(unittest.TestCase):
    def test_besov_doubling(self):
        trajectory = BesovTrajectory(np.array([0.0, 1.0, 2.0, 3.0]), np.array([1.0, 1.5, 2.5, 3.0]))
        self.assertEqual(trajectory.doubling_time(), 2.0)
        self.assertEqual(trajectory.empirical_constant(), 2.0)
        self.assertTrue(trajectory.bound_holds(1.0))
        self.assertFalse(trajectory.bound_holds(3.0))
        flat = BesovTrajectory(np.array([0.0, 1.0]), np.array([0.0, 0.0]))
        self.assertIsNone(flat.doubling_time())
        self.assertTrue(flat.bound_holds())

    def test_max_principle_and_positivity(self):
        trajectory = Trajectory(GRID)
        for t, linf, low in [(0.0, 2.0, 0.5), (0.1, 2.5, -0.2), (0.2, 2.4, 0.1)]:
            trajectory.append(t, {"Linf": linf, "min": low})
        self.assertAlmostEqual(max_principle_monitor(trajectory), 0.5)
        self.assertAlmostEqual(max_principle_monitor(trajectory, relative=True), 0.25)
        self.assertAlmostEqual(positivity_monitor(trajectory), -0.1)

    def _h2_trajectory(self, profile):
        trajectory = Trajectory(GRID)
        for t in np.linspace(0.0, 1.0, 41):
            trajectory.append(t, {"H2": profile(t)})
        return trajectory

    def test_h2_growth(self):
        steady = h2_growth_check(self._h2_trajectory(lambda t: 1.0))
        self.assertTrue(steady.holds)
        self.assertEqual(steady.constant, 0.0)
        runaway = h2_growth_check(self._h2_trajectory(lambda t: 1.0 + 10.0 * t**3))
        self.assertFalse(runaway.holds)
        self.assertGreater(runaway.max_ratio, 1.0)
