import math
import unittest

from hypothesis import given, settings
from hypothesis import strategies as st
import numpy as np
import pytest
from scipy import special

from nltlab.errors import NltOperatorError, NltParameterError
from nltlab.models import ModelFamily, ModelSpec
from nltlab.operators import (
    MultiplierOp,
    hardy_identity_residual,
    hardy_product,
    hilbert,
    hilbert_op,
    kernel_constant,
    lambda_op,
    lambda_pow,
    lambda_pv_oracle,
    smoothing_op,
    velocity,
    velocity_op,
)
from nltlab.spectral import Grid, SpectralField, dealiased_product, derivative, inner, lp_norm


def random_mean_zero(grid, seed, max_mode):
    rng = np.random.default_rng(seed)
    coefficients = np.zeros(grid.n // 2 + 1, dtype=complex)
    coefficients[1 : max_mode + 1] = rng.standard_normal(max_mode) + 1j * rng.standard_normal(
        max_mode
    )
    return SpectralField.from_spectral(grid, coefficients)


class TestMultipliers(unittest.TestCase):
    def setUp(self):
        self.grid = Grid(64)

    def test_hilbert_of_cosine(self):
        f = SpectralField.from_function(self.grid, lambda x: np.cos(3 * x))
        np.testing.assert_allclose(hilbert(f).physical, np.sin(3 * self.grid.x), atol=1e-14)

    def test_lambda_of_sine(self):
        f = SpectralField.from_function(self.grid, lambda x: np.sin(2 * x))
        np.testing.assert_allclose(
            lambda_pow(f, 0.5).physical, math.sqrt(2.0) * f.physical, atol=1e-14
        )

    def test_negative_powers_annihilate_the_mean(self):
        f = SpectralField.from_function(self.grid, lambda x: 1.0 + np.cos(x))
        self.assertEqual(lambda_pow(f, -1.0).mean, 0.0)

    def test_symbol_conventions(self):
        h = hilbert_op(self.grid)
        self.assertEqual(h.symbol[0], 0.0)
        # Odd symbol vanishes at the Nyquist wavenumber, even ones do not
        self.assertEqual(h.symbol[-1], 0.0)
        self.assertAlmostEqual(lambda_op(self.grid, 1.0).symbol[-1].real, 32.0)
        full = h.full_symbol
        np.testing.assert_allclose(full[1:32], -1j)
        np.testing.assert_allclose(full[33:], 1j)

    def test_composition(self):
        op = hilbert_op(self.grid) @ lambda_op(self.grid, 1.0)
        f = SpectralField.from_function(self.grid, lambda x: np.cos(4 * x))
        np.testing.assert_allclose(op(f).physical, 4.0 * np.sin(4 * self.grid.x), atol=1e-13)
        scaled = op.scaled(-2.0)
        np.testing.assert_allclose(scaled.symbol, -2.0 * op.symbol)

    def test_inhomogeneous_smoothing(self):
        op = smoothing_op(self.grid, 0.5, inhomogeneous=True)
        self.assertEqual(op.symbol[0], 0.0)
        self.assertAlmostEqual(op.symbol[3].real, 1.0 / math.sqrt(10.0))

    def test_validate(self):
        hilbert_op(self.grid).validate()
        symbol = np.ones(self.grid.n // 2 + 1, dtype=complex)
        with pytest.raises(NltOperatorError):
            MultiplierOp(self.grid, symbol, "bad").validate()
        symbol[0] = 0.0
        symbol[-1] = 1j
        with pytest.raises(NltOperatorError):
            MultiplierOp(self.grid, symbol, "bad").validate()
        with pytest.raises(NltOperatorError):
            MultiplierOp(self.grid, np.zeros(5, dtype=complex), "short").validate()


class TestVelocity(unittest.TestCase):
    def setUp(self):
        self.grid = Grid(64)
        self.theta = SpectralField.from_function(self.grid, lambda x: np.cos(2 * x))

    def test_model1(self):
        spec = ModelSpec(grid=self.grid)
        np.testing.assert_allclose(
            velocity(self.theta, spec).physical, -np.sin(2 * self.grid.x), atol=1e-14
        )

    def test_model2_and_model3(self):
        spec2 = ModelSpec(family=ModelFamily.MODEL2, alpha=0.5, grid=self.grid)
        np.testing.assert_allclose(
            velocity(self.theta, spec2).physical, -0.5 * np.sin(2 * self.grid.x), atol=1e-14
        )
        spec3 = ModelSpec(family=ModelFamily.MODEL3, beta=0.5, sign=-1, grid=self.grid)
        np.testing.assert_allclose(
            velocity(self.theta, spec3).physical, 2.0 * np.sin(2 * self.grid.x), atol=1e-13
        )

    def test_parameters_are_checked(self):
        with pytest.raises(NltParameterError):
            velocity(self.theta, ModelSpec(family=ModelFamily.MODEL2, grid=self.grid))
        with pytest.raises(NltParameterError):
            velocity_op(self.grid, "model4")


class TestIdentities(unittest.TestCase):
    def setUp(self):
        self.grid = Grid(256)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_hilbert_square_and_lambda(self, seed):
        f = random_mean_zero(self.grid, seed, 32)
        scale = lp_norm(f, np.inf)
        self.assertLess(lp_norm(hilbert(hilbert(f)) + f, np.inf), 1e-10 * scale)
        self.assertLess(
            lp_norm(lambda_pow(f, 1.0) - hilbert(derivative(f, 1)), np.inf),
            1e-10 * lp_norm(lambda_pow(f, 1.0), np.inf),
        )

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_hilbert_is_skew(self, seed):
        f = random_mean_zero(self.grid, seed, 32)
        g = random_mean_zero(self.grid, seed + 1, 32)
        scale = math.sqrt(inner(f, f) * inner(g, g))
        self.assertLess(abs(inner(hilbert(f), g) + inner(f, hilbert(g))), 1e-12 * scale)

    @settings(max_examples=20, deadline=None)
    @given(
        st.integers(min_value=0, max_value=2**32 - 1),
        st.floats(min_value=0.1, max_value=2.0),
    )
    def test_lambda_is_dissipative(self, seed, gamma):
        f = random_mean_zero(self.grid, seed, 32)
        half = lambda_pow(f, 0.5 * gamma)
        dissipation = inner(lambda_pow(f, gamma), f)
        self.assertGreater(dissipation, 0.0)
        self.assertLess(abs(dissipation - inner(half, half)), 1e-12 * dissipation)

    @settings(max_examples=20, deadline=None)
    @given(
        st.integers(min_value=0, max_value=2**32 - 1),
        st.floats(min_value=-1.0, max_value=1.0),
        st.floats(min_value=-1.0, max_value=1.0),
    )
    def test_lambda_powers_compose(self, seed, s, t):
        f = random_mean_zero(self.grid, seed, 32)
        composed = lambda_pow(lambda_pow(f, s), t)
        direct = lambda_pow(f, s + t)
        self.assertLess(lp_norm(composed - direct, np.inf), 1e-10 * lp_norm(direct, np.inf))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_hardy_identity(self, seed):
        f = random_mean_zero(self.grid, seed, 32)
        check = hardy_identity_residual(f)
        self.assertLess(check.residual, 1e-10 * lp_norm(f, np.inf) ** 2)
        self.assertLessEqual(check.ratio, 1.0 + 1e-12)

    def test_hardy_product(self):
        f = random_mean_zero(self.grid, 7, 32)
        direct = dealiased_product(f, hilbert(f))
        np.testing.assert_allclose(
            hardy_product(f).physical, direct.physical, atol=1e-10 * lp_norm(f, np.inf) ** 2
        )


class TestKernelConstant(unittest.TestCase):
    def test_closed_form(self):
        for gamma in (0.3, 0.5, 1.5, 1.8):
            expected = -1.0 / (2.0 * special.gamma(-gamma) * math.cos(0.5 * math.pi * gamma))
            self.assertAlmostEqual(kernel_constant(gamma) / expected, 1.0, places=6)
        self.assertAlmostEqual(kernel_constant(1.0), 1.0 / math.pi, places=7)

    def test_range(self):
        with pytest.raises(NltParameterError):
            kernel_constant(2.0)
        with pytest.raises(NltParameterError):
            kernel_constant(0.0)


class TestPrincipalValueOracle(unittest.TestCase):
    @staticmethod
    def _error(n, gamma):
        grid = Grid(n)
        f = SpectralField.from_function(grid, lambda x: np.exp(np.cos(x)))
        f = f - f.mean
        spectral = lambda_pow(f, gamma)
        return lp_norm(spectral - lambda_pv_oracle(f, gamma), 2.0) / lp_norm(spectral, 2.0)

    def test_agreement_and_order(self):
        for gamma in (0.5, 1.0, 1.5):
            coarse = self._error(256, gamma)
            fine = self._error(512, gamma)
            self.assertLess(fine, 1e-3)
            self.assertGreaterEqual(math.log2(coarse / fine), 2.0)

    def test_out_of_range(self):
        f = SpectralField.from_function(Grid(16), np.cos)
        with pytest.raises(NltParameterError):
            lambda_pv_oracle(f, 2.0)
