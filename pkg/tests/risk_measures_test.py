#!/usr/bin/env python3

from typing import Self, Type
from unittest import TestCase

import numpy as np

from riskmdp import RiskFamily, RiskSpec
from riskmdp.internals import RiskSpecError


class TestRiskSpec(TestCase):
    """
    TestRiskSpec
    ------------

    Closed-form values of the three risk transition mappings, parameter
    validation and the command line grammar.
    """
    def test_expectation(self: Self) -> None:
        self.assertAlmostEqual(0.5, RiskSpec.expectation().evaluate_sigma(0, [1.0, 0.0], [0.5, 0.5]), places=15)

    def test_semideviation(self: Self) -> None:
        # Arrange
        spec = RiskSpec.semideviation(1.0)

        # Act
        sigma = spec.evaluate_sigma(0, [1.0, 0.0], [0.5, 0.5])

        # Assert
        self.assertAlmostEqual(0.75, sigma, places=15)

    def test_avar_averages_the_worst_tail(self: Self) -> None:
        # Arrange
        phi = np.array([4.0, 1.0, 2.0, 3.0])
        m = np.full(4, 0.25)

        # Act
        half = RiskSpec.avar(0.5).evaluate_sigma(0, phi, m)
        whole = RiskSpec.avar(1.0).evaluate_sigma(0, phi, m)
        tiny = RiskSpec.avar(1e-3).evaluate_sigma(0, phi, m)

        # Assert
        self.assertAlmostEqual(3.5, half, places=12)
        self.assertAlmostEqual(2.5, whole, places=12)
        self.assertAlmostEqual(4.0, tiny, places=12)

    def test_state_dependent_levels(self: Self) -> None:
        # Arrange
        spec = RiskSpec.avar((0.5, 1.0))
        phi, m = [1.0, 0.0], [0.5, 0.5]

        # Act + Assert
        self.assertAlmostEqual(1.0, spec.evaluate_sigma(0, phi, m), places=15)
        self.assertAlmostEqual(0.5, spec.evaluate_sigma(1, phi, m), places=15)

    def test_invalid_parameters(self: Self) -> None:
        for build in (lambda: RiskSpec.semideviation(1.5), lambda: RiskSpec.semideviation(-0.1), lambda: RiskSpec.avar(0.0), lambda: RiskSpec.avar(1.2)):
            with self.assertRaises(RiskSpecError):
                build()

    def test_mismatched_lengths(self: Self) -> None:
        with self.assertRaises(RiskSpecError):
            RiskSpec.expectation().evaluate_sigma(0, [1.0, 2.0, 3.0], [0.5, 0.5])

    def test_measure_must_be_a_distribution(self: Self) -> None:
        with self.assertRaises(RiskSpecError):
            RiskSpec.expectation().evaluate_sigma(0, [1.0, 2.0], [0.5, 0.6])

    def test_parse(self: Self) -> None:
        # Act
        expectation = RiskSpec.parse("expectation")
        semideviation = RiskSpec.parse("semidev:0.5")
        avar = RiskSpec.parse("AVaR:0.75")

        # Assert
        self.assertIs(RiskFamily.EXPECTATION, expectation.family)
        self.assertEqual((RiskFamily.MEAN_SEMIDEVIATION, 0.5), (semideviation.family, semideviation.kappa))
        self.assertEqual((RiskFamily.AVAR, 0.75), (avar.family, avar.alpha))
        self.assertEqual("semidev:0.5", str(semideviation))
        self.assertEqual("avar:0.75", str(avar))

    def test_parse_errors(self: Self) -> None:
        for text in ("variance:1", "avar:x", "semidev:2"):
            with self.assertRaises(RiskSpecError):
                RiskSpec.parse(text)

    def test_per_state_document(self: Self) -> None:
        # Arrange
        document = {"family": "avar", "alpha": {"a": 0.6, "default": 0.9}}

        # Act
        spec = RiskSpec.from_dict(document, ("a", "b", "c"))

        # Assert
        self.assertEqual((0.6, 0.9, 0.9), spec.alpha)
        self.assertEqual({"family": "avar", "alpha": {"a": 0.6, "b": 0.9, "c": 0.9}}, spec.to_dict(("a", "b", "c")))


class TestEnvelopeMassBounds(TestCase):
    """
    TestEnvelopeMassBounds
    ----------------------

    Mass that envelope elements of `m = (1/2, 1/2)` can put on the first state.
    """
    m = np.array([0.5, 0.5])

    def test_avar_interval(self: Self) -> None:
        for alpha in np.linspace(0.05, 1.0, 20):
            # Act
            low, high = RiskSpec.avar(alpha).envelope_mass_bounds(0, self.m, [0])

            # Assert
            self.assertAlmostEqual(max(0.0, 1.0 - 1.0 / (2 * alpha)), low, delta=1e-10)
            self.assertAlmostEqual(min(1.0, 1.0 / (2 * alpha)), high, delta=1e-10)

    def test_avar_interval_starts_at_zero_up_to_one_half(self: Self) -> None:
        for alpha in np.linspace(0.05, 0.5, 10):
            # Act
            low, high = RiskSpec.avar(alpha).envelope_mass_bounds(0, self.m, [0])

            # Assert
            self.assertAlmostEqual(0.0, low, delta=1e-10)
            self.assertAlmostEqual(1.0, high, delta=1e-10)

    def test_semideviation_interval(self: Self) -> None:
        for kappa in np.linspace(0.0, 1.0, 11):
            # Act
            low, high = RiskSpec.semideviation(kappa).envelope_mass_bounds(0, self.m, [0])

            # Assert
            self.assertAlmostEqual(0.5 * (1 - kappa / 2), low, delta=1e-10)
            self.assertAlmostEqual(0.5 * (1 + kappa / 2), high, delta=1e-10)

    def test_expectation_is_a_point(self: Self) -> None:
        self.assertEqual((0.5, 0.5), RiskSpec.expectation().envelope_mass_bounds(0, self.m, [0]))


class TestCoherence(TestCase):
    """
    TestCoherence
    -------------

    Randomized property checks of convexity, monotonicity, translation
    equivariance, positive homogeneity, law invariance, the lower bound by the
    mean and the maximizing selector.
    """
    trials = 1000
    tol = 1e-10

    @classmethod
    def setUpClass(cls: Type[Self]) -> None:
        cls.rng = np.random.default_rng(2024)

    def draw(self: Self):
        size = int(self.rng.integers(1, 7))
        m = self.rng.dirichlet(np.ones(size))
        phi = self.rng.normal(size=size) * 5
        psi = self.rng.normal(size=size) * 5

        match int(self.rng.integers(3)):
            case 0: spec = RiskSpec.expectation()
            case 1: spec = RiskSpec.semideviation(float(self.rng.uniform()))
            case _: spec = RiskSpec.avar(float(self.rng.uniform(0.01, 1.0)))

        return spec, phi, psi, m

    def test_axioms(self: Self) -> None:
        for _ in range(self.trials):
            # Arrange
            spec, phi, psi, m = self.draw()
            sigma = lambda f: spec.evaluate_sigma(0, f, m)
            t = float(self.rng.uniform())
            a = float(self.rng.normal())
            beta = float(self.rng.uniform(0.0, 10.0))

            # Assert
            self.assertLessEqual(sigma(t * phi + (1 - t) * psi), t * sigma(phi) + (1 - t) * sigma(psi) + self.tol)
            self.assertLessEqual(sigma(np.minimum(phi, psi)), sigma(psi) + self.tol)
            self.assertAlmostEqual(sigma(phi) + a, sigma(phi + a), delta=self.tol)
            self.assertAlmostEqual(beta * sigma(phi), sigma(beta * phi), delta=self.tol * (1 + beta))

    def test_law_invariance(self: Self) -> None:
        for _ in range(self.trials):
            # Arrange
            spec, phi, _, m = self.draw()
            permutation = self.rng.permutation(m.size)

            # Act
            sigma = spec.evaluate_sigma(0, phi, m)
            permuted = spec.evaluate_sigma(0, phi[permutation], m[permutation])

            # Assert
            self.assertAlmostEqual(sigma, permuted, delta=self.tol)

    def test_mean_is_a_lower_bound(self: Self) -> None:
        for _ in range(self.trials):
            spec, phi, _, m = self.draw()
            self.assertGreaterEqual(spec.evaluate_sigma(0, phi, m), float(phi @ m) - self.tol)

    def test_max_selector(self: Self) -> None:
        for _ in range(self.trials):
            # Arrange
            spec, phi, psi, m = self.draw()

            # Act
            value = spec.max_selector(0, phi, m)
            mu = value.maximizer

            # Assert
            self.assertTrue(np.all(mu >= -self.tol))
            self.assertAlmostEqual(1.0, mu.sum(), delta=self.tol)
            self.assertAlmostEqual(spec.evaluate_sigma(0, phi, m), float(phi @ mu), delta=self.tol)
            # an envelope element never exceeds the mapping on other arguments
            self.assertLessEqual(float(psi @ mu), spec.evaluate_sigma(0, psi, m) + self.tol)

            if spec.family is RiskFamily.AVAR:
                self.assertTrue(np.all(mu <= m / spec.alpha + self.tol))

    def test_batch_matches_single_evaluation(self: Self) -> None:
        for _ in range(100):
            # Arrange
            spec, phi, _, _ = self.draw()
            measures = self.rng.dirichlet(np.ones(phi.size), size=5)

            # Act
            batch = spec.evaluate_sigma_batch(0, phi, measures)

            # Assert
            for m, sigma in zip(measures, batch):
                self.assertAlmostEqual(spec.evaluate_sigma(0, phi, m), sigma, delta=self.tol)
