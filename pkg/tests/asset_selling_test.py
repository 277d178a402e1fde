#!/usr/bin/env python3

from typing import Self
from unittest import TestCase

import numpy as np

from riskmdp import DynamicProgramming, RiskSpec
from riskmdp.examples import AssetSellingSpec, asset_threshold, build_asset_selling_mdp, expected_gain
from riskmdp.mdp_core import validate


class TestAssetSelling(TestCase):
    """
    TestAssetSelling
    ----------------

    Offers uniform on `0..9`. Under the expectation the mean improvement over
    `x = 5` is exactly one, so with waiting cost one the threshold is five and
    `v*(x) = -max(x, 5)` solves the Bellman equation.
    """
    def test_risk_neutral_threshold(self: Self) -> None:
        # Arrange
        spec = AssetSellingSpec.uniform(9, 1.0)

        # Act
        threshold = asset_threshold(spec)

        # Assert
        self.assertEqual(5, threshold.x_star)
        self.assertFalse(threshold.at_edge)
        self.assertLessEqual(threshold.residual, 1e-10)
        self.assertEqual(-5.0, threshold.value[0])
        self.assertEqual(-7.0, threshold.value[7])
        self.assertEqual(0.0, threshold.value[10])

    def test_gains_cross_the_waiting_cost_at_the_threshold(self: Self) -> None:
        for risk in (RiskSpec.expectation(), RiskSpec.avar(0.5), RiskSpec.semideviation(0.7)):
            # Arrange
            spec = AssetSellingSpec.uniform(9, 0.8, risk)

            # Act
            threshold = asset_threshold(spec)
            gains = threshold.expected_gain

            # Assert
            self.assertTrue(np.all(np.diff(gains) <= 1e-12))
            self.assertLessEqual(gains[threshold.x_star], 0.8)
            if threshold.x_star > 0: self.assertGreater(gains[threshold.x_star - 1], 0.8)
            self.assertAlmostEqual(gains[3], expected_gain(spec, 3), places=15)

    def test_risk_aversion_sells_earlier(self: Self) -> None:
        for c0 in (0.25, 0.5, 1.0, 2.0):
            # Arrange
            neutral = asset_threshold(AssetSellingSpec.uniform(9, c0))

            for risk in (RiskSpec.avar(0.3), RiskSpec.avar(0.7), RiskSpec.semideviation(1.0)):
                # Act
                averse = asset_threshold(AssetSellingSpec.uniform(9, c0, risk))

                # Assert
                self.assertLessEqual(averse.x_star, neutral.x_star)

    def test_expensive_waiting_sells_at_once(self: Self) -> None:
        # Act
        threshold = asset_threshold(AssetSellingSpec.uniform(9, 9.0))

        # Assert
        self.assertEqual(0, threshold.x_star)
        np.testing.assert_array_equal(-np.arange(10.0), threshold.value.values[:10])

    def test_cheap_waiting_holds_out_for_the_best_offer(self: Self) -> None:
        # Act
        threshold = asset_threshold(AssetSellingSpec.uniform(9, 0.01))

        # Assert
        self.assertEqual(9, threshold.x_star)
        self.assertTrue(threshold.at_edge)

    def test_value_iteration_reaches_the_closed_form(self: Self) -> None:
        # Arrange
        spec = AssetSellingSpec.uniform(9, 1.0)
        dp = DynamicProgramming(build_asset_selling_mdp(spec), spec.risk)

        # Act
        solution = dp.value_iteration()

        # Assert
        self.assertTrue(solution.converged)
        np.testing.assert_allclose(asset_threshold(spec).value.values, solution.value.values, atol=1e-7)
        self.assertEqual("sell", dp.model.controls[9][solution.policy.assignment[9]])
        self.assertEqual("wait", dp.model.controls[2][solution.policy.assignment[2]])


class TestAssetSellingModel(TestCase):
    def test_model_is_valid(self: Self) -> None:
        # Arrange
        spec = AssetSellingSpec(np.array([0.1, 0.2, 0.3, 0.4]), 0.5)

        # Act
        model = build_asset_selling_mdp(spec)

        # Assert
        self.assertEqual([], validate(model))
        self.assertEqual(("0", "1", "2", "3", "sold"), model.states)
        np.testing.assert_allclose([0.0, 0.3, 0.3, 0.4, 0.0], model.kernel[1][1])
        np.testing.assert_array_equal([0.0, 0.0, 0.0, 0.0, -2.0], model.cost[2][0])

    def test_invalid_specs(self: Self) -> None:
        for build in (
            lambda: AssetSellingSpec(np.array([0.5, 0.6]), 1.0),
            lambda: AssetSellingSpec(np.array([0.5, 0.5]), 0.0),
            lambda: AssetSellingSpec(np.array([0.5, 0.5]), 1.0, RiskSpec.avar((0.5, 0.6)))
        ):
            with self.assertRaises(ValueError):
                build()
