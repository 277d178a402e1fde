#!/usr/bin/env python3

from typing import Self, Type
from unittest import TestCase

import numpy as np

from riskmdp import DynamicProgramming, Policy, RandomizedSolver, RiskSpec, TransientMdp, compose_measure, sigma_joint
from riskmdp.examples import TransplantSpec, build_transplant_mdp
from riskmdp.internals import ComplexityWarning, PolicyError
from riskmdp.randomized import simplex_grid

from .mocks import MockModels


class TestJointMeasure(TestCase):
    """
    TestJointMeasure
    ----------------

    Composition of a control distribution with the transition kernel.
    """
    @classmethod
    def setUpClass(cls: Type[Self]) -> None:
        cls.model = build_transplant_mdp(TransplantSpec(), r_L=600.0)

    def test_transplant_weights(self: Self) -> None:
        # Act
        joint = compose_measure(self.model, 0, [0.5, 0.5])

        # Assert
        self.assertEqual(((0, 0), (0, 2), (1, 1), (1, 2)), joint.support)
        np.testing.assert_allclose([0.499410, 0.000590, 0.453910, 0.046090], joint.weights, atol=1e-12)

    def test_dirac_reproduces_the_kernel_row(self: Self) -> None:
        # Act
        joint = compose_measure(self.model, 0, [0.0, 1.0])

        # Assert
        np.testing.assert_allclose(self.model.kernel[0][1], joint.conditional(1, self.model.n))
        np.testing.assert_array_equal(np.zeros(self.model.n), joint.conditional(0, self.model.n))
        np.testing.assert_allclose([0.0, 1.0], joint.control_marginal(2), atol=1e-15)

    def test_marginals(self: Self) -> None:
        # Arrange
        lam = np.array([0.3, 0.7])

        # Act
        joint = compose_measure(self.model, 0, lam)

        # Assert
        np.testing.assert_allclose(lam, joint.control_marginal(2), atol=1e-15)
        for u in range(2):
            np.testing.assert_allclose(self.model.kernel[0][u], joint.conditional(u, self.model.n), atol=1e-15)

    def test_lambda_must_be_a_distribution(self: Self) -> None:
        for lam in ([0.5, 0.6], [1.0], [-0.5, 1.5]):
            with self.assertRaises(PolicyError):
                compose_measure(self.model, 0, lam)

    def test_sigma_of_a_dirac_matches_the_backup(self: Self) -> None:
        for seed in MockModels.seeds(30):
            # Arrange
            rng = np.random.default_rng(seed)
            model = MockModels.random_model(rng)
            solver = RandomizedSolver(model, MockModels.random_spec(rng))
            v = np.zeros(model.n)
            v[model.effective] = rng.normal(size=model.n - 1)
            x = int(rng.integers(model.n - 1))
            u = int(rng.integers(len(model.controls[x])))

            # Act
            joint = compose_measure(solver.model, x, np.eye(len(model.controls[x]))[u])
            sigma = sigma_joint(solver.spec, x, solver.joint_phi(x, v), joint)

            # Assert
            self.assertAlmostEqual(solver.backup(x, u, v), sigma, delta=1e-12)


class TestSimplexGrid(TestCase):
    def test_size_and_rows(self: Self) -> None:
        # Act
        grid = simplex_grid(3, 4)

        # Assert
        self.assertEqual((15, 3), grid.shape)
        np.testing.assert_allclose(np.ones(15), grid.sum(axis=1))
        self.assertTrue(np.all(grid >= 0))
        self.assertEqual(15, len({tuple(row) for row in grid}))

    def test_vertices_are_included(self: Self) -> None:
        # Act
        grid = simplex_grid(2, 100)

        # Assert
        self.assertEqual(101, grid.shape[0])
        self.assertTrue(any(np.array_equal(row, [1.0, 0.0]) for row in grid))
        self.assertTrue(any(np.array_equal(row, [0.0, 1.0]) for row in grid))


class TestRandomizedSolver(TestCase):
    """
    TestRandomizedSolver
    --------------------

    Randomization never hurts, and it never helps under AVaR or the
    expectation, where some vertex of the simplex is always optimal.
    """
    def test_avar_returns_vertex_policies(self: Self) -> None:
        for seed in MockModels.seeds(100):
            # Arrange
            rng = np.random.default_rng(seed)
            model = MockModels.random_model(rng)
            spec = RiskSpec.avar(float(rng.uniform(0.6, 0.95)))

            # Act
            randomized = RandomizedSolver(model, spec).randomized_bellman_solve()
            deterministic = DynamicProgramming(model, spec).value_iteration()

            # Assert
            np.testing.assert_allclose(deterministic.value.values, randomized.value.values, atol=1e-7)
            for lam in randomized.policy.assignment:
                self.assertEqual(1.0, float(np.max(lam)))

    def test_expectation_matches_deterministic(self: Self) -> None:
        for seed in MockModels.seeds(30, offset=100):
            # Arrange
            rng = np.random.default_rng(seed)
            model = MockModels.random_model(rng, nonnegative=False)
            spec = RiskSpec.expectation()

            # Act
            randomized = RandomizedSolver(model, spec, inner_grid=21, inner_refinements=1).randomized_bellman_solve()
            deterministic = DynamicProgramming(model, spec).value_iteration()

            # Assert
            np.testing.assert_allclose(deterministic.value.values, randomized.value.values, atol=1e-7)

    def test_randomization_never_hurts(self: Self) -> None:
        for seed in MockModels.seeds(30, offset=200):
            # Arrange
            rng = np.random.default_rng(seed)
            model = MockModels.random_model(rng, nonnegative=False)
            spec = RiskSpec.semideviation(float(rng.uniform()))

            # Act
            randomized = RandomizedSolver(model, spec, inner_grid=21, inner_refinements=1).randomized_bellman_solve()
            deterministic = DynamicProgramming(model, spec).value_iteration()

            # Assert
            self.assertTrue(randomized.converged)
            self.assertTrue(np.all(randomized.value.values <= deterministic.value.values + 1e-7))
            self.assertLess(randomized.residual, 1e-7)

    def test_dirac_policy_evaluation(self: Self) -> None:
        for seed in MockModels.seeds(20, offset=300):
            # Arrange
            rng = np.random.default_rng(seed)
            model = MockModels.random_model(rng)
            solver = RandomizedSolver(model, MockModels.random_spec(rng))
            policy = Policy.deterministic([int(rng.integers(len(u))) for u in model.controls])
            dirac = Policy.randomized([policy.distribution(model, x) for x in range(model.n)])

            # Act
            randomized = solver.evaluate_randomized_policy(dirac)
            deterministic = solver.evaluate_stationary_policy(policy)

            # Assert
            np.testing.assert_allclose(deterministic.value.values, randomized.value.values, atol=1e-8)

    def test_gap(self: Self) -> None:
        # Arrange
        solver = RandomizedSolver(MockModels.two_state_chain(), RiskSpec.expectation())

        # Act
        solution = solver.randomized_bellman_solve()

        # Assert
        self.assertAlmostEqual(1.0 / (100 * 22 ** 3), solution.gap, delta=1e-15)
        self.assertAlmostEqual(2.0, solution.value[0], delta=1e-8)

    def test_single_control_states_are_backed_up(self: Self) -> None:
        # Arrange
        model = TransientMdp(
            states=("s", "l", "d"),
            absorbing=2,
            controls=(("go", "stop"), ("continue",), ("a",)),
            kernel=(np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]), np.array([[0.0, 0.0, 1.0]]), np.array([[0.0, 0.0, 1.0]])),
            cost=(np.array([[1.0, 1.0, 1.0], [5.0, 5.0, 5.0]]), np.full((1, 3), 2.0), np.zeros((1, 3)))
        )
        solver = RandomizedSolver(model, RiskSpec.avar(0.75))
        v = np.array([0.0, 4.0, 0.0])

        # Act
        image, _ = solver.randomized_operator(v)
        solution = solver.randomized_bellman_solve()

        # Assert
        self.assertEqual(solver.backup(1, 0, v), image[1])
        self.assertAlmostEqual(2.0, solution.value[1], places=12)
        self.assertAlmostEqual(3.0, solution.value[0], places=12)
        np.testing.assert_allclose(DynamicProgramming(model, RiskSpec.avar(0.75)).value_iteration().value.values, solution.value.values, atol=1e-12)

    def test_large_grids_warn(self: Self) -> None:
        # Arrange
        model = TransientMdp(
            states=("s", "d"),
            absorbing=1,
            controls=(("a", "b", "c"), ("stay",)),
            kernel=(np.array([[0.5, 0.5], [0.2, 0.8], [0.0, 1.0]]), np.array([[0.0, 1.0]])),
            cost=(np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]), np.zeros((1, 2)))
        )
        solver = RandomizedSolver(model, RiskSpec.expectation(), inner_grid=3, refine_factor=200)

        # Act
        with self.assertWarns(ComplexityWarning):
            solution = solver.randomized_bellman_solve(inner_refinements=1)

        # Assert
        self.assertAlmostEqual(2.0, solution.value[0], delta=1e-8)

    def test_invalid_grid(self: Self) -> None:
        with self.assertRaises(ValueError):
            RandomizedSolver(MockModels.two_state_chain(), RiskSpec.expectation(), inner_grid=1)
