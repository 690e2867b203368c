# -*- coding: utf8 -*-

import math
import unittest

import numpy as np

from inertial.exception import DimensionMismatch, InvalidPoint, PreconditionViolated, UnboundedSlope
from inertial.game import Affine, Constant, PopulationGame, RideHailing, SimplexPoint, SwitchingCosts, \
    evaluate_utilities, extend_with_exit, lipschitz_bounds, remove_action, require_valid, sample_simplex, \
    utility_from_dict, validate_for_better_response, validate_game
from inertial.scenario import example_one

game = example_one()


class TestUtilities(unittest.TestCase):
    def test_affine_values(self):
        np.testing.assert_allclose(evaluate_utilities(game, [0.4, 0.4, 0.2]), [0.8, 0.8, 0.8], atol=1e-12)
        np.testing.assert_allclose(evaluate_utilities(game, [0.2, 0.2, 0.6]), [1.0, 1.0, 0.4], atol=1e-12)

    def test_vector_path_matches_scalar_values(self):
        utilities = (Affine(1.0, 0.5), RideHailing(80.0, 6.34, 2.5), Constant(3.0))
        g = PopulationGame.create(utilities, 0.1 * (1 - np.eye(3)))
        x = np.array([0.2, 0.5, 0.3])
        expected = [float(u.value(xi)) for u, xi in zip(utilities, x)]
        np.testing.assert_allclose(g.utility_vector(x), expected, rtol=1e-14)

    def test_constant_values(self):
        u = Constant(0.7)
        np.testing.assert_array_equal(u.value(np.array([0.0, 0.3, 2.0])), [0.7, 0.7, 0.7])
        self.assertEqual(float(u.value(0.4)), 0.7)

    def test_ride_hailing_starts_at_alpha(self):
        u = RideHailing(120.0, 6.34, 3.0)
        self.assertEqual(float(u.value(0.0)), 120.0)
        self.assertEqual(float(u.occupancy(0.0)), 1.0)

    def test_ride_hailing_slope_bound_dominates_grid(self):
        for alpha, p in ((140.0, 1.5), (30.0, 8.0), (87.0, 2.6)):
            u = RideHailing(alpha, 6.34, p)
            grid = np.linspace(0.0, 5.0, 10 ** 4)
            slopes = np.abs(np.diff(u.value(grid)) / np.diff(grid))
            self.assertLessEqual(slopes.max(), u.slope_bound() * (1 + 1e-9))
            self.assertGreater(slopes.max(), 0.9 * u.slope_bound())

    def test_ride_hailing_bound_value(self):
        u = RideHailing(140.0, 6.34, 1.5)
        expected = 4 * 146.34 * 1.5 * 0.5 ** 0.5 / 2.5 ** 2.5
        self.assertAlmostEqual(u.slope_bound(), expected, places=10)

    def test_unbounded_slope(self):
        self.assertRaises(UnboundedSlope, RideHailing(50.0, 6.34, 0.5).slope_bound)

    def test_integrals_match_utilities(self):
        h = 1e-6
        for u in (Affine(1.2, 1.0), RideHailing(96.0, 6.34, 2.2), Constant(0.7)):
            for x in (0.1, 0.45, 0.9):
                derivative = (u.integral(x + h) - u.integral(x - h)) / (2 * h)
                self.assertAlmostEqual(derivative, float(u.value(x)), delta=1e-5 * max(1.0, abs(float(u.value(x)))))
            self.assertEqual(u.integral(0.0), 0.0)

    def test_slope_bound_on_random_pairs(self):
        rng = np.random.default_rng(3)
        models = (Affine(1.2, 1.0), Affine(-0.5, 7.5), Constant(0.7), RideHailing(100.0, 6.34, 2.0),
                  RideHailing(140.0, 6.34, 1.5), RideHailing(30.0, 6.34, 8.0))
        for u in models:
            a, b = rng.uniform(0.0, 3.0, size=(2, 10 ** 4))
            ua, ub = u.value(a), u.value(b)
            bound = u.slope_bound() * np.abs(a - b) * (1 + 1e-9) + 1e-12
            self.assertTrue(np.all(np.abs(ua - ub) <= bound), u)
            self.assertTrue(u.is_nonincreasing())
            lo, hi = np.minimum(a, b), np.maximum(a, b)
            self.assertTrue(np.all(u.value(hi) <= u.value(lo) + 1e-12), u)

    def test_utility_from_dict(self):
        self.assertEqual(utility_from_dict({"kind": "affine", "a": 1, "b": 2}), Affine(1.0, 2.0))
        self.assertEqual(utility_from_dict({"kind": "ride-hailing", "alpha": 50, "beta": 6.34, "p": 2}),
                         RideHailing(50.0, 6.34, 2.0))


class TestValidation(unittest.TestCase):
    def test_valid_game(self):
        self.assertEqual(validate_game(game), [])
        self.assertIs(require_valid(game), game)

    def test_negative_cost(self):
        costs = np.array(game.costs.matrix)
        costs[0, 1] = -0.1
        report = validate_game(PopulationGame(3, game.utilities, costs))
        self.assertEqual([v.kind for v in report], ["NegativeCost"])
        self.assertEqual(report[0].indices, (0, 1))
        self.assertTrue(str(report[0]).startswith("NegativeCost(1,2)"))

    def test_nonzero_diagonal(self):
        costs = np.array(game.costs.matrix)
        costs[2, 2] = 0.5
        report = validate_game(PopulationGame(3, game.utilities, costs))
        self.assertEqual([(v.kind, v.indices) for v in report], [("NonzeroDiagonal", (2,))])

    def test_shape_problems(self):
        report = validate_game(PopulationGame(3, game.utilities[:2], game.costs))
        self.assertIn("UtilityCountMismatch", [v.kind for v in report])
        report = validate_game(PopulationGame(3, game.utilities, np.zeros((2, 2))))
        self.assertIn("CostShapeMismatch", [v.kind for v in report])

    def test_gamma_and_parameters(self):
        report = validate_game(PopulationGame(3, game.utilities, game.costs, gamma=0.0))
        self.assertEqual([v.kind for v in report], ["NonPositiveGamma"])
        report = validate_game(PopulationGame.create((Affine(1.0, -1.0), Affine(1.0, 1.0)), [[0, 1], [1, 0]]))
        self.assertEqual([(v.kind, v.indices) for v in report], [("InvalidUtilityParameter", (0,))])

    def test_non_finite(self):
        costs = np.array(game.costs.matrix)
        costs[1, 0] = math.inf
        report = validate_game(PopulationGame(3, game.utilities, costs))
        self.assertEqual([v.kind for v in report], ["NonFiniteEntry"])
        self.assertRaises(PreconditionViolated, require_valid, PopulationGame(3, game.utilities, costs))

    def test_validation_is_repeatable(self):
        costs = np.array(game.costs.matrix)
        costs[0, 1] = -0.1
        costs[2, 2] = 0.5
        broken = PopulationGame(3, game.utilities, costs, gamma=-1.0)
        before = broken.costs.matrix.copy()
        first = validate_game(broken)
        self.assertEqual(validate_game(broken), first)
        self.assertEqual(len(first), 3)
        np.testing.assert_array_equal(broken.costs.matrix, before)
        self.assertEqual(broken.gamma, -1.0)
        self.assertEqual(validate_game(game), validate_game(game))

    def test_zero_c_min_warning(self):
        report = validate_for_better_response(extend_with_exit(game, 0.0))
        self.assertEqual([(v.kind, v.severity) for v in report], [("ZeroCMin", "warning")])


class TestGameOperations(unittest.TestCase):
    def test_lipschitz(self):
        bounds = lipschitz_bounds(game)
        np.testing.assert_array_equal(bounds.per_action, [1.0, 1.0, 1.0])
        self.assertEqual(bounds.global_bound, 1.0)

    def test_c_min(self):
        self.assertAlmostEqual(game.c_min, 0.1)
        self.assertEqual(SwitchingCosts([[0.0]]).c_min, math.inf)

    def test_exit_round_trip(self):
        extended = extend_with_exit(game, 0.25)
        self.assertEqual(extended.n, 4)
        np.testing.assert_array_equal(extended.costs.matrix[3], np.zeros(4))
        np.testing.assert_array_equal(extended.costs.matrix[:, 3], np.zeros(4))
        self.assertEqual(extended.c_min, 0.0)
        self.assertEqual(float(extended.utilities[3].value(0.6)), 0.25)
        self.assertEqual(remove_action(extended, 3), game)

    def test_dimension_mismatch(self):
        self.assertRaises(DimensionMismatch, evaluate_utilities, game, [0.5, 0.5])

    def test_dict_round_trip(self):
        self.assertEqual(PopulationGame.from_dict(game.to_dict()), game)


class TestSimplexPoint(unittest.TestCase):
    def test_of(self):
        point = SimplexPoint.of([0.4, 0.3, 0.3], 1.0)
        self.assertEqual(point.n, 3)
        self.assertEqual(point.tolist(), [0.4, 0.3, 0.3])

    def test_rejects(self):
        self.assertRaises(InvalidPoint, SimplexPoint.of, [0.6, 0.6], 1.0)
        self.assertRaises(InvalidPoint, SimplexPoint.of, [1.1, -0.1], 1.0)
        self.assertRaises(InvalidPoint, SimplexPoint.of, [0.5, 0.5], 0.0)
        self.assertRaises(InvalidPoint, SimplexPoint.of, [math.nan, 1.0], 1.0)

    def test_clamps_rounding(self):
        point = SimplexPoint.of([1.0 + 1e-14, -1e-14], 1.0)
        self.assertEqual(point.x[1], 0.0)

    def test_uniform_and_sampling(self):
        np.testing.assert_allclose(SimplexPoint.uniform(4, 2.0).x, [0.5] * 4)
        samples = sample_simplex(np.random.default_rng(3), 5, 2.0, size=100)
        np.testing.assert_allclose(samples.sum(axis=1), 2.0, atol=1e-12)
        self.assertTrue((samples >= 0).all())


if __name__ == '__main__':
    unittest.main()
