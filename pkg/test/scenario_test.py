# -*- coding: utf8 -*-

import os
import shutil
import tempfile
import unittest

import numpy as np

from inertial.equilibrium import is_inertial
from inertial.exception import InvalidGraph, InvalidSpec, ZeroCMin, ZeroLipschitz
from inertial.files import save_json
from inertial.game import Constant, PopulationGame, extend_with_exit, lipschitz_bounds, sample_simplex, \
    validate_game
from inertial.scenario import CityGraph, Edge, Node, RandomGameSpec, build_ridehailing, bundled_scenario, \
    example_one, load_scenario, random_game, random_simplex_point, recommended_params, uniform_point
from inertial.solver import EqualShare, Status, better_response_solve, projection_solve

city = bundled_scenario()
city_game = city.build()


def triangle(cost=2.0):
    nodes = [Node(1, 50.0, 2.0), Node(2, 60.0, 2.0), Node(3, 70.0, 2.0)]
    edges = [Edge(1, 2, cost), Edge(2, 3, cost), Edge(1, 3, cost)]
    return CityGraph(nodes, edges)


class TestCityGraph(unittest.TestCase):
    def test_bundled(self):
        self.assertEqual(city_game.n, 18)
        self.assertEqual(city.gamma, 1.0)
        m = city_game.costs.matrix
        np.testing.assert_array_equal(m, m.T)
        np.testing.assert_array_equal(np.diag(m), np.zeros(18))
        self.assertAlmostEqual(city_game.c_min, 4.4)
        self.assertEqual(validate_game(city_game), [])

    def test_bundled_utilities(self):
        L = lipschitz_bounds(city_game).global_bound
        grid = np.linspace(0.0, 1.0, 10 ** 4)
        for node, u in zip(city.graph.nodes, city_game.utilities):
            values = u.value(grid)
            self.assertEqual(float(values[0]), node.alpha)
            self.assertTrue((np.diff(values) <= 0).all())
            self.assertLessEqual(np.abs(np.diff(values) / np.diff(grid)).max(), L)

    def test_triangle(self):
        game = build_ridehailing(triangle(), 1.0)
        np.testing.assert_array_equal(game.costs.matrix, 2.0 * (1 - np.eye(3)))

    def test_path_uses_big_cost(self):
        nodes = [Node(k, 50.0, 2.0) for k in range(1, 5)]
        edges = [Edge(1, 2, 3.0), Edge(2, 3, 3.0), Edge(3, 4, 3.0)]
        game = build_ridehailing(CityGraph(nodes, edges, big_cost=1e6), 1.0)
        self.assertEqual(game.costs.matrix[0, 1], 3.0)
        self.assertEqual(game.costs.matrix[0, 3], 1e6)
        self.assertEqual(game.costs.matrix[3, 0], 1e6)

    def test_invalid_graphs(self):
        nodes = [Node(1, 50.0, 2.0), Node(2, 60.0, 2.0)]
        self.assertRaises(InvalidGraph, build_ridehailing, CityGraph(nodes, [Edge(1, 3, 1.0)]), 1.0)
        self.assertRaises(InvalidGraph, build_ridehailing, CityGraph(nodes, [Edge(1, 2, 0.0)]), 1.0)
        self.assertRaises(InvalidGraph, build_ridehailing, CityGraph(nodes, [Edge(1, 2, 1.0), Edge(2, 1, 2.0)]), 1.0)
        self.assertRaises(InvalidGraph, build_ridehailing, CityGraph([nodes[0], nodes[0]], []), 1.0)
        self.assertRaises(InvalidGraph, build_ridehailing, CityGraph([Node(1, 50.0, 1.0)], []), 1.0)

    def test_self_loop_ignored(self):
        nodes = [Node(1, 50.0, 2.0), Node(2, 60.0, 2.0)]
        game = build_ridehailing(CityGraph(nodes, [Edge(1, 2, 1.5), Edge(2, 2, 9.0)]), 1.0)
        np.testing.assert_array_equal(game.costs.matrix, [[0.0, 1.5], [1.5, 0.0]])

    def test_gamma(self):
        self.assertRaises(InvalidSpec, build_ridehailing, triangle(), 0.0)

    def test_networkx_view(self):
        graph = city.graph.to_networkx()
        self.assertEqual(graph.number_of_nodes(), 18)
        self.assertEqual(graph.number_of_edges(), len(city.graph.edges))

    def test_load_scenario(self):
        base = tempfile.mkdtemp()
        try:
            with open(os.path.join(base, "nodes.csv"), "w") as f:
                f.write("id,alpha,p\n1,50,2\n2,60,2\n3,70,2\n")
            with open(os.path.join(base, "edges.csv"), "w") as f:
                f.write("i,j,fuel_cost\n1,2,2\n2,3,2\n1,3,2\n")
            save_json(os.path.join(base, "city.json"),
                      {"nodes_path": "nodes.csv", "edges_path": "edges.csv", "gamma": 2.0})
            scenario = load_scenario(os.path.join(base, "city.json"))
            self.assertEqual(scenario.gamma, 2.0)
            self.assertEqual(scenario.graph, triangle())
            self.assertEqual(scenario.build().gamma, 2.0)
        finally:
            shutil.rmtree(base)


class TestRecommendedParams(unittest.TestCase):
    def test_reference_game(self):
        params = recommended_params(example_one())
        self.assertAlmostEqual(params.rho, 1.0)
        self.assertAlmostEqual(params.tau, 0.09)
        self.assertAlmostEqual(params.epsilon, 0.01)

    def test_doubling_mass_halves_tau(self):
        g = example_one()
        doubled = PopulationGame(g.n, g.utilities, g.costs, 2.0)
        self.assertAlmostEqual(recommended_params(doubled).tau, 0.045)

    def test_guarantee_holds(self):
        for seed in range(20):
            g = random_game(seed, 4)
            params = recommended_params(g)
            L = lipschitz_bounds(g).global_bound
            self.assertLess(params.rho, 2.0 / L)
            self.assertLessEqual(params.tau * g.gamma, g.c_min / L - params.epsilon + 1e-12)

    def test_degenerate(self):
        self.assertRaises(ZeroCMin, recommended_params, extend_with_exit(example_one(), 0.5))
        flat = PopulationGame.create((Constant(1.0), Constant(2.0)), [[0.0, 1.0], [1.0, 0.0]])
        self.assertRaises(ZeroLipschitz, recommended_params, flat)
        self.assertRaises(InvalidSpec, recommended_params, PopulationGame.create((Constant(1.0),), [[0.0]]))


class TestRandomGames(unittest.TestCase):
    def test_deterministic(self):
        self.assertEqual(random_game(42, 6), random_game(42, 6))
        self.assertNotEqual(random_game(42, 6), random_game(43, 6))

    def test_ranges(self):
        for seed in range(20):
            g = random_game(seed, 5)
            self.assertEqual(validate_game(g), [])
            self.assertGreaterEqual(g.c_min, 0.1)
            L = lipschitz_bounds(g).global_bound
            self.assertGreaterEqual(L, 0.5)
            self.assertLessEqual(L, 2.0)

    def test_ride_hailing_family(self):
        spec = RandomGameSpec(family="ride_hailing", cost_range=(1.0, 5.0), symmetric_costs=True)
        g = random_game(1, 6, spec)
        self.assertEqual(validate_game(g), [])
        np.testing.assert_array_equal(g.costs.matrix, g.costs.matrix.T)

    def test_bad_spec(self):
        self.assertRaises(InvalidSpec, random_game, 0, 3, RandomGameSpec(cost_range=(0.0, 1.0)))
        self.assertRaises(InvalidSpec, random_game, 0, 3, RandomGameSpec(family="quadratic"))
        self.assertRaises(InvalidSpec, random_game, 0, 0)

    def test_simplex_points(self):
        x = random_simplex_point(5, 4, 2.0)
        self.assertAlmostEqual(x.x.sum(), 2.0, places=12)
        self.assertEqual(random_simplex_point(5, 4, 2.0), x)
        self.assertEqual(random_simplex_point(5, 1).tolist(), [1.0])
        samples = sample_simplex(np.random.default_rng(0), 4, 1.0, size=10 ** 5)
        np.testing.assert_allclose(samples.mean(axis=0), [0.25] * 4, rtol=0.01)


class TestCityConvergence(unittest.TestCase):
    def test_projection(self):
        params = recommended_params(city_game)
        result = projection_solve(city_game, uniform_point(city_game), params.projection_config())
        self.assertEqual(result.status, Status.CONVERGED)
        self.assertTrue(is_inertial(city_game, result.x_final).verdict)

    def test_better_response(self):
        params = recommended_params(city_game)
        result = better_response_solve(city_game, uniform_point(city_game), EqualShare(params.tau),
                                       params.better_response_config())
        self.assertEqual(result.status, Status.CONVERGED)
        self.assertTrue(result.verified_inertial)
        self.assertAlmostEqual(result.x_final.x.sum(), 1.0, places=12)


if __name__ == '__main__':
    unittest.main()
