# -*- coding=utf-8 -*-
"""
Game builders: the ride-hailing city model, seeded random instances and the
two small reference games used throughout the tests.
"""

import logging
import math
import os.path
from dataclasses import dataclass
from typing import Tuple

import networkx as nx
import numpy as np

from .exception import InvalidGraph, InvalidSpec, ZeroCMin, ZeroLipschitz
from .files import load_json, read_csv
from .game import Affine, PopulationGame, RideHailing, SimplexPoint, SwitchingCosts, lipschitz_bounds, sample_simplex
from .params import DEFAULTS
from .solver import RecommendedParams

logger = logging.getLogger(__name__)

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")
BUNDLED_SCENARIO = "city18.json"

AFFINE_FAMILY = "affine"
RIDE_HAILING_FAMILY = "ride_hailing"


@dataclass(frozen=True)
class Node(object):
    id: int
    alpha: float
    p: float


@dataclass(frozen=True)
class Edge(object):
    i: int
    j: int
    fuel_cost: float


@dataclass(frozen=True)
class CityGraph(object):
    nodes: Tuple[Node, ...]
    edges: Tuple[Edge, ...]
    beta: float = DEFAULTS["BETA"]
    big_cost: float = DEFAULTS["BIG_COST"]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))

    def validate(self):
        if not self.nodes:
            raise InvalidGraph("City graph has no nodes.")
        ids = [node.id for node in self.nodes]
        if len(set(ids)) != len(ids):
            raise InvalidGraph("Duplicate node ids.")
        for node in self.nodes:
            if not (math.isfinite(node.alpha) and math.isfinite(node.p)) or node.p <= 1:
                raise InvalidGraph("Node %s needs finite alpha and p > 1, got alpha=%r, p=%r." % (
                    node.id, node.alpha, node.p))
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise InvalidGraph("beta=%r must be finite and >= 0." % self.beta)
        if not (math.isfinite(self.big_cost) and self.big_cost > 0):
            raise InvalidGraph("big_cost=%r must be finite and > 0." % self.big_cost)
        known = set(ids)
        seen = {}
        for edge in self.edges:
            if edge.i not in known or edge.j not in known:
                raise InvalidGraph("Edge (%s, %s) references an unknown node." % (edge.i, edge.j))
            if not (math.isfinite(edge.fuel_cost) and edge.fuel_cost >= 0):
                raise InvalidGraph("Edge (%s, %s) has fuel cost %r." % (edge.i, edge.j, edge.fuel_cost))
            if edge.i == edge.j:
                logger.warning("[city-graph] self-loop on node %s ignored" % edge.i)
                continue
            if edge.fuel_cost <= 0:
                raise InvalidGraph("Edge (%s, %s) needs a positive fuel cost." % (edge.i, edge.j))
            key = frozenset((edge.i, edge.j))
            if key in seen and seen[key] != edge.fuel_cost:
                raise InvalidGraph("Edge (%s, %s) listed with costs %r and %r." % (
                    edge.i, edge.j, seen[key], edge.fuel_cost))
            seen[key] = edge.fuel_cost
        return self

    def to_networkx(self):
        graph = nx.Graph()
        for node in self.nodes:
            graph.add_node(node.id, alpha=node.alpha, p=node.p)
        for edge in self.edges:
            if edge.i != edge.j:
                graph.add_edge(edge.i, edge.j, fuel_cost=edge.fuel_cost)
        return graph


@dataclass(frozen=True)
class Scenario(object):
    graph: CityGraph
    gamma: float = 1.0

    def build(self):
        return build_ridehailing(self.graph, self.gamma)


def build_ridehailing(graph, gamma):
    graph.validate()
    if not (math.isfinite(gamma) and gamma > 0):
        raise InvalidSpec("gamma=%r must be > 0." % gamma)
    g = graph.to_networkx()
    index = {node.id: k for k, node in enumerate(graph.nodes)}
    n = len(graph.nodes)
    matrix = np.full((n, n), float(graph.big_cost))
    np.fill_diagonal(matrix, 0.0)
    for i, j, data in g.edges(data=True):
        matrix[index[i], index[j]] = matrix[index[j], index[i]] = data["fuel_cost"]
    for node in graph.nodes:
        if node.alpha <= graph.beta:
            logger.warning("[build-ridehailing] node %s has alpha:%s <= beta:%s" % (node.id, node.alpha, graph.beta))
    utilities = tuple(RideHailing(float(node.alpha), float(graph.beta), float(node.p)) for node in graph.nodes)
    logger.info("[build-ridehailing] n:%s, edges:%s, gamma:%s" % (n, g.number_of_edges(), gamma))
    return PopulationGame(n, utilities, SwitchingCosts(matrix), gamma)


def recommended_params(game):
    """rho = 1/L, tau = 0.9 c_min/(L gamma) capped at 1, epsilon = 0.1 c_min/L."""
    if game.n < 2:
        raise InvalidSpec("Recommended parameters need at least two actions.")
    c_min = game.c_min
    if not c_min > 0:
        raise ZeroCMin("c_min=%r, no transfer can be bounded below the switching cost." % c_min)
    L = lipschitz_bounds(game).global_bound
    if not L > 0:
        raise ZeroLipschitz("All utilities are flat, no step size is implied.")
    return RecommendedParams(
        rho=DEFAULTS["RHO_FACTOR"] / L,
        tau=min(1.0, DEFAULTS["TAU_FACTOR"] * c_min / (L * game.gamma)),
        epsilon=DEFAULTS["EPSILON_FACTOR"] * c_min / L,
    )


@dataclass(frozen=True)
class RandomGameSpec(object):
    family: str = AFFINE_FAMILY
    a_range: Tuple[float, float] = (1.0, 2.0)
    b_range: Tuple[float, float] = (0.5, 2.0)
    alpha_range: Tuple[float, float] = (30.0, 140.0)
    beta: float = DEFAULTS["BETA"]
    p_range: Tuple[float, float] = (1.5, 8.0)
    cost_range: Tuple[float, float] = (0.1, 1.0)
    gamma: float = 1.0
    symmetric_costs: bool = False

    def validate(self):
        if self.family not in (AFFINE_FAMILY, RIDE_HAILING_FAMILY):
            raise InvalidSpec("Unknown family %r." % self.family)
        ranges = {"cost_range": self.cost_range}
        if self.family == AFFINE_FAMILY:
            ranges.update(a_range=self.a_range, b_range=self.b_range)
        else:
            ranges.update(alpha_range=self.alpha_range, p_range=self.p_range)
        for name, (lo, hi) in ranges.items():
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise InvalidSpec("%s=(%r, %r) is not a range." % (name, lo, hi))
        if self.cost_range[0] <= 0:
            raise InvalidSpec("cost_range must start above 0, got %r." % (self.cost_range,))
        if self.family == AFFINE_FAMILY and self.b_range[0] < 0:
            raise InvalidSpec("b_range must be >= 0 for non-increasing utilities.")
        if self.family == RIDE_HAILING_FAMILY and (self.p_range[0] <= 1 or self.beta < 0):
            raise InvalidSpec("Ride-hailing instances need p > 1 and beta >= 0.")
        if not self.gamma > 0:
            raise InvalidSpec("gamma=%r must be > 0." % self.gamma)
        return self


def random_game(seed, n, spec=None):
    spec = (spec or RandomGameSpec()).validate()
    if n < 1:
        raise InvalidSpec("n=%r must be >= 1." % n)
    rng = np.random.default_rng(seed)
    if spec.family == AFFINE_FAMILY:
        a = rng.uniform(spec.a_range[0], spec.a_range[1], n)
        b = rng.uniform(spec.b_range[0], spec.b_range[1], n)
        utilities = tuple(Affine(float(ai), float(bi)) for ai, bi in zip(a, b))
    else:
        alpha = rng.uniform(spec.alpha_range[0], spec.alpha_range[1], n)
        p = rng.uniform(spec.p_range[0], spec.p_range[1], n)
        utilities = tuple(RideHailing(float(ai), float(spec.beta), float(pi)) for ai, pi in zip(alpha, p))
    matrix = rng.uniform(spec.cost_range[0], spec.cost_range[1], (n, n))
    if spec.symmetric_costs:
        upper = np.triu(matrix, 1)
        matrix = upper + upper.T
    np.fill_diagonal(matrix, 0.0)
    logger.debug("[random-game] seed:%s, n:%s, family:%s" % (seed, n, spec.family))
    return PopulationGame(n, utilities, SwitchingCosts(matrix), spec.gamma)


def random_simplex_point(seed, n, mass=1.0):
    """Uniform on the simplex; ``seed`` may be an int or a sequence of ints."""
    return SimplexPoint.of(sample_simplex(np.random.default_rng(seed), n, mass), mass)


def uniform_point(game):
    return SimplexPoint.uniform(game.n, game.gamma)


def load_scenario(config_path):
    """
    Read ``{beta, big_cost, gamma, nodes_path, edges_path}``; the CSV paths are
    relative to the config file.
    """
    config = load_json(config_path)
    if not isinstance(config, dict) or "nodes_path" not in config or "edges_path" not in config:
        raise InvalidGraph("Scenario config %s needs nodes_path and edges_path." % config_path)
    base = os.path.dirname(os.path.abspath(config_path))
    nodes = read_csv(os.path.join(base, config["nodes_path"]), ("id", "alpha", "p"))
    edges = read_csv(os.path.join(base, config["edges_path"]), ("i", "j", "fuel_cost"))
    graph = CityGraph(
        tuple(Node(int(r.id), float(r.alpha), float(r.p)) for r in nodes.itertuples(index=False)),
        tuple(Edge(int(r.i), int(r.j), float(r.fuel_cost)) for r in edges.itertuples(index=False)),
        float(config.get("beta", DEFAULTS["BETA"])),
        float(config.get("big_cost", DEFAULTS["BIG_COST"])),
    )
    return Scenario(graph.validate(), float(config.get("gamma", 1.0)))


def bundled_scenario():
    """The synthetic 18-neighbourhood city shipped with the package."""
    return load_scenario(os.path.join(DATA_DIR, BUNDLED_SCENARIO))


def example_one():
    costs = [[0.0, 0.2, 0.3],
             [1.0, 0.0, 0.8],
             [0.1, 1.2, 0.0]]
    return PopulationGame.create((Affine(1.2, 1.0), Affine(1.2, 1.0), Affine(1.0, 1.0)), costs)


def remark_one(c=0.5):
    """Two symmetric actions ``u_i = 1 - x_i`` with switching cost ``c`` both ways."""
    return PopulationGame.create((Affine(1.0, 1.0), Affine(1.0, 1.0)), [[0.0, c], [c, 0.0]])
