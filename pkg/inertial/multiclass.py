# -*- coding=utf-8 -*-
"""
Games with several classes of agents sharing one action set.

Class ``a`` has its own mass, utilities and switching costs, but every
utility is evaluated at the reduced distribution ``x_r = sum_a x^a``.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .equilibrium import ENVY_TOL, FD_STEP, envy_mask, envy_report, gap_value, operator_values, probe_operator
from .exception import DimensionMismatch, GameFormatError, PreconditionViolated, ZeroCMin, ZeroLipschitz
from .game import PopulationGame, SimplexPoint, SwitchingCosts, TOL_SIMPLEX, Violation, lipschitz_bounds, \
    sample_simplex, utility_from_dict, validate_game
from .listener import Event
from .params import DEFAULTS, check_params
from .solver import BOUND_SLACK, RecommendedParams, SolveResult, Status, TrajectoryRecord, TransferViolation, \
    _enforce_bounds, _listener_manager, apply_transfers, detect_cycle, guarantee_problems, inflow_cap, plan_transfers, \
    raise_or_warn, transfer_violations

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MultiClassGame(object):
    A: int
    n: int
    gammas: Tuple[float, ...]
    utilities: Tuple[tuple, ...]
    costs: Tuple[SwitchingCosts, ...]

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "utilities", tuple(tuple(row) for row in self.utilities))
        object.__setattr__(self, "costs", tuple(c if isinstance(c, SwitchingCosts) else SwitchingCosts(c)
                                                for c in self.costs))

    @classmethod
    def from_games(cls, games):
        games = list(games)
        if not games:
            raise DimensionMismatch("A multiclass game needs at least one class.")
        return cls(len(games), games[0].n, [g.gamma for g in games], [g.utilities for g in games],
                   [g.costs for g in games])

    def class_game(self, a):
        """Class ``a`` as a single-class game; its utilities are meant for reduced points."""
        return self.games[a]

    @property
    def games(self):
        cached = self.__dict__.get("_games")
        if cached is None:
            cached = tuple(PopulationGame(self.n, u, c, g) for u, c, g in zip(self.utilities, self.costs, self.gammas))
            object.__setattr__(self, "_games", cached)
        return cached

    @property
    def total_mass(self):
        return float(sum(self.gammas))

    @property
    def c_min(self):
        return min(c.c_min for c in self.costs)

    def lipschitz(self):
        return max(lipschitz_bounds(g).global_bound for g in self.games)

    def to_dict(self):
        return {
            "A": int(self.A),
            "n": int(self.n),
            "gammas": list(self.gammas),
            "classes": [{"utilities": [u.to_dict() for u in row], "costs": c.matrix.tolist()}
                        for row, c in zip(self.utilities, self.costs)],
        }

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise GameFormatError("Multiclass game document must be an object.")
        check_params(d, ("A", "n", "gammas", "classes"))
        classes = d["classes"]
        if not isinstance(classes, list) or not isinstance(d["gammas"], list):
            raise GameFormatError("'classes' and 'gammas' must be lists.")
        utilities, costs = [], []
        for entry in classes:
            check_params(entry, ("utilities", "costs"))
            utilities.append(tuple(utility_from_dict(u) for u in entry["utilities"]))
            try:
                costs.append(SwitchingCosts(np.array(entry["costs"], dtype=float)))
            except (TypeError, ValueError) as e:
                raise GameFormatError("Bad class cost matrix: %s" % e)
        try:
            return cls(int(d["A"]), int(d["n"]), [float(g) for g in d["gammas"]], utilities, costs)
        except (TypeError, ValueError) as e:
            raise GameFormatError("Bad multiclass game document: %s" % e)


def is_multiclass_document(d):
    return isinstance(d, dict) and "classes" in d


def single_class(game):
    return MultiClassGame(1, game.n, [game.gamma], [game.utilities], [game.costs])


@dataclass(frozen=True, eq=False)
class StackedPoint(object):
    blocks: Tuple[SimplexPoint, ...]

    @classmethod
    def of(cls, values, gammas, tol=TOL_SIMPLEX):
        values = list(values)
        if len(values) != len(gammas):
            raise DimensionMismatch("%d blocks for %d classes." % (len(values), len(gammas)))
        return cls(tuple(SimplexPoint.of(v, g, tol) for v, g in zip(values, gammas)))

    @property
    def A(self):
        return len(self.blocks)

    @property
    def n(self):
        return self.blocks[0].n

    def flat(self):
        return np.concatenate([b.x for b in self.blocks])

    def column_names(self):
        return ["x[%d][%d]" % (a + 1, i + 1) for a, b in enumerate(self.blocks) for i in range(b.n)]

    def tolist(self):
        return [b.tolist() for b in self.blocks]


def _check(mc, xs):
    if xs.A != mc.A:
        raise DimensionMismatch("Point has %d blocks, game has %d classes." % (xs.A, mc.A))
    for a, block in enumerate(xs.blocks):
        if block.n != mc.n:
            raise DimensionMismatch("Block %d has %d components, game has %d actions." % (a, block.n, mc.n))


def reduce(xs):
    sizes = {b.n for b in xs.blocks}
    if len(sizes) != 1:
        raise DimensionMismatch("Blocks have different sizes: %s." % sorted(sizes))
    if xs.A == 1:
        return np.array(xs.blocks[0].x)
    return np.sum([b.x for b in xs.blocks], axis=0)


def _class_utilities(mc, x_r):
    return [mc.class_game(a).utility_vector(x_r) for a in range(mc.A)]


def operator_f_multi(mc, xs):
    _check(mc, xs)
    x_r = reduce(xs)
    return np.concatenate([operator_values(u, c.matrix) for u, c in zip(_class_utilities(mc, x_r), mc.costs)])


def vi_gap_multi(mc, xs):
    _check(mc, xs)
    x_r = reduce(xs)
    return float(sum(gap_value(operator_values(u, c.matrix), b.x, g)
                     for u, c, b, g in zip(_class_utilities(mc, x_r), mc.costs, xs.blocks, mc.gammas)))


@dataclass(frozen=True)
class MulticlassVerdict(object):
    verdict: bool
    reports: tuple


def is_multiclass_inertial(mc, xs, tol=ENVY_TOL):
    _check(mc, xs)
    x_r = reduce(xs)
    reports = tuple(envy_report(u, c.matrix, b.x, tol)
                    for u, c, b in zip(_class_utilities(mc, x_r), mc.costs, xs.blocks))
    return MulticlassVerdict(all(r.is_empty() for r in reports), reports)


def validate_multiclass(mc):
    violations = []
    if mc.A < 1:
        return [Violation("ClassCountMismatch", (), "A=%r must be >= 1" % mc.A)]
    for name, items in (("gammas", mc.gammas), ("utilities", mc.utilities), ("costs", mc.costs)):
        if len(items) != mc.A:
            violations.append(Violation("ClassCountMismatch", (), "%d %s for A=%d" % (len(items), name, mc.A)))
    if violations:
        return violations
    for a in range(mc.A):
        for v in validate_game(mc.class_game(a)):
            violations.append(Violation(v.kind, v.indices, "class %d: %s" % (a + 1, v.detail), v.severity))
    return violations


def require_valid_multiclass(mc):
    violations = validate_multiclass(mc)
    if violations:
        logger.error("[require-valid] invalid multiclass game: %s" % "; ".join(str(v) for v in violations))
        raise PreconditionViolated("Invalid multiclass game: %s" % "; ".join(str(v) for v in violations), violations)
    return mc


def recommended_params_multi(mc):
    c_min, L = mc.c_min, mc.lipschitz()
    if not c_min > 0:
        raise ZeroCMin("Smallest switching cost over classes is %r." % c_min)
    if not L > 0:
        raise ZeroLipschitz("All class utilities are flat, no step size is implied.")
    return RecommendedParams(
        rho=DEFAULTS["RHO_FACTOR"] / L,
        tau=min(1.0, DEFAULTS["TAU_FACTOR"] * c_min / (L * mc.total_mass)),
        epsilon=DEFAULTS["EPSILON_FACTOR"] * c_min / L,
    )


def monotonicity_probe_multi(mc, seed=0, num_samples=10 ** 4, tol=ENVY_TOL, h=FD_STEP):
    """The monotonicity probe applied to the stacked operator on the product of class simplexes."""
    costs = [c.matrix for c in mc.costs]
    games = mc.games
    n = mc.n

    def fn(z):
        blocks = z.reshape(mc.A, n)
        x_r = blocks.sum(axis=0)
        return np.concatenate([operator_values(g.utility_vector(x_r), c) for g, c in zip(games, costs)])

    def sampler(rng):
        return np.concatenate([sample_simplex(rng, n, g) for g in mc.gammas])

    return probe_operator(fn, sampler, seed, num_samples, tol, h)


def _record(k, xs, utilities, mc, moved):
    F = [operator_values(u, c.matrix) for u, c in zip(utilities, mc.costs)]
    gap = float(sum(gap_value(f, b.x, g) for f, b, g in zip(F, xs.blocks, mc.gammas)))
    return TrajectoryRecord(k, xs, float(min(u.min() for u in utilities)), gap, float(moved))


def better_response_multi_solve(mc, xs0, policy, cfg, listeners=None):
    """
    Class-wise better response. Envy sets of class ``a`` use its own utilities
    and costs at the reduced point; all classes move synchronously. The
    inflow cap applies to the total inflow over classes, with the smallest
    class switching cost and the largest class slope.
    """
    require_valid_multiclass(mc)
    if cfg.asynchronous:
        raise PreconditionViolated("Asynchronous better response is only available for single-class games.")
    if not isinstance(xs0, StackedPoint):
        xs0 = StackedPoint.of(xs0, mc.gammas)
    _check(mc, xs0)
    for block, g in zip(xs0.blocks, mc.gammas):
        if abs(block.mass - g) > TOL_SIMPLEX * max(1.0, g):
            raise PreconditionViolated("Block mass %r differs from class mass %r." % (block.mass, g))

    L, c_min = mc.lipschitz(), mc.c_min
    utilities_all = [u for row in mc.utilities for u in row]
    raise_or_warn(guarantee_problems(policy, cfg, mc.n, utilities_all, False, mc.total_mass, c_min, L), cfg)
    cap = inflow_cap(c_min, L, cfg.epsilon)
    logger.info("[better-response-multi] A:%s, n:%s, policy:%s, epsilon:%s, L:%s" % (
        mc.A, mc.n, policy.to_dict(), cfg.epsilon, L))

    manager, recorder = _listener_manager(listeners)
    costs = [c.matrix for c in mc.costs]
    xs = xs0
    x_r = reduce(xs)
    utilities = _class_utilities(mc, x_r)
    record = _record(0, xs, utilities, mc, 0.0)
    manager.do_launch(Event.STEP, record)
    window = deque(maxlen=cfg.cycle_window)
    status, period, k = Status.MAX_ITER, None, 0
    while True:
        masks = [envy_mask(u, c, b.x, cfg.envy_tol) for u, c, b in zip(utilities, costs, xs.blocks)]
        if not any(m.any() for m in masks):
            status = Status.CONVERGED
            break
        if k >= cfg.max_iter:
            break
        plans = [plan_transfers(u, c, b.x, policy, cfg.envy_tol) for u, c, b in zip(utilities, costs, xs.blocks)]
        if not cfg.unsafe_allow_bound_violation:
            for mask, plan, b in zip(masks, plans, xs.blocks):
                _enforce_bounds(transfer_violations(mask, b.x, plan, policy.tau, np.inf))
            _enforce_bounds(_aggregate_inflow_violations(plans, mc.n, cap))
        x_next = StackedPoint.of([apply_transfers(b.x, plan) for b, plan in zip(xs.blocks, plans)], mc.gammas)
        step_norm = float(np.linalg.norm(x_next.flat() - xs.flat()))
        window.append(xs.flat())
        xs, k = x_next, k + 1
        x_r = reduce(xs)
        utilities = _class_utilities(mc, x_r)
        record = _record(k, xs, utilities, mc, sum(sum(p.values()) for p in plans))
        manager.do_launch(Event.STEP, record)
        if step_norm <= cfg.tol and is_multiclass_inertial(mc, xs, cfg.verify_tol).verdict:
            status = Status.CONVERGED
            break
        period = detect_cycle(window, xs.flat(), step_norm, cfg.tol)
        if period:
            status = Status.CYCLE_DETECTED
            logger.warning("[better-response-multi] cycle of period %s detected at k:%s" % (period, k))
            break

    manager.do_launch(Event.FINISHED, record)
    verified = is_multiclass_inertial(mc, xs, max(cfg.envy_tol, cfg.verify_tol)).verdict
    if status == Status.CONVERGED and not verified:
        logger.error("[better-response-multi] converged point failed inertial verification")
        status = Status.MAX_ITER
    config = cfg.to_dict()
    config["policy"] = policy.to_dict()
    logger.info("[better-response-multi] status:%s, iterations:%s, gap:%s" % (status.value, k, record.gap))
    return SolveResult(status, xs, k, recorder.records, "better-response", record.gap, verified, period, config)


def _aggregate_inflow_violations(plans, n, cap):
    inflow = np.zeros(n)
    for plan in plans:
        for (i, j), amount in plan.items():
            inflow[j] += amount
    return [TransferViolation("InflowCap", j, inflow[j], cap) for j in range(n)
            if inflow[j] > cap + BOUND_SLACK * max(1.0, abs(cap))]
