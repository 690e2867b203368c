# -*- coding=utf-8 -*-
"""
Equilibrium-seeking dynamics.

* ``projection_solve``: x(k+1) = Proj_S[x(k) + rho * u(x(k))]. Converges to a
  Nash (hence inertial) equilibrium for rho < 2/L on separable non-increasing
  utilities, but ignores switching costs along the way.
* ``better_response_solve``: mass moves only along envy edges, a share of
  every envious action's mass per step. Converges to an inertial equilibrium
  when the per-destination inflow stays below c_min / L.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Optional

import numpy as np
import pandas as pd

from .equilibrium import ENVY_TOL, envy_mask, gain_matrix, gap_value, is_inertial, is_nash
from .exception import BoundViolation, DimensionMismatch, InvalidPoint, NonSeparable, PreconditionViolated, \
    UnboundedSlope
from .game import SimplexPoint, TOL_SIMPLEX, as_vector, lipschitz_bounds, require_valid
from .listener import Event, SimpleListenerManager, TrajectoryRecorder
from .params import DEFAULTS

logger = logging.getLogger(__name__)

SOLVER_TOL = DEFAULTS["SOLVER_TOL"]
STATE_MATCH_TOL = DEFAULTS["STATE_MATCH_TOL"]
BOUND_SLACK = 1e-12


class Status(str, Enum):
    CONVERGED = "Converged"
    MAX_ITER = "MaxIter"
    CYCLE_DETECTED = "CycleDetected"
    PRECONDITION_VIOLATED = "PreconditionViolated"


class _Options(object):

    def with_options(self, **kwargs):
        known = {f.name for f in fields(self)}
        accepted = {}
        for k, v in kwargs.items():
            if k not in known:
                logger.warning("[with-options] unknown option:%s, ignored" % k)
                continue
            logger.debug("[with-options] key:%s, value:%s" % (k, v))
            accepted[k] = v
        return replace(self, **accepted)

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class ProjectionConfig(_Options):
    rho: float
    tol: float = SOLVER_TOL
    max_iter: int = DEFAULTS["MAX_ITER"]
    enforce_guarantee: bool = True
    cycle_window: int = DEFAULTS["CYCLE_WINDOW"]


@dataclass(frozen=True)
class BetterResponseConfig(_Options):
    tau: float
    epsilon: float
    tol: float = SOLVER_TOL
    max_iter: int = DEFAULTS["MAX_ITER"]
    cycle_window: int = DEFAULTS["CYCLE_WINDOW"]
    unsafe_allow_bound_violation: bool = False
    envy_tol: float = ENVY_TOL
    verify_tol: float = ENVY_TOL
    asynchronous: bool = False
    seed: int = 0


@dataclass(frozen=True)
class RecommendedParams(object):
    rho: float
    tau: float
    epsilon: float

    def projection_config(self, **options):
        return ProjectionConfig(self.rho).with_options(**options)

    def better_response_config(self, **options):
        return BetterResponseConfig(self.tau, self.epsilon).with_options(**options)

    def to_dict(self):
        return {"rho": self.rho, "tau": self.tau, "epsilon": self.epsilon}


class RedistributionPolicy(object):
    """Decides how much of an envious action's mass goes to each action it envies."""
    name = None
    tau = None

    def split(self, mass, gains):
        raise NotImplementedError

    def problems(self, n):
        if self.tau is None or not (0 < self.tau <= 1):
            return ["tau=%r must lie in (0, 1]" % (self.tau,)]
        return []

    def to_dict(self):
        return {"name": self.name, "tau": self.tau}


@dataclass(frozen=True)
class EqualShare(RedistributionPolicy):
    tau: float
    name = "equal-share"

    def split(self, mass, gains):
        k = len(gains)
        return np.full(k, self.tau * mass / k)


@dataclass(frozen=True)
class PerTarget(RedistributionPolicy):
    tau: float
    name = "per-target"

    def split(self, mass, gains):
        return np.full(len(gains), self.tau * mass)

    def problems(self, n):
        problems = super(PerTarget, self).problems(n)
        if not problems and self.tau * (n - 1) > 1:
            problems.append("per-target tau=%r needs tau*(n-1) <= 1 for n=%d" % (self.tau, n))
        return problems


@dataclass(frozen=True)
class UtilityWeighted(RedistributionPolicy):
    tau: float
    name = "utility-weighted"

    def split(self, mass, gains):
        gains = np.asarray(gains, dtype=float)
        return self.tau * mass * (gains / gains.sum())


@dataclass(frozen=True)
class FixedAmount(RedistributionPolicy):
    """Moves ``min(amount, x_i)`` out of every envious action. No transfer bounds are implied."""
    amount: float
    name = "fixed"

    def split(self, mass, gains):
        k = len(gains)
        return np.full(k, min(self.amount, mass) / k)

    def problems(self, n):
        return ["fixed-amount policy has no share parameter and gives no convergence guarantee"]

    def to_dict(self):
        return {"name": self.name, "amount": self.amount}


def make_policy(name, tau=None, amount=None):
    if name == EqualShare.name:
        return EqualShare(tau)
    if name == PerTarget.name:
        return PerTarget(tau)
    if name == UtilityWeighted.name:
        return UtilityWeighted(tau)
    if name == FixedAmount.name:
        if amount is None:
            raise PreconditionViolated("The fixed policy needs an amount.")
        return FixedAmount(amount)
    raise PreconditionViolated("Unknown redistribution policy %r." % name)


@dataclass(frozen=True)
class TrajectoryRecord(object):
    k: int
    x: object
    min_utility: float
    gap: float
    moved_mass: float


@dataclass(frozen=True)
class StepResult(object):
    x_next: SimplexPoint
    transfers: dict


@dataclass(frozen=True)
class TransferViolation(object):
    kind: str
    index: int
    value: float
    limit: float

    @property
    def margin(self):
        return abs(self.value - self.limit)


@dataclass(frozen=True)
class BoundsReport(object):
    ok: bool
    violations: tuple = ()


@dataclass
class SolveResult(object):
    status: Status
    x_final: object
    iterations: int
    trajectory: list = field(default_factory=list)
    algorithm: str = ""
    gap_final: float = math.nan
    verified_inertial: bool = False
    period: Optional[int] = None
    config: dict = field(default_factory=dict)
    message: str = ""

    def to_dict(self):
        return {
            "status": self.status.value,
            "iterations": int(self.iterations),
            "x_final": None if self.x_final is None else self.x_final.tolist(),
            "gap_final": None if math.isnan(self.gap_final) else float(self.gap_final),
            "verified_inertial": bool(self.verified_inertial),
            "config_echo": self.config,
            "algorithm": self.algorithm,
            "period": self.period,
            "message": self.message,
        }


def project_simplex(v, mass):
    """Euclidean projection onto {x >= 0, sum(x) = mass} by sorting and thresholding."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if not (mass > 0) or v.size == 0:
        raise InvalidPoint("Projection needs mass > 0 and n >= 1, got mass=%r, n=%d." % (mass, v.size))
    if v.min() >= 0 and abs(v.sum() - mass) <= TOL_SIMPLEX * max(1.0, mass):
        return SimplexPoint.of(v, mass)
    # shifted so the largest entry is 0; cond[0] always holds
    w = v - v.max()
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - mass
    ind = np.arange(1, v.size + 1)
    cond = u - css / ind > 0
    r = ind[cond][-1]
    theta = css[cond][-1] / r
    return SimplexPoint.of(np.maximum(w - theta, 0.0), mass)


def potential_value(game, x):
    """theta(x) = sum_i int_0^{x_i} u_i(s) ds; its gradient is u(x)."""
    if game.coupled:
        raise NonSeparable("The potential is only available for separable utilities.")
    v = as_vector(game, x)
    return float(sum(u.integral(float(xi)) for u, xi in zip(game.utilities, v)))


def _start_point(game, x0):
    if not isinstance(x0, SimplexPoint):
        x0 = SimplexPoint.of(x0, game.gamma)
    if x0.n != game.n:
        raise DimensionMismatch("Start point has %d components, game has %d actions." % (x0.n, game.n))
    if abs(x0.mass - game.gamma) > TOL_SIMPLEX * max(1.0, game.gamma):
        raise PreconditionViolated("Start point mass %r differs from game mass %r." % (x0.mass, game.gamma))
    return x0


def _lipschitz(game):
    try:
        return lipschitz_bounds(game).global_bound
    except UnboundedSlope as e:
        raise PreconditionViolated(str(e))


def _listener_manager(listeners):
    recorder = TrajectoryRecorder()
    manager = SimpleListenerManager().add_listener(recorder)
    for listener in listeners or ():
        manager.add_listener(listener)
    return manager, recorder


def _record(k, point, x, u, c, mass, moved):
    F = gain_matrix(u, c).max(axis=1)
    return TrajectoryRecord(k, point, float(u.min()), gap_value(F, x, mass), float(moved))


def detect_cycle(window, x, step_norm, tol):
    """Period of a recurrence of ``x`` in ``window`` (lag >= 2), ignoring near-stationary motion."""
    if step_norm <= max(tol, STATE_MATCH_TOL):
        return None
    for lag, old in enumerate(reversed(window), start=1):
        if lag >= 2 and np.max(np.abs(x - old)) < STATE_MATCH_TOL:
            return lag
    return None


def projection_solve(game, x0, cfg, listeners=None):
    require_valid(game)
    x = _start_point(game, x0)
    L = _lipschitz(game)
    if cfg.enforce_guarantee:
        problems = []
        if not cfg.rho > 0:
            problems.append("rho=%r must be > 0" % cfg.rho)
        elif L > 0 and not cfg.rho < 2.0 / L:
            problems.append("rho=%r must be < 2/L=%r" % (cfg.rho, 2.0 / L))
        if game.coupled:
            problems.append("utilities must be separable")
        if not all(u.is_nonincreasing() for u in game.utilities):
            problems.append("utilities must be non-increasing")
        if problems:
            logger.error("[projection-solve] precondition violated: %s" % "; ".join(problems))
            raise PreconditionViolated("Projection guarantee violated: %s" % "; ".join(problems))

    logger.info("[projection-solve] n:%s, rho:%s, tol:%s, max_iter:%s" % (game.n, cfg.rho, cfg.tol, cfg.max_iter))
    manager, recorder = _listener_manager(listeners)
    c, mass = game.costs.matrix, game.gamma
    nash_tol = 10 * cfg.tol * max(1.0, L)
    u = game.utility_vector(x.x)
    record = _record(0, x, x.x, u, c, mass, 0.0)
    manager.do_launch(Event.STEP, record)
    window = deque(maxlen=cfg.cycle_window)
    status, period, k = Status.MAX_ITER, None, 0
    while k < cfg.max_iter:
        x_next = project_simplex(x.x + cfg.rho * u, mass)
        delta = x_next.x - x.x
        step_norm = float(np.linalg.norm(delta))
        u = game.utility_vector(x_next.x)
        record = _record(k + 1, x_next, x_next.x, u, c, mass, 0.5 * np.abs(delta).sum())
        manager.do_launch(Event.STEP, record)
        window.append(x.x)
        if step_norm <= cfg.tol and is_nash(game, x_next, nash_tol).verdict:
            x, status = x_next, Status.CONVERGED
            break
        period = detect_cycle(window, x_next.x, step_norm, cfg.tol)
        x = x_next
        k += 1
        if period:
            status = Status.CYCLE_DETECTED
            break
        if k % 10000 == 0:
            logger.debug("[projection-solve] k:%s, step:%s, gap:%s" % (k, step_norm, record.gap))

    manager.do_launch(Event.FINISHED, record)
    result = SolveResult(status, x, k, recorder.records, "projection", record.gap,
                         is_inertial(game, x).verdict, period, cfg.to_dict())
    logger.info("[projection-solve] status:%s, iterations:%s, gap:%s" % (status.value, k, record.gap))
    return result


def guarantee_problems(policy, cfg, n, utilities, coupled, gamma, c_min, L):
    """
    Reasons the convergence guarantee does not hold. ``gamma`` is the total
    mass that can flow into one action in a step, ``c_min`` and ``L`` the
    smallest switching cost and largest slope over everything that moves.
    """
    problems = list(policy.problems(n))
    if c_min <= 0:
        problems.append("c_min=%r must be > 0" % c_min)
    if not all(u.is_nonincreasing() for u in utilities):
        problems.append("utilities must be non-increasing")
    if coupled:
        problems.append("utilities must be separable")
    if not cfg.epsilon > 0:
        problems.append("epsilon=%r must be > 0" % cfg.epsilon)
    if policy.tau is not None and c_min > 0:
        cap = c_min / L - cfg.epsilon if L > 0 else math.inf
        if policy.tau * gamma > cap + BOUND_SLACK * max(1.0, abs(cap)):
            problems.append("tau*gamma=%r exceeds c_min/L - epsilon=%r" % (policy.tau * gamma, cap))
    return problems


def check_preconditions(game, policy, cfg):
    require_valid(game)
    L = _lipschitz(game)
    problems = guarantee_problems(policy, cfg, game.n, game.utilities, game.coupled, game.gamma, game.c_min, L)
    raise_or_warn(problems, cfg)
    return L


def raise_or_warn(problems, cfg):
    if problems:
        if cfg.unsafe_allow_bound_violation:
            logger.warning("[better-response] running unsafe, guarantee broken: %s" % "; ".join(problems))
        else:
            logger.error("[better-response] precondition violated: %s" % "; ".join(problems))
            raise PreconditionViolated("Better-response guarantee violated: %s" % "; ".join(problems))


def plan_transfers(u, c, x, policy, tol):
    """Transfers ``{(i, j): mass}`` along the envy edges of ``x``, frozen at ``x``."""
    mask = envy_mask(u, c, x, tol)
    transfers = {}
    for i in np.flatnonzero(mask.any(axis=1)):
        targets = np.flatnonzero(mask[i])
        amounts = policy.split(x[i], u[targets] - u[i] - c[i, targets])
        _guard_outflow(i, float(amounts.sum()), x[i])
        for j, amount in zip(targets, amounts):
            if amount > 0:
                transfers[(int(i), int(j))] = float(amount)
    return transfers


def _guard_outflow(i, total, available):
    if total > available + BOUND_SLACK * max(1.0, available):
        raise BoundViolation("Policy moves %r out of action %d holding %r." % (total, i, available))


def apply_transfers(x, transfers):
    nxt = np.array(x, dtype=float)
    for (i, j), amount in transfers.items():
        nxt[i] -= amount
        nxt[j] += amount
    nxt[nxt < 0] = 0.0
    return nxt


def _asynchronous_step(game, x, policy, tol, rng):
    c = game.costs.matrix
    cur = np.array(x, dtype=float)
    transfers = {}
    for i in rng.permutation(game.n):
        if cur[i] <= tol:
            continue
        u = game.utility_vector(cur)
        targets = np.flatnonzero(u[i] < u - c[i] - tol)
        if not targets.size:
            continue
        amounts = policy.split(cur[i], u[targets] - u[i] - c[i, targets])
        _guard_outflow(i, float(amounts.sum()), cur[i])
        for j, amount in zip(targets, amounts):
            if amount > 0:
                cur[i] -= amount
                cur[j] += amount
                transfers[(int(i), int(j))] = transfers.get((int(i), int(j)), 0.0) + float(amount)
        cur[cur < 0] = 0.0
    return cur, transfers


def better_response_step(game, x, policy, cfg=None, rng=None):
    v = as_vector(game, x)
    mass = x.mass if isinstance(x, SimplexPoint) else game.gamma
    tol = cfg.envy_tol if cfg else ENVY_TOL
    if cfg is not None and cfg.asynchronous:
        nxt, transfers = _asynchronous_step(game, v, policy, tol, rng or np.random.default_rng(cfg.seed))
    else:
        transfers = plan_transfers(game.utility_vector(v), game.costs.matrix, v, policy, tol)
        nxt = apply_transfers(v, transfers)
    return StepResult(SimplexPoint.of(nxt, mass), transfers)


def inflow_cap(c_min, L, epsilon):
    return c_min / L - epsilon if L > 0 else math.inf


def transfer_violations(mask, x, transfers, tau, cap):
    """
    Lower bound ``sum_j x_ij >= tau * x_i`` for envious actions, outflow at most
    ``x_i``, and inflow into every destination at most ``cap``.
    """
    n = len(x)
    outflow, inflow = np.zeros(n), np.zeros(n)
    violations = []
    for (i, j), amount in sorted(transfers.items()):
        if not mask[i, j]:
            violations.append(TransferViolation("NotEnvyEdge", i, amount, 0.0))
        outflow[i] += amount
        inflow[j] += amount
    for i in range(n):
        slack = BOUND_SLACK * max(1.0, x[i])
        if outflow[i] > x[i] + slack:
            violations.append(TransferViolation("OutflowExceedsMass", i, outflow[i], x[i]))
        if tau is not None and mask[i].any() and outflow[i] < tau * x[i] - slack:
            violations.append(TransferViolation("LowerBound", i, outflow[i], tau * x[i]))
    for j in range(n):
        if inflow[j] > cap + BOUND_SLACK * max(1.0, abs(cap)):
            violations.append(TransferViolation("InflowCap", j, inflow[j], cap))
    return violations


def check_transfer_bounds(game, x, transfers, tau, epsilon, tol=ENVY_TOL):
    v = as_vector(game, x)
    mask = envy_mask(game.utility_vector(v), game.costs.matrix, v, tol)
    violations = transfer_violations(mask, v, transfers, tau, inflow_cap(game.c_min, _lipschitz(game), epsilon))
    return BoundsReport(not violations, tuple(violations))


def _enforce_bounds(violations):
    if violations:
        detail = "; ".join("%s(%d) value:%r limit:%r" % (v.kind, v.index + 1, v.value, v.limit) for v in violations)
        logger.error("[better-response] transfer bounds violated: %s" % detail)
        raise BoundViolation("Transfer bounds violated: %s" % detail)


def better_response_solve(game, x0, policy, cfg, listeners=None):
    L = check_preconditions(game, policy, cfg)
    x = _start_point(game, x0)
    logger.info("[better-response] n:%s, policy:%s, epsilon:%s, L:%s, asynchronous:%s" % (
        game.n, policy.to_dict(), cfg.epsilon, L, cfg.asynchronous))

    manager, recorder = _listener_manager(listeners)
    c, mass = game.costs.matrix, game.gamma
    rng = np.random.default_rng(cfg.seed) if cfg.asynchronous else None
    u = game.utility_vector(x.x)
    record = _record(0, x, x.x, u, c, mass, 0.0)
    manager.do_launch(Event.STEP, record)
    cap = inflow_cap(game.c_min, L, cfg.epsilon)
    window = deque(maxlen=cfg.cycle_window)
    status, period, k = Status.MAX_ITER, None, 0
    while True:
        if not envy_mask(u, c, x.x, cfg.envy_tol).any():
            status = Status.CONVERGED
            break
        if k >= cfg.max_iter:
            break
        if cfg.asynchronous:
            nxt, transfers = _asynchronous_step(game, x.x, policy, cfg.envy_tol, rng)
        else:
            transfers = plan_transfers(u, c, x.x, policy, cfg.envy_tol)
            if not cfg.unsafe_allow_bound_violation:
                mask = envy_mask(u, c, x.x, cfg.envy_tol)
                _enforce_bounds(transfer_violations(mask, x.x, transfers, policy.tau, cap))
            nxt = apply_transfers(x.x, transfers)
        x_next = SimplexPoint.of(nxt, mass)
        step_norm = float(np.linalg.norm(x_next.x - x.x))
        window.append(x.x)
        x, k = x_next, k + 1
        u = game.utility_vector(x.x)
        record = _record(k, x, x.x, u, c, mass, sum(transfers.values()))
        manager.do_launch(Event.STEP, record)
        if step_norm <= cfg.tol and is_inertial(game, x, cfg.verify_tol).verdict:
            status = Status.CONVERGED
            break
        period = detect_cycle(window, x.x, step_norm, cfg.tol)
        if period:
            status = Status.CYCLE_DETECTED
            logger.warning("[better-response] cycle of period %s detected at k:%s" % (period, k))
            break
        if k % 10000 == 0:
            logger.debug("[better-response] k:%s, mu:%s, gap:%s" % (k, record.min_utility, record.gap))

    manager.do_launch(Event.FINISHED, record)
    verified = is_inertial(game, x, max(cfg.envy_tol, cfg.verify_tol)).verdict
    if status == Status.CONVERGED and not verified:
        logger.error("[better-response] converged point failed inertial verification")
        status = Status.MAX_ITER
    config = cfg.to_dict()
    config["policy"] = policy.to_dict()
    logger.info("[better-response] status:%s, iterations:%s, gap:%s" % (status.value, k, record.gap))
    return SolveResult(status, x, k, recorder.records, "better-response", record.gap, verified, period, config)


def trajectory_frame(result):
    rows, columns = [], None
    for r in result.trajectory:
        if isinstance(r.x, SimplexPoint):
            names, values = ["x_%d" % (i + 1) for i in range(r.x.n)], r.x.x.tolist()
        else:
            names, values = r.x.column_names(), r.x.flat().tolist()
        columns = columns or ["k"] + names + ["min_utility", "gap", "moved_mass"]
        rows.append([r.k] + values + [r.min_utility, r.gap, r.moved_mass])
    return pd.DataFrame(rows, columns=columns)
