# -*- coding=utf-8 -*-
"""
Equilibrium certificates.

``x`` is an inertial equilibrium when no action holding mass has an envy
set, i.e. no alternative ``j`` with ``u_j - c_ij > u_i``. The operator

    F_i(x) = max_j (u_j(x) - u_i(x) - c_ij)

turns that condition into a variational inequality over the simplex, whose
gap ``F(x).x - gamma * min_i F_i(x)`` vanishes exactly at inertial points.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Optional, Tuple

import numpy as np

from .exception import InvalidSpec, StepTooLarge
from .game import as_vector, sample_simplex
from .params import DEFAULTS

logger = logging.getLogger(__name__)

ENVY_TOL = DEFAULTS["ENVY_TOL"]
ARGMAX_TOL = DEFAULTS["ARGMAX_TOL"]
FD_STEP = DEFAULTS["FD_STEP"]

MONOTONE_UP_TO_SAMPLING = "Monotone-up-to-sampling"
NOT_MONOTONE = "NotMonotone"

OPERATOR_F = "F"
OPERATOR_MINUS_U = "minus_u"


@dataclass(frozen=True)
class Witness(object):
    i: int
    j: int
    u_i: float
    u_j: float
    c_ij: float = 0.0

    @property
    def margin(self):
        return (self.u_j - self.c_ij) - self.u_i

    def __str__(self):
        return "%d→%d (%.6g < %.6g)" % (self.i + 1, self.j + 1, self.u_i, self.u_j - self.c_ij)


@dataclass(frozen=True)
class EnvyReport(object):
    sets: Tuple[FrozenSet[int], ...]
    witnesses: Dict[Tuple[int, int], Tuple[float, float, float]] = field(default_factory=dict)

    def is_empty(self):
        return not self.witnesses

    def edges(self):
        return sorted(self.witnesses)

    def first_witness(self):
        if not self.witnesses:
            return None
        i, j = self.edges()[0]
        u_i, u_j, c_ij = self.witnesses[(i, j)]
        return Witness(i, j, u_i, u_j, c_ij)


@dataclass(frozen=True)
class InertialVerdict(object):
    verdict: bool
    report: EnvyReport
    witness: Optional[Witness] = None


@dataclass(frozen=True)
class NashVerdict(object):
    verdict: bool
    witness: Optional[Witness] = None


@dataclass(frozen=True)
class OperatorEval(object):
    F: np.ndarray
    argmax_sets: Tuple[FrozenSet[int], ...]
    gap: float


@dataclass(frozen=True)
class ProbeResult(object):
    verdict: str
    witness: Optional[dict]
    worst_pair_product: float
    worst_pair: Optional[Tuple[np.ndarray, np.ndarray]]
    worst_eigenvalue: float
    worst_eigen_location: Optional[np.ndarray]
    pairs_checked: int
    jacobians_checked: int


def gain_matrix(u, c):
    """``G[i, j] = u_j - u_i - c_ij``."""
    return u[None, :] - u[:, None] - c


def operator_values(u, c):
    return gain_matrix(u, c).max(axis=1)


def envy_mask(u, c, x, tol):
    return (u[:, None] < u[None, :] - c - tol) & (x[:, None] > tol)


def envy_report(u, c, x, tol):
    mask = envy_mask(u, c, x, tol)
    sets = tuple(frozenset(int(j) for j in np.flatnonzero(row)) for row in mask)
    witnesses = {}
    for i, j in zip(*np.nonzero(mask)):
        witnesses[(int(i), int(j))] = (float(u[i]), float(u[j]), float(c[i, j]))
    return EnvyReport(sets, witnesses)


def gap_value(F, x, mass):
    return float(F @ x - mass * F.min())


def envy_sets(game, x, tol=ENVY_TOL):
    v = as_vector(game, x)
    return envy_report(game.utility_vector(v), game.costs.matrix, v, tol)


def is_inertial(game, x, tol=ENVY_TOL):
    report = envy_sets(game, x, tol)
    return InertialVerdict(report.is_empty(), report, report.first_witness())


def is_nash(game, x, tol=ENVY_TOL):
    v = as_vector(game, x)
    u = game.utility_vector(v)
    best = int(np.argmax(u))
    for i in range(game.n):
        if v[i] > tol and u[i] < u[best] - tol:
            return NashVerdict(False, Witness(i, best, float(u[i]), float(u[best])))
    return NashVerdict(True)


def operator_f(game, x):
    v = as_vector(game, x)
    gains = gain_matrix(game.utility_vector(v), game.costs.matrix)
    F = gains.max(axis=1)
    argmax_sets = tuple(frozenset(int(j) for j in np.flatnonzero(row >= f - ARGMAX_TOL)) for row, f in zip(gains, F))
    return OperatorEval(F, argmax_sets, gap_value(F, v, game.gamma))


def vi_gap(game, x):
    v = as_vector(game, x)
    return gap_value(operator_values(game.utility_vector(v), game.costs.matrix), v, game.gamma)


def fd_jacobian(fn, v, h=FD_STEP):
    """Central finite-difference Jacobian of ``fn`` at ``v``, one column per coordinate."""
    v = np.asarray(v, dtype=float)
    if h <= 0:
        raise StepTooLarge("Finite-difference step must be > 0, got %r." % h)
    if np.any(v - h < 0):
        raise StepTooLarge("Step h=%r leaves the nonnegative orthant at component %d." % (h, int(np.argmin(v))))
    n = v.shape[0]
    J = np.empty((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        J[:, k] = (fn(v + e) - fn(v - e)) / (2.0 * h)
    return J


def jacobian_fd(game, x, h=FD_STEP):
    v = as_vector(game, x)
    c = game.costs.matrix
    return fd_jacobian(lambda z: operator_values(game.utility_vector(z), c), v, h)


def min_symmetric_eigenvalue(J):
    return float(np.linalg.eigvalsh(J + J.T)[0])


def probe_operator(fn, sampler, seed=0, num_samples=10 ** 4, tol=ENVY_TOL, h=FD_STEP):
    """
    Look for a violation of monotonicity of ``fn`` on the set drawn by ``sampler``.

    Checks ``num_samples`` random pairs ``(F(x) - F(y)).(x - y) >= -tol`` and the
    symmetric part of ``num_samples`` finite-difference Jacobians at points at
    least ``2h`` away from the orthant boundary. Finding nothing is never a proof.
    """
    if num_samples < 1:
        raise InvalidSpec("num_samples must be >= 1, got %r." % num_samples)
    rng = np.random.default_rng(seed)

    worst_pair_product, worst_pair = math.inf, None
    for _ in range(num_samples):
        x = sampler(rng)
        y = sampler(rng)
        product = float((fn(x) - fn(y)) @ (x - y))
        if product < worst_pair_product:
            worst_pair_product, worst_pair = product, (x, y)

    worst_eigenvalue, worst_location = math.inf, None
    checked, attempts = 0, 0
    while checked < num_samples and attempts < 100 * num_samples:
        attempts += 1
        z = sampler(rng)
        if z.min() <= 2 * h:
            continue
        eigenvalue = min_symmetric_eigenvalue(fd_jacobian(fn, z, h))
        checked += 1
        if eigenvalue < worst_eigenvalue:
            worst_eigenvalue, worst_location = eigenvalue, z
    if checked < num_samples:
        logger.warning("[probe] only %s of %s jacobian samples were away from the boundary" % (checked, num_samples))

    witness = None
    if worst_pair_product < -tol:
        witness = {"kind": "pair", "x": worst_pair[0].tolist(), "y": worst_pair[1].tolist(),
                   "value": worst_pair_product}
    elif worst_eigenvalue < -tol:
        witness = {"kind": "jacobian", "x": worst_location.tolist(), "value": worst_eigenvalue}
    verdict = NOT_MONOTONE if witness else MONOTONE_UP_TO_SAMPLING
    logger.info("[probe] seed:%s, samples:%s, verdict:%s, worst pair:%s, worst eigenvalue:%s" % (
        seed, num_samples, verdict, worst_pair_product, worst_eigenvalue))
    return ProbeResult(verdict, witness, worst_pair_product, worst_pair, worst_eigenvalue, worst_location,
                       num_samples, checked)


def monotonicity_probe(operator, game, seed=0, num_samples=10 ** 4, tol=ENVY_TOL, h=FD_STEP):
    name = str(operator).replace("-", "_")
    c = game.costs.matrix
    if name == OPERATOR_F:
        fn = lambda z: operator_values(game.utility_vector(z), c)
    elif name == OPERATOR_MINUS_U:
        fn = lambda z: -game.utility_vector(z)
    else:
        raise InvalidSpec("Unknown operator %r, expected F or minus_u." % operator)
    return probe_operator(fn, lambda rng: sample_simplex(rng, game.n, game.gamma), seed, num_samples, tol, h)
