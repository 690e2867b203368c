# -*- coding=utf-8 -*-
"""
Population games with switching costs.

A game has ``n`` actions, one separable utility ``u_i(x_i)`` per action, a
switching-cost matrix ``C`` (``C[i, j]`` is the cost of moving from ``i`` to
``j``) and a total agent mass ``gamma``. Agent distributions are points of
the weighted simplex ``{x >= 0, sum(x) = gamma}``.

All indices are 0-based.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy import integrate

from .exception import DimensionMismatch, GameFormatError, InvalidPoint, PreconditionViolated, UnboundedSlope
from .params import DEFAULTS, check_params

logger = logging.getLogger(__name__)

TOL_SIMPLEX = DEFAULTS["TOL_SIMPLEX"]

AFFINE = "affine"
RIDE_HAILING = "ride_hailing"
CONSTANT = "constant"


class UtilityModel(object):
    kind = None

    def value(self, x):
        raise NotImplementedError

    def slope_bound(self):
        raise UnboundedSlope("No closed-form slope bound for utility family %s." % self.kind)

    def integral(self, x):
        raise NotImplementedError

    def is_nonincreasing(self):
        return True

    def parameter_problems(self):
        return []

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Affine(UtilityModel):
    a: float
    b: float

    kind = AFFINE

    def value(self, x):
        return self.a - self.b * np.asarray(x, dtype=float)

    def slope_bound(self):
        return abs(float(self.b))

    def integral(self, x):
        return self.a * x - 0.5 * self.b * x * x

    def is_nonincreasing(self):
        return self.b >= 0

    def parameter_problems(self):
        problems = []
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            problems.append("non-finite parameter")
        elif self.b < 0:
            problems.append("b=%s must be >= 0" % self.b)
        return problems

    def to_dict(self):
        return {"kind": AFFINE, "a": float(self.a), "b": float(self.b)}


@dataclass(frozen=True)
class RideHailing(UtilityModel):
    """
    Profit of a driver in a neighbourhood holding a fraction ``x`` of the fleet:
    ``u(x) = alpha * v(x) - (1 - v(x)) * beta`` with occupancy
    ``v(x) = 1 - (x / (1 + x)) ** p``.
    """
    alpha: float
    beta: float
    p: float

    kind = RIDE_HAILING

    def occupancy(self, x):
        x = np.asarray(x, dtype=float)
        return 1.0 - (x / (1.0 + x)) ** self.p

    def value(self, x):
        v = self.occupancy(x)
        return self.alpha * v - (1.0 - v) * self.beta

    def slope_bound(self):
        # sup over x >= 0 of |u'(x)| = (alpha + beta) * p * s^(p-1) * (1-s)^2, attained at s = (p-1)/(p+1)
        p = float(self.p)
        if p < 1:
            raise UnboundedSlope("Ride-hailing utility with p=%s < 1 has unbounded slope at 0." % p)
        return 4.0 * abs(self.alpha + self.beta) * p * (p - 1.0) ** (p - 1.0) / (p + 1.0) ** (p + 1.0)

    def integral(self, x):
        if x <= 0:
            return 0.0
        vacancy, _ = integrate.quad(lambda s: (s / (1.0 + s)) ** self.p, 0.0, x)
        return self.alpha * x - (self.alpha + self.beta) * vacancy

    def is_nonincreasing(self):
        return self.alpha + self.beta >= 0

    def parameter_problems(self):
        problems = []
        if not all(math.isfinite(v) for v in (self.alpha, self.beta, self.p)):
            problems.append("non-finite parameter")
            return problems
        if self.beta < 0:
            problems.append("beta=%s must be >= 0" % self.beta)
        if self.p <= 1:
            problems.append("p=%s must be > 1" % self.p)
        return problems

    def to_dict(self):
        return {"kind": RIDE_HAILING, "alpha": float(self.alpha), "beta": float(self.beta), "p": float(self.p)}


@dataclass(frozen=True)
class Constant(UtilityModel):
    c: float

    kind = CONSTANT

    def value(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.c)

    def slope_bound(self):
        return 0.0

    def integral(self, x):
        return self.c * x

    def parameter_problems(self):
        return [] if math.isfinite(self.c) else ["non-finite parameter"]

    def to_dict(self):
        return {"kind": CONSTANT, "c": float(self.c)}


_UTILITY_FIELDS = {
    AFFINE: (Affine, ("a", "b")),
    RIDE_HAILING: (RideHailing, ("alpha", "beta", "p")),
    CONSTANT: (Constant, ("c",)),
}


def utility_from_dict(d):
    if not isinstance(d, dict) or "kind" not in d:
        raise GameFormatError("Utility entry must be an object with a 'kind' field, got %r." % (d,))
    kind = str(d["kind"]).replace("-", "_").lower()
    if kind not in _UTILITY_FIELDS:
        raise GameFormatError("Unknown utility kind %r." % d["kind"])
    cls, names = _UTILITY_FIELDS[kind]
    check_params(d, names)
    try:
        return cls(*[float(d[k]) for k in names])
    except (TypeError, ValueError):
        raise GameFormatError("Bad parameters for %s utility: %r." % (kind, d))


@dataclass(frozen=True, eq=False)
class SwitchingCosts(object):
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def c_min(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] < 2 or m.shape[0] != m.shape[1]:
            return math.inf
        off = ~np.eye(m.shape[0], dtype=bool)
        return float(m[off].min())

    def __eq__(self, other):
        return isinstance(other, SwitchingCosts) and self.matrix.shape == other.matrix.shape \
            and bool(np.array_equal(self.matrix, other.matrix))

    def __hash__(self):
        return hash(self.matrix.tobytes())


@dataclass(frozen=True, eq=False)
class PopulationGame(object):
    n: int
    utilities: Tuple[UtilityModel, ...]
    costs: SwitchingCosts
    gamma: float = 1.0
    coupled: bool = False
    _compiled: tuple = field(default=None, init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "utilities", tuple(self.utilities))
        if not isinstance(self.costs, SwitchingCosts):
            object.__setattr__(self, "costs", SwitchingCosts(self.costs))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "_compiled", _compile(self.utilities))

    @classmethod
    def create(cls, utilities, costs, gamma=1.0):
        utilities = tuple(utilities)
        return cls(len(utilities), utilities, costs, gamma)

    @property
    def c_min(self):
        return self.costs.c_min

    def utility_vector(self, x):
        """u(x) for a plain float vector, evaluated family by family."""
        aff_idx, aff_a, aff_b, rh_idx, rh_alpha, rh_beta, rh_p, other_idx = self._compiled
        u = np.empty(len(self.utilities))
        if aff_idx.size:
            u[aff_idx] = aff_a - aff_b * x[aff_idx]
        if rh_idx.size:
            xr = x[rh_idx]
            v = 1.0 - (xr / (1.0 + xr)) ** rh_p
            u[rh_idx] = rh_alpha * v - (1.0 - v) * rh_beta
        for i in other_idx:
            u[i] = self.utilities[i].value(x[i])
        return u

    def to_dict(self):
        d = {
            "n": int(self.n),
            "gamma": float(self.gamma),
            "utilities": [u.to_dict() for u in self.utilities],
            "costs": self.costs.matrix.tolist(),
        }
        if self.coupled:
            d["coupled"] = True
        return d

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise GameFormatError("Game document must be an object.")
        check_params(d, ("n", "gamma", "utilities", "costs"))
        if not isinstance(d["utilities"], list):
            raise GameFormatError("'utilities' must be a list.")
        try:
            n = int(d["n"])
            gamma = float(d["gamma"])
            matrix = np.array(d["costs"], dtype=float)
        except (TypeError, ValueError) as e:
            raise GameFormatError("Bad game document: %s" % e)
        if matrix.ndim != 2:
            raise GameFormatError("'costs' must be a row-major 2-d array.")
        return cls(n, tuple(utility_from_dict(u) for u in d["utilities"]), SwitchingCosts(matrix), gamma,
                   bool(d.get("coupled", False)))

    def __eq__(self, other):
        return isinstance(other, PopulationGame) and self.n == other.n and self.utilities == other.utilities \
            and self.costs == other.costs and self.gamma == other.gamma and self.coupled == other.coupled

    def __hash__(self):
        return hash((self.n, self.utilities, self.costs, self.gamma, self.coupled))


def _compile(utilities):
    aff_idx, aff_a, aff_b, rh_idx, rh_alpha, rh_beta, rh_p, other_idx = [], [], [], [], [], [], [], []
    for i, u in enumerate(utilities):
        if type(u) is Affine:
            aff_idx.append(i)
            aff_a.append(u.a)
            aff_b.append(u.b)
        elif type(u) is Constant:
            aff_idx.append(i)
            aff_a.append(u.c)
            aff_b.append(0.0)
        elif type(u) is RideHailing:
            rh_idx.append(i)
            rh_alpha.append(u.alpha)
            rh_beta.append(u.beta)
            rh_p.append(u.p)
        else:
            other_idx.append(i)
    return (np.array(aff_idx, dtype=int), np.array(aff_a, dtype=float), np.array(aff_b, dtype=float),
            np.array(rh_idx, dtype=int), np.array(rh_alpha, dtype=float), np.array(rh_beta, dtype=float),
            np.array(rh_p, dtype=float), tuple(other_idx))


@dataclass(frozen=True, eq=False)
class SimplexPoint(object):
    x: np.ndarray
    mass: float

    @classmethod
    def of(cls, values, mass, tol=TOL_SIMPLEX):
        x = np.array(values, dtype=float).reshape(-1)
        mass = float(mass)
        if not (math.isfinite(mass) and mass > 0):
            raise InvalidPoint("Simplex mass must be > 0, got %s." % mass)
        if x.size == 0:
            raise InvalidPoint("Empty point.")
        if not np.all(np.isfinite(x)):
            raise InvalidPoint("Point has non-finite components.")
        scale = max(1.0, mass)
        if x.min() < -tol * scale:
            raise InvalidPoint("Component %d = %r is negative." % (int(np.argmin(x)), float(x.min())))
        x[x < 0] = 0.0
        if abs(x.sum() - mass) > tol * scale:
            raise InvalidPoint("Components sum to %r, expected mass %r." % (float(x.sum()), mass))
        x.setflags(write=False)
        return cls(x, mass)

    @classmethod
    def uniform(cls, n, mass=1.0):
        return cls.of(np.full(n, mass / n), mass)

    @property
    def n(self):
        return self.x.shape[0]

    def __len__(self):
        return self.n

    def tolist(self):
        return self.x.tolist()

    def __eq__(self, other):
        return isinstance(other, SimplexPoint) and self.mass == other.mass and bool(np.array_equal(self.x, other.x))

    def __hash__(self):
        return hash((self.x.tobytes(), self.mass))


@dataclass(frozen=True)
class Violation(object):
    kind: str
    indices: tuple = ()
    detail: str = ""
    severity: str = "error"

    def __str__(self):
        where = ",".join(str(i + 1) for i in self.indices)
        return "%s(%s)%s" % (self.kind, where, ": " + self.detail if self.detail else "")


@dataclass(frozen=True)
class LipschitzBounds(object):
    per_action: np.ndarray
    global_bound: float


def as_vector(game, x):
    v = x.x if isinstance(x, SimplexPoint) else np.asarray(x, dtype=float).reshape(-1)
    if v.shape[0] != game.n:
        raise DimensionMismatch("Point has %d components, game has %d actions." % (v.shape[0], game.n))
    return v


def validate_game(game):
    violations = []
    n = game.n
    if not isinstance(n, (int, np.integer)) or n < 1:
        violations.append(Violation("UtilityCountMismatch", (), "n=%r must be a positive integer" % (n,)))
        return violations
    if len(game.utilities) != n:
        violations.append(Violation("UtilityCountMismatch", (), "%d utilities for n=%d" % (len(game.utilities), n)))
    m = game.costs.matrix
    if m.ndim != 2 or m.shape != (n, n):
        violations.append(Violation("CostShapeMismatch", (), "cost matrix shape %s for n=%d" % (m.shape, n)))
    if m.ndim == 2:
        rows, cols = m.shape
        for i in range(rows):
            for j in range(cols):
                c = m[i, j]
                if not math.isfinite(c):
                    violations.append(Violation("NonFiniteEntry", (i, j), "c=%r" % c))
                elif c < 0:
                    violations.append(Violation("NegativeCost", (i, j), "c=%r" % c))
        for i in range(min(rows, cols)):
            if math.isfinite(m[i, i]) and m[i, i] != 0:
                violations.append(Violation("NonzeroDiagonal", (i,), "c=%r" % m[i, i]))
    if not (math.isfinite(game.gamma) and game.gamma > 0):
        violations.append(Violation("NonPositiveGamma", (), "gamma=%r" % game.gamma))
    for i, u in enumerate(game.utilities):
        for problem in u.parameter_problems():
            violations.append(Violation("InvalidUtilityParameter", (i,), problem))
    if game.coupled:
        violations.append(Violation("CoupledUnsupported", (), "only separable utilities u_i(x_i) are supported"))
    return violations


def validate_for_better_response(game):
    report = validate_game(game)
    if not report and game.c_min <= 0:
        report.append(Violation("ZeroCMin", (), "c_min=%r, convergence guarantee needs c_min > 0" % game.c_min,
                                severity="warning"))
    return report


def require_valid(game):
    violations = validate_game(game)
    if violations:
        logger.error("[require-valid] invalid game: %s" % "; ".join(str(v) for v in violations))
        raise PreconditionViolated("Invalid game: %s" % "; ".join(str(v) for v in violations), violations)
    return game


def evaluate_utilities(game, x):
    return game.utility_vector(as_vector(game, x))


def lipschitz_bounds(game):
    per_action = np.array([u.slope_bound() for u in game.utilities], dtype=float)
    return LipschitzBounds(per_action, float(per_action.max()) if per_action.size else 0.0)


def extend_with_exit(game, u_e):
    """Add a non-engaging action with constant utility ``u_e`` reachable from and to every action for free."""
    matrix = np.pad(game.costs.matrix, ((0, 1), (0, 1)), mode="constant", constant_values=0.0)
    return PopulationGame(game.n + 1, game.utilities + (Constant(float(u_e)),), SwitchingCosts(matrix), game.gamma,
                          game.coupled)


def remove_action(game, index):
    if not 0 <= index < game.n:
        raise DimensionMismatch("Action %d out of range for n=%d." % (index, game.n))
    matrix = np.delete(np.delete(game.costs.matrix, index, axis=0), index, axis=1)
    utilities = game.utilities[:index] + game.utilities[index + 1:]
    return PopulationGame(game.n - 1, utilities, SwitchingCosts(matrix), game.gamma, game.coupled)


def sample_simplex(rng, n, mass, size=None):
    """Uniform samples on {x >= 0, sum(x) = mass} from normalised unit-rate exponentials."""
    shape = (n,) if size is None else (size, n)
    e = rng.exponential(1.0, size=shape)
    return mass * (e / e.sum(axis=-1, keepdims=True))
