import os

from .exception import GameFormatError

DEFAULTS = {
    "TOL_SIMPLEX": 1e-12,
    "ENVY_TOL": 1e-9,
    "SOLVER_TOL": 1e-6,  # on ||x(k+1) - x(k)||_2
    "FD_STEP": 1e-6,
    "ARGMAX_TOL": 1e-12,
    "STATE_MATCH_TOL": 1e-10,
    "CYCLE_WINDOW": 64,
    "MAX_ITER": 10 ** 6,
    "THIN_AFTER": 10 ** 5,
    "THIN_EVERY": 100,
    "BIG_COST": 1e6,
    "BETA": 6.34,
    "SEED": 0,
    "RHO_FACTOR": 1.0,
    "TAU_FACTOR": 0.9,
    "EPSILON_FACTOR": 0.1,
}

SEED_ENV = "INERTIAL_SEED"

POLICY_NAMES = ("equal-share", "per-target", "utility-weighted", "fixed")
ALGORITHMS = ("projection", "better-response")


def default_seed():
    value = os.getenv(SEED_ENV)
    if value is None or not value.strip():
        return DEFAULTS["SEED"]
    try:
        seed = int(value)
    except ValueError:
        raise GameFormatError("%s must be an unsigned integer, got %r" % (SEED_ENV, value))
    if seed < 0:
        raise GameFormatError("%s must be an unsigned integer, got %r" % (SEED_ENV, value))
    return seed


def parse_vector(text):
    """Parse an inline vector such as ``0.4,0.3,0.3`` (brackets allowed)."""
    if text is None or not text.strip():
        raise GameFormatError("Empty vector.")
    body = text.strip().lstrip("[").rstrip("]")
    values = []
    for item in body.split(","):
        item = item.strip()
        if not item:
            raise GameFormatError("Empty component in vector %r." % text)
        try:
            values.append(float(item))
        except ValueError:
            raise GameFormatError("Bad component %r in vector %r." % (item, text))
    return values


def parse_range(text):
    values = parse_vector(text)
    if len(values) != 2:
        raise GameFormatError("A range needs exactly two numbers, got %r." % text)
    return values[0], values[1]


def check_params(params, required):
    missing = [k for k in required if k not in params]
    if missing:
        raise GameFormatError("Missing field(s): %s." % ", ".join(missing))
    return True
