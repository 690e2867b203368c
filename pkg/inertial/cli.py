# -*- coding=utf-8 -*-
"""
Command-line entry point.

Exit codes: 0 success (verify: point is inertial), 1 verify found envy,
2 bad input or violated precondition, 3 a solver stopped without converging.
"""

import argparse
import logging
import sys

from .commons import fmt_float, fmt_vector, init_log
from .equilibrium import ENVY_TOL, FD_STEP, NOT_MONOTONE, is_inertial, is_nash, monotonicity_probe, vi_gap
from .exception import InertialException, InvalidSpec, PreconditionViolated
from .files import dump_json, load_game, load_point, save_game, save_json, write_csv
from .game import SimplexPoint, lipschitz_bounds
from .multiclass import MultiClassGame, StackedPoint, better_response_multi_solve, is_multiclass_inertial, \
    monotonicity_probe_multi, recommended_params_multi, vi_gap_multi
from .params import ALGORITHMS, DEFAULTS, POLICY_NAMES, default_seed, parse_range
from .scenario import RandomGameSpec, build_ridehailing, bundled_scenario, load_scenario, random_game, \
    random_simplex_point, recommended_params, uniform_point
from .solver import BetterResponseConfig, ProjectionConfig, SolveResult, Status, better_response_solve, make_policy, \
    projection_solve, trajectory_frame
from .task import RepetitionTask, all_converged, summarize

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NOT_INERTIAL = 1
EXIT_INPUT_ERROR = 2
EXIT_NOT_CONVERGED = 3

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _out(text=""):
    sys.stdout.write(text + "\n")


def _flag(value):
    return "true" if value else "false"


def _seed(args):
    return default_seed() if args.seed is None else args.seed


def _point(game, values):
    if isinstance(game, MultiClassGame):
        if not values or not isinstance(values[0], list):
            raise InvalidSpec("A multiclass game needs one block per class, separated by ';'.")
        return StackedPoint.of(values, game.gammas)
    if values and isinstance(values[0], list):
        raise InvalidSpec("A single-class game takes a flat point.")
    return SimplexPoint.of(values, game.gamma)


def cmd_verify(args):
    game = load_game(args.game)
    point = _point(game, load_point(args.point))
    if isinstance(game, MultiClassGame):
        verdict = is_multiclass_inertial(game, point, args.tol)
        _out("inertial: %s" % _flag(verdict.verdict))
        for a, report in enumerate(verdict.reports):
            witness = report.first_witness()
            if witness is not None:
                _out("class %d witness: %s" % (a + 1, witness))
        _out("vi_gap: %s" % fmt_float(vi_gap_multi(game, point)))
        return EXIT_OK if verdict.verdict else EXIT_NOT_INERTIAL

    inertial = is_inertial(game, point, args.tol)
    nash = is_nash(game, point, args.tol)
    line = "inertial: %s, nash: %s" % (_flag(inertial.verdict), _flag(nash.verdict))
    if not inertial.verdict:
        line += ", witness %s" % inertial.witness
    _out(line)
    for i, j in inertial.report.edges():
        u_i, u_j, c_ij = inertial.report.witnesses[(i, j)]
        _out("envy %d→%d: u_i:%s, u_j - c_ij:%s" % (i + 1, j + 1, fmt_float(u_i), fmt_float(u_j - c_ij)))
    if not nash.verdict:
        _out("nash witness: %s" % nash.witness)
    _out("vi_gap: %s" % fmt_float(vi_gap(game, point)))
    return EXIT_OK if inertial.verdict else EXIT_NOT_INERTIAL


def _recommended(game):
    if isinstance(game, MultiClassGame):
        return recommended_params_multi(game)
    return recommended_params(game)


def _start(game, choice, seed):
    if choice == "uniform":
        if isinstance(game, MultiClassGame):
            return StackedPoint.of([[g / game.n] * game.n for g in game.gammas], game.gammas)
        return uniform_point(game)
    if choice == "random":
        if isinstance(game, MultiClassGame):
            return StackedPoint(tuple(random_simplex_point([seed, a], game.n, g) for a, g in enumerate(game.gammas)))
        return random_simplex_point(seed, game.n, game.gamma)
    return _point(game, load_point(choice))


def _solver_inputs(game, args):
    """Step size, share and margin for the chosen solver; omitted values come from the recommended ones."""
    try:
        recommended = _recommended(game)
    except InertialException as e:
        recommended = e

    def pick(value, name):
        if value is not None:
            return value
        if isinstance(recommended, Exception):
            raise recommended
        return getattr(recommended, name)

    if args.algorithm == "projection":
        return pick(args.rho, "rho"), None, None
    epsilon = pick(args.epsilon, "epsilon")
    if args.policy == "fixed":
        return None, args.tau, epsilon
    tau = pick(args.tau, "tau")
    if args.policy == "per-target" and args.tau is None and game.n > 1:
        tau = min(tau, 1.0 / (game.n - 1))
    return None, tau, epsilon


def _run_solver(game, x0, args, seed):
    rho, tau, epsilon = _solver_inputs(game, args)
    if args.algorithm == "projection":
        if isinstance(game, MultiClassGame):
            raise InvalidSpec("The projection solver handles single-class games only.")
        cfg = ProjectionConfig(rho).with_options(tol=args.tol, max_iter=args.max_iter,
                                                 enforce_guarantee=not args.unsafe, cycle_window=args.cycle_window)
        return projection_solve(game, x0, cfg)
    policy = make_policy(args.policy, tau, args.amount)
    cfg = _better_response_cfg(tau, epsilon, args, seed)
    if isinstance(game, MultiClassGame):
        return better_response_multi_solve(game, x0, policy, cfg)
    return better_response_solve(game, x0, policy, cfg)


def _better_response_cfg(tau, epsilon, args, seed):
    return BetterResponseConfig(tau, epsilon).with_options(
        tol=args.tol, max_iter=args.max_iter, cycle_window=args.cycle_window,
        unsafe_allow_bound_violation=args.unsafe, asynchronous=args.asynchronous, seed=seed)


def _report(result):
    x = result.x_final.tolist()
    _out("status: %s" % result.status.value)
    _out("algorithm: %s" % result.algorithm)
    _out("iterations: %d" % result.iterations)
    if isinstance(x[0], list):
        for a, block in enumerate(x):
            _out("x_final[%d]: %s" % (a + 1, fmt_vector(block)))
    else:
        _out("x_final: %s" % fmt_vector(x))
    _out("gap_final: %s" % fmt_float(result.gap_final))
    _out("verified_inertial: %s" % _flag(result.verified_inertial))
    if result.period:
        _out("period: %d" % result.period)


def cmd_solve(args):
    game = load_game(args.game)
    seed = _seed(args)
    x0 = _start(game, args.x0, seed)
    logger.info("[cmd-solve] game:%s, algorithm:%s, x0:%s, seed:%s" % (args.game, args.algorithm, args.x0, seed))
    try:
        result = _run_solver(game, x0, args, seed)
    except PreconditionViolated as e:
        if args.out:
            failed = SolveResult(Status.PRECONDITION_VIOLATED, x0, 0, algorithm=args.algorithm, message=str(e))
            save_json(args.out, failed.to_dict())
        raise
    _report(result)
    if args.out:
        save_json(args.out, result.to_dict())
    if args.trajectory:
        write_csv(args.trajectory, trajectory_frame(result))
    return EXIT_OK if result.status == Status.CONVERGED else EXIT_NOT_CONVERGED


def cmd_probe(args):
    game = load_game(args.game)
    seed = _seed(args)
    if isinstance(game, MultiClassGame):
        if args.operator.replace("-", "_") != "F":
            raise InvalidSpec("Multiclass games are probed on the stacked operator F only.")
        result = monotonicity_probe_multi(game, seed, args.samples, args.tol, args.h)
    else:
        result = monotonicity_probe(args.operator, game, seed, args.samples, args.tol, args.h)
    _out("verdict: %s" % result.verdict)
    _out("pairs checked: %d, jacobians checked: %d" % (result.pairs_checked, result.jacobians_checked))
    _out("worst pair product: %s" % fmt_float(result.worst_pair_product))
    if result.worst_pair is not None:
        _out("worst pair: x=%s, y=%s" % (fmt_vector(result.worst_pair[0]), fmt_vector(result.worst_pair[1])))
    _out("worst jacobian eigenvalue: %s" % fmt_float(result.worst_eigenvalue))
    if result.worst_eigen_location is not None:
        _out("worst jacobian location: %s" % fmt_vector(result.worst_eigen_location))
    if result.verdict == NOT_MONOTONE:
        _out("witness: %s at %s (value %s)" % (result.witness["kind"], fmt_vector(result.witness["x"]),
                                               fmt_float(result.witness["value"])))
    return EXIT_OK


def _describe(game):
    _out("n: %d" % game.n)
    _out("gamma: %s" % fmt_float(game.gamma))
    _out("c_min: %s" % fmt_float(game.c_min))
    _out("L: %s" % fmt_float(lipschitz_bounds(game).global_bound))
    try:
        params = recommended_params(game)
        _out("recommended: rho:%s, tau:%s, epsilon:%s" % (
            fmt_float(params.rho), fmt_float(params.tau), fmt_float(params.epsilon)))
    except InertialException as e:
        _out("recommended: unavailable (%s)" % e)


def _emit_game(game, out):
    if out:
        save_game(out, game)
        _describe(game)
    else:
        sys.stdout.write(dump_json(game.to_dict()))


def cmd_scenario(args):
    if args.config:
        scenario = load_scenario(args.config)
    else:
        scenario = bundled_scenario()
    gamma = scenario.gamma if args.gamma is None else args.gamma
    _emit_game(build_ridehailing(scenario.graph, gamma), args.out)
    return EXIT_OK


def cmd_gen(args):
    defaults = RandomGameSpec()
    spec = RandomGameSpec(
        family=args.family.replace("-", "_"),
        a_range=parse_range(args.a_range) if args.a_range else defaults.a_range,
        b_range=parse_range(args.b_range) if args.b_range else defaults.b_range,
        alpha_range=parse_range(args.alpha_range) if args.alpha_range else defaults.alpha_range,
        beta=defaults.beta if args.beta is None else args.beta,
        p_range=parse_range(args.p_range) if args.p_range else defaults.p_range,
        cost_range=parse_range(args.cost_range) if args.cost_range else defaults.cost_range,
        gamma=defaults.gamma if args.gamma is None else args.gamma,
        symmetric_costs=args.symmetric,
    )
    _emit_game(random_game(_seed(args), args.n, spec), args.out)
    return EXIT_OK


def cmd_experiment(args):
    if args.repetitions < 1:
        raise InvalidSpec("--repetitions must be >= 1, got %d." % args.repetitions)
    game = load_game(args.game)
    if isinstance(game, MultiClassGame):
        raise InvalidSpec("Experiments run on single-class games only.")
    seed = _seed(args)
    algorithms = list(ALGORITHMS) if args.algorithms == "both" else [args.algorithms]

    projection_cfg, better_response_cfg, policy = None, None, None
    if "projection" in algorithms:
        args.algorithm = "projection"
        rho, _, _ = _solver_inputs(game, args)
        projection_cfg = ProjectionConfig(rho).with_options(tol=args.tol, max_iter=args.max_iter,
                                                            enforce_guarantee=not args.unsafe)
    if "better-response" in algorithms:
        args.algorithm = "better-response"
        _, tau, epsilon = _solver_inputs(game, args)
        policy = make_policy(args.policy, tau, args.amount)
        better_response_cfg = _better_response_cfg(tau, epsilon, args, seed)

    task = RepetitionTask(game, projection_cfg, better_response_cfg, policy, args.workers)
    rows = task.run(task.infos(args.repetitions, seed, algorithms))
    frame = summarize(rows, algorithms)
    if args.out:
        write_csv(args.out, frame)
    for row in frame[frame["run"].isin(["mean", "std"])].itertuples(index=False):
        _out("%s %s: iterations:%s, %s" % (row.algorithm, row.run, fmt_float(row.iterations), row.status))
    return EXIT_OK if all_converged(rows) else EXIT_NOT_CONVERGED


def _add_seed(parser):
    parser.add_argument("--seed", type=int, default=None,
                        help="random seed (default: $INERTIAL_SEED or %d)" % DEFAULTS["SEED"])


def _add_solver_flags(parser):
    parser.add_argument("--rho", type=float, default=None, help="projection step size")
    parser.add_argument("--tau", type=float, default=None, help="share of an envious action's mass moved per step")
    parser.add_argument("--epsilon", type=float, default=None, help="margin below c_min/L for the inflow cap")
    parser.add_argument("--policy", choices=POLICY_NAMES, default="equal-share")
    parser.add_argument("--amount", type=float, default=None, help="mass moved per step by the fixed policy")
    parser.add_argument("--tol", type=float, default=DEFAULTS["SOLVER_TOL"])
    parser.add_argument("--max-iter", type=int, default=DEFAULTS["MAX_ITER"])
    parser.add_argument("--cycle-window", type=int, default=DEFAULTS["CYCLE_WINDOW"])
    parser.add_argument("--unsafe", action="store_true", help="run even when the convergence guarantee fails")
    parser.add_argument("--asynchronous", action="store_true", help="visit actions one at a time in seeded order")
    _add_seed(parser)


def build_parser():
    parser = argparse.ArgumentParser(prog="inertial", description="Inertial Nash equilibria of population games.")
    parser.add_argument("--log-level", choices=LOG_LEVELS, default="WARNING")
    parser.add_argument("--log-dir", default=None)
    parser.add_argument("--log-rotation-backup-count", type=int, default=None)
    sub = parser.add_subparsers(dest="command")
    sub.required = True

    p = sub.add_parser("verify", help="check a point for the Nash and inertial conditions")
    p.add_argument("game")
    p.add_argument("point", help="inline vector, JSON list file or result file")
    p.add_argument("--tol", type=float, default=ENVY_TOL)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("solve", help="run a solver")
    p.add_argument("game")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="better-response")
    p.add_argument("--x0", default="uniform", help="uniform, random, an inline vector or a file")
    p.add_argument("--out", default=None, help="result JSON")
    p.add_argument("--trajectory", default=None, help="trajectory CSV")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("probe", help="sample for monotonicity violations")
    p.add_argument("game")
    p.add_argument("--operator", choices=("F", "minus-u", "minus_u"), default="F")
    p.add_argument("--samples", type=int, default=10 ** 4)
    p.add_argument("--tol", type=float, default=ENVY_TOL)
    p.add_argument("--h", type=float, default=FD_STEP)
    _add_seed(p)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("scenario", help="build the ride-hailing game")
    source = p.add_mutually_exclusive_group()
    source.add_argument("--config", default=None)
    source.add_argument("--bundled", action="store_true")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("gen", help="generate a seeded random game")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--family", choices=("affine", "ride-hailing", "ride_hailing"), default="affine")
    p.add_argument("--a-range", default=None)
    p.add_argument("--b-range", default=None)
    p.add_argument("--alpha-range", default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--p-range", default=None)
    p.add_argument("--cost-range", default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--out", default=None)
    _add_seed(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("experiment", help="repeat both solvers from random starts")
    p.add_argument("game")
    p.add_argument("--repetitions", type=int, default=100)
    p.add_argument("--algorithms", choices=ALGORITHMS + ("both",), default="both")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="summary CSV")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    init_log(args.log_dir, getattr(logging, args.log_level), args.log_rotation_backup_count)
    try:
        return args.func(args)
    except (InertialException, OSError) as e:
        logger.error("[cli] %s failed: %s" % (args.command, e))
        sys.stderr.write("error: %s\n" % e)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
