import logging
from multiprocessing.pool import ThreadPool

import numpy as np
import pandas as pd

from .scenario import random_simplex_point
from .solver import Status, better_response_solve, projection_solve

logger = logging.getLogger(__name__)

PROJECTION = "projection"
BETTER_RESPONSE = "better-response"

COLUMNS = ["run", "algorithm", "status", "iterations", "gap_final", "verified_inertial"]


class RepetitionInfo:
    def __init__(self,
                 run,
                 algorithm,
                 seed,
                 x0,
                 ):
        self.run = run
        self.algorithm = algorithm
        self.seed = seed
        self.x0 = x0


class RepetitionTask:
    """
    Runs independent seeded solves, one per ``RepetitionInfo``. Results come
    back in submission order whatever the number of workers.
    """

    def __init__(self,
                 game,
                 projection_cfg=None,
                 better_response_cfg=None,
                 policy=None,
                 workers=1,
                 ):
        self.game = game
        self.projection_cfg = projection_cfg
        self.better_response_cfg = better_response_cfg
        self.policy = policy
        self.workers = max(1, int(workers))

    def infos(self, repetitions, seed, algorithms):
        infos = []
        for r in range(repetitions):
            x0 = random_simplex_point([seed, r], self.game.n, self.game.gamma)
            for algorithm in algorithms:
                infos.append(RepetitionInfo(r, algorithm, [seed, r], x0))
        return infos

    def solve(self, info):
        if info.algorithm == PROJECTION:
            result = projection_solve(self.game, info.x0, self.projection_cfg)
        else:
            cfg = self.better_response_cfg.with_options(seed=int(np.random.default_rng(info.seed).integers(2 ** 31)))
            result = better_response_solve(self.game, info.x0, self.policy, cfg)
        logger.debug("[repetition-task] run:%s, algorithm:%s, status:%s, iterations:%s" % (
            info.run, info.algorithm, result.status.value, result.iterations))
        return {
            "run": info.run,
            "algorithm": info.algorithm,
            "status": result.status.value,
            "iterations": result.iterations,
            "gap_final": result.gap_final,
            "verified_inertial": result.verified_inertial,
        }

    def run(self, infos):
        logger.info("[repetition-task] runs:%s, workers:%s" % (len(infos), self.workers))
        if self.workers == 1:
            return [self.solve(info) for info in infos]
        pool = ThreadPool(self.workers)
        try:
            return pool.map(self.solve, infos)
        finally:
            pool.close()
            pool.join()


def summarize(rows, algorithms):
    """Per-run rows followed by ``mean`` and ``std`` rows of the iteration counts per algorithm."""
    frame = pd.DataFrame(rows, columns=COLUMNS)
    summary = []
    for algorithm in algorithms:
        part = frame[frame["algorithm"] == algorithm]
        iterations = part["iterations"].to_numpy(dtype=float)
        converged = int((part["status"] == Status.CONVERGED.value).sum())
        status = "%d/%d %s" % (converged, len(part), Status.CONVERGED.value)
        summary.append({"run": "mean", "algorithm": algorithm, "status": status,
                        "iterations": float(iterations.mean()), "gap_final": float(part["gap_final"].mean()),
                        "verified_inertial": bool(part["verified_inertial"].all())})
        summary.append({"run": "std", "algorithm": algorithm, "status": status,
                        "iterations": float(iterations.std(ddof=0)), "gap_final": float(part["gap_final"].std(ddof=0)),
                        "verified_inertial": bool(part["verified_inertial"].all())})
    return pd.concat([frame.astype({"run": object}), pd.DataFrame(summary, columns=COLUMNS)], ignore_index=True)


def all_converged(rows):
    return all(row["status"] == Status.CONVERGED.value for row in rows)
