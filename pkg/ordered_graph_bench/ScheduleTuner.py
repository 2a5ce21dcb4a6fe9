import logging
import statistics
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ordered_graph_bench import load_config
from ordered_graph_bench.ReportSaver import REPORT_SCHEMA, result_digest
from ordered_graph_bench.WorkerTeam import WorkerTeam
from ordered_graph_bench.algorithms import run_algorithm, result_vector
from ordered_graph_bench.exceptions import GraphBenchError, TuneError
from ordered_graph_bench.oracles import check_against_oracle
from ordered_graph_bench.schedule import (ALGORITHM_TRAITS, DENSE_PULL, EAGER_NO_FUSION, EAGER_WITH_FUSION, LAZY,
                                          LAZY_CONSTANT_SUM, SPARSE_PUSH, default_schedule, validate_schedule)


@dataclass(frozen=True)
class ScheduleSpace:
    strategies: Tuple[str, ...]
    deltas: Tuple[int, ...]
    fusion_thresholds: Tuple[int, ...]
    open_buckets: Tuple[int, ...]
    directions: Tuple[str, ...]

    @classmethod
    def for_algorithm(cls, algo, config, graph=None):
        """
        Every knob value the algorithm and graph admit
        """
        traits = ALGORITHM_TRAITS[algo]
        tune_config = config["tune"]
        strategies = []
        if traits.allows_eager:
            strategies += [EAGER_WITH_FUSION, EAGER_NO_FUSION]
        strategies.append(LAZY)
        if traits.constant_sum:
            strategies.append(LAZY_CONSTANT_SUM)
        if traits.allows_coarsening and algo != "wbfs":
            deltas = tuple(2 ** i for i in range(tune_config["max_delta_exponent"] + 1))
        else:
            deltas = (1,)
        directions = (SPARSE_PUSH, DENSE_PULL) if graph is not None and graph.has_in_edges else (SPARSE_PUSH,)
        return cls(tuple(strategies), deltas, tuple(tune_config["fusion_thresholds"]),
                   tuple(tune_config["open_buckets"]), directions)

    def sample(self, rng, base):
        def pick(values):
            return values[int(rng.integers(len(values)))]
        return base.replace(update_strategy=pick(self.strategies), delta=pick(self.deltas),
                            fusion_threshold=pick(self.fusion_thresholds),
                            num_open_buckets=pick(self.open_buckets), direction=pick(self.directions))

    def sample_sequence(self, budget, seed, base):
        """
        The base schedule under each strategy first, then uniform samples
        """
        rng = np.random.default_rng(seed)
        schedules = [base.replace(update_strategy=strategy) for strategy in self.strategies]
        while len(schedules) < budget:
            schedules.append(self.sample(rng, base))
        return schedules[:budget]


@dataclass
class Trial:
    schedule: object
    ms: Optional[float]
    valid: bool

    def to_dict(self):
        return {"schedule": self.schedule.to_dict(), "ms": self.ms, "valid": self.valid}


@dataclass
class Trial:
    schedule: object
    ms: Optional[float]
    valid: bool
    diagnostic: Optional[str] = None

    def to_dict(self):
        return {"schedule": self.schedule.to_dict(), "ms": self.ms, "valid": self.valid,
                "diagnostic": self.diagnostic}


@dataclass
class TuneReport:
    algo: str
    graph: str
    best: object
    best_ms: float
    trials: List[Trial] = field(default_factory=list)

    def to_dict(self):
        return {
            "algo": self.algo,
            "graph": self.graph,
            "trials": [trial.to_dict() for trial in self.trials],
            "best": {"schedule": self.best.to_dict(), "ms": self.best_ms},
            "schema": REPORT_SCHEMA,
        }


def trial_time_limit(tune_config, best_ms):
    """
    Time one run of a trial may take before it is abandoned
    :param best_ms: fastest valid median so far, None before the first valid trial
    :return: limit in milliseconds
    """
    limit = tune_config["trial_time_limit_ms"]
    if best_ms is not None:
        limit = min(limit, max(tune_config["trial_time_floor_ms"], tune_config["trial_time_factor"] * best_ms))
    return limit


def tune(algo, graph, budget_trials, seed=0, config=None, team=None, source=0, target=None, coords=None,
         num_sets=None, graph_name="", logger=None):
    """
    Random search over the schedule space
    :param budget_trials: number of schedules to try
    :param seed: fixes the sample sequence
    :return: TuneReport with the fastest valid schedule
    """
    if logger is None:
        logger = logging.getLogger("ordered_graph_bench")
    if budget_trials < 1:
        raise TuneError("tuning needs a budget of at least one trial")
    config = config or load_config()
    tune_config = config["tune"]
    repeats = tune_config["repeats"]
    warmup = 1 if graph.num_edges > tune_config["warmup_edge_threshold"] else 0
    use_oracle = graph.num_vertices <= tune_config["oracle_vertex_limit"]
    space = ScheduleSpace.for_algorithm(algo, config, graph)
    schedules = space.sample_sequence(budget_trials, seed, default_schedule(algo, config))

    owned_team = team is None
    if owned_team:
        team = WorkerTeam(config.get("default_threads", 1), logger, config.get("dynamic_chunk_size", 64))
    reference = None
    best_ms = None
    trials = []
    try:
        for schedule in schedules:
            diagnostics = validate_schedule(algo, schedule, graph)
            if diagnostics:
                trials.append(Trial(schedule, None, False, "; ".join(diagnostics)))
                continue
            limit_ms = trial_time_limit(tune_config, best_ms)
            try:
                times = []
                for run in range(warmup + repeats):
                    result = run_algorithm(algo, graph, schedule, source=source, target=target, coords=coords,
                                           team=team, epsilon=config.get("setcover_epsilon", 0.01), seed=seed,
                                           num_sets=num_sets, logger=logger,
                                           histogram_dense_ratio=config.get("histogram_dense_ratio", 16),
                                           time_limit_ms=limit_ms)
                    if run >= warmup:
                        times.append(result.stats.wall_ms)
                diagnostic = None
                if use_oracle:
                    mismatch = check_against_oracle(graph, result, coords=coords, num_sets=num_sets)
                    valid = mismatch is None
                    if not valid:
                        diagnostic = mismatch.describe()
                else:
                    digest = result_digest(result_vector(result))
                    reference = reference or digest
                    valid = digest == reference
                    if not valid:
                        diagnostic = "digest {} differs from {}".format(digest, reference)
                trials.append(Trial(schedule, statistics.median(times), valid, diagnostic))
            except GraphBenchError as e:
                logger.warning("ScheduleTuner: {} failed: {}".format(schedule.describe(), e))
                trials.append(Trial(schedule, None, False, str(e)))
                continue
            if valid and (best_ms is None or trials[-1].ms < best_ms):
                best_ms = trials[-1].ms
            logger.info("ScheduleTuner: {} {:.3f} ms valid={}".format(schedule.describe(), trials[-1].ms,
                                                                         trials[-1].valid))
    finally:
        if owned_team:
            team.stop()

    valid_trials = [trial for trial in trials if trial.valid]
    if not valid_trials:
        raise TuneError("all {} trials produced invalid results".format(len(trials)))
    best = min(valid_trials, key=lambda trial: trial.ms)
    return TuneReport(algo, graph_name, best.schedule, best.ms, trials)
