from dataclasses import dataclass, asdict, fields, replace

from ordered_graph_bench.WorkerTeam import GRAINS, VERTEX_PARALLEL_STATIC
from ordered_graph_bench.exceptions import ScheduleError

EAGER_WITH_FUSION = "eager_with_fusion"
EAGER_NO_FUSION = "eager_no_fusion"
LAZY = "lazy"
LAZY_CONSTANT_SUM = "lazy_constant_sum"
STRATEGIES = (EAGER_WITH_FUSION, EAGER_NO_FUSION, LAZY, LAZY_CONSTANT_SUM)
EAGER_STRATEGIES = (EAGER_WITH_FUSION, EAGER_NO_FUSION)

SPARSE_PUSH = "SparsePush"
DENSE_PULL = "DensePull"
TRAVERSAL_DIRECTIONS = (SPARSE_PUSH, DENSE_PULL)


@dataclass(frozen=True)
class AlgorithmTraits:
    constant_sum: bool = False
    allows_eager: bool = True
    allows_coarsening: bool = True


ALGORITHM_TRAITS = {
    "sssp": AlgorithmTraits(),
    "wbfs": AlgorithmTraits(),
    "ppsp": AlgorithmTraits(),
    "astar": AlgorithmTraits(),
    "kcore": AlgorithmTraits(constant_sum=True, allows_eager=False, allows_coarsening=False),
    "setcover": AlgorithmTraits(constant_sum=True, allows_eager=False, allows_coarsening=False),
}


@dataclass(frozen=True)
class Schedule:
    update_strategy: str = EAGER_WITH_FUSION
    delta: int = 1
    fusion_threshold: int = 1000
    num_open_buckets: int = 128
    direction: str = SPARSE_PUSH
    parallel_grain: str = VERTEX_PARALLEL_STATIC
    dedup: bool = True

    @property
    def eager(self):
        return self.update_strategy in EAGER_STRATEGIES

    @property
    def fusion(self):
        return self.update_strategy == EAGER_WITH_FUSION

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, values):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ScheduleError(["unknown schedule field {}".format(name) for name in unknown])
        return cls(**values)

    def replace(self, **changes):
        return replace(self, **changes)

    def describe(self):
        return "{}/delta={}/thr={}/buckets={}/{}".format(self.update_strategy, self.delta, self.fusion_threshold,
                                                         self.num_open_buckets, self.direction)


def default_schedule(algo, config):
    """
    Schedule named for an algorithm in the config
    """
    values = dict(config.get("schedules", {}).get(algo, {}))
    return Schedule.from_dict(values)


def validate_schedule(algo, schedule, graph=None):
    """
    Check a schedule against an algorithm and, optionally, a graph
    :return: list of diagnostics, empty when the schedule is valid
    """
    diagnostics = []
    traits = ALGORITHM_TRAITS.get(algo)
    if traits is None:
        return ["unknown algorithm {}".format(algo)]
    if schedule.update_strategy not in STRATEGIES:
        diagnostics.append("unknown update strategy {}".format(schedule.update_strategy))
    if schedule.direction not in TRAVERSAL_DIRECTIONS:
        diagnostics.append("unknown direction {}".format(schedule.direction))
    if schedule.parallel_grain not in GRAINS:
        diagnostics.append("unknown parallel grain {}".format(schedule.parallel_grain))
    if schedule.delta < 1:
        diagnostics.append("delta must be >= 1, got {}".format(schedule.delta))
    if schedule.fusion_threshold < 1:
        diagnostics.append("fusion threshold must be >= 1, got {}".format(schedule.fusion_threshold))
    if schedule.num_open_buckets < 1:
        diagnostics.append("open bucket count must be >= 1, got {}".format(schedule.num_open_buckets))
    if schedule.update_strategy == LAZY_CONSTANT_SUM and not traits.constant_sum:
        diagnostics.append("{} does not declare a constant-sum update, lazy_constant_sum is unavailable".format(algo))
    if schedule.update_strategy in EAGER_STRATEGIES and not traits.allows_eager:
        diagnostics.append("{} supports lazy bucket updates only".format(algo))
    if schedule.delta != 1 and not traits.allows_coarsening:
        diagnostics.append("{} does not allow priority coarsening (delta={})".format(algo, schedule.delta))
    if graph is not None and schedule.direction == DENSE_PULL and not graph.has_in_edges:
        diagnostics.append("DensePull needs a graph built with in-edges")
    return diagnostics


def require_valid_schedule(algo, schedule, graph=None):
    diagnostics = validate_schedule(algo, schedule, graph)
    if diagnostics:
        raise ScheduleError(diagnostics)
    return schedule
