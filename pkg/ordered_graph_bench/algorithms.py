import logging
import math
from contextlib import contextmanager
from dataclasses import dataclass
from time import perf_counter

import numpy as np

from ordered_graph_bench.AtomicIntArray import AtomicIntArray
from ordered_graph_bench.BucketQueue import BucketUpdate, RoundStats
from ordered_graph_bench.Graph import INFINITE_DISTANCE
from ordered_graph_bench.PriorityState import PriorityState, HIGHER_FIRST, NULL_KEY
from ordered_graph_bench.TraversalEngine import TraversalEngine, create_queue
from ordered_graph_bench.VertexSubset import VertexSubset
from ordered_graph_bench.WorkerTeam import WorkerTeam
from ordered_graph_bench.exceptions import ConfigurationError, DomainError
from ordered_graph_bench.schedule import LAZY_CONSTANT_SUM, require_valid_schedule

module_logger = logging.getLogger("ordered_graph_bench")


@dataclass
class SsspResult:
    source: int
    distances: np.ndarray
    stats: RoundStats


@dataclass
class DistanceResult:
    source: int
    target: int
    distance: int
    stats: RoundStats


@dataclass
class CorenessResult:
    coreness: np.ndarray
    stats: RoundStats


@dataclass
class SetCoverResult:
    chosen_sets: np.ndarray
    covered: np.ndarray
    uncoverable: np.ndarray
    stats: RoundStats
    # elements each chosen set covered first, aligned with chosen_sets
    selection_gains: np.ndarray = None


@contextmanager
def _team_scope(team, logger):
    if team is not None:
        yield team
        return
    team = WorkerTeam(1, logger)
    try:
        yield team
    finally:
        team.stop()


def _check_vertex(graph, v, name):
    if v is None or not 0 <= v < graph.num_vertices:
        raise DomainError("{} {} outside [0, {})".format(name, v, graph.num_vertices))


def _distance_search(graph, source, schedule, team, target=None, start_priority=0, heuristic=None,
                     debug=False, logger=None, histogram_dense_ratio=16, time_limit_ms=None):
    n = graph.num_vertices
    priorities = np.full(n, INFINITE_DISTANCE, dtype=np.int64)
    priorities[source] = start_priority
    state = PriorityState(priorities, delta=schedule.delta, concurrent=team.concurrent, debug=debug, logger=logger)
    queue = create_queue(state, schedule, team, [source], logger)
    engine = TraversalEngine(graph, schedule, team, logger, histogram_dense_ratio, time_limit_ms)
    values = state.values

    if heuristic is None:
        def relax(s, d, w):
            return queue.update_priority_min(d, values.load(d), values.load(s) + w)
    else:
        # f is the best known path length, the queue orders by g = f + h
        f = AtomicIntArray(np.full(n, INFINITE_DISTANCE, dtype=np.int64), concurrent=team.concurrent)
        f.store(source, 0)
        h = heuristic.tolist()

        def relax(s, d, w):
            candidate = f.load(s) + w
            if f.write_min(d, candidate):
                return queue.update_priority_min(d, None, max(candidate + h[d], values.load(s)))
            return False

    stop = None
    if target is not None:
        def stop(key):
            return queue.finished_vertex(target, key)

    stats = engine.run(queue, relax, stop)
    distances = values.array if heuristic is None else f.array
    return distances, stats


def sssp_delta_stepping(graph, source, schedule, team=None, debug=False, logger=None, histogram_dense_ratio=16,
                        time_limit_ms=None):
    """
    Exact single-source shortest paths by delta-stepping
    :param graph: Graph with non-negative weights
    :param source: start vertex
    :param schedule: Schedule
    :return: SsspResult, unreachable vertices hold 2^31 - 1
    """
    logger = logger or module_logger
    _check_vertex(graph, source, "source")
    require_valid_schedule("sssp", schedule, graph)
    with _team_scope(team, logger) as team:
        distances, stats = _distance_search(graph, source, schedule, team, debug=debug, logger=logger,
                                            histogram_dense_ratio=histogram_dense_ratio, time_limit_ms=time_limit_ms)
    return SsspResult(source, distances.copy(), stats)


def wbfs(graph, source, schedule, team=None, debug=False, logger=None, histogram_dense_ratio=16, time_limit_ms=None):
    """
    Weighted BFS: delta-stepping with delta pinned to 1, meant for small positive weights
    """
    logger = logger or module_logger
    _check_vertex(graph, source, "source")
    if graph.num_edges:
        if int(graph.weights.min()) == 0:
            raise DomainError("wBFS needs positive weights, found weight 0")
        limit = max(2, math.ceil(math.log2(max(graph.num_vertices, 2))))
        if int(graph.weights.max()) >= limit:
            logger.warning("wbfs: weights reach {}, outside the intended range [1, {})".format(
                int(graph.weights.max()), limit))
    if schedule.delta != 1:
        logger.info("wbfs: delta {} replaced by 1".format(schedule.delta))
        schedule = schedule.replace(delta=1)
    require_valid_schedule("wbfs", schedule, graph)
    with _team_scope(team, logger) as team:
        distances, stats = _distance_search(graph, source, schedule, team, debug=debug, logger=logger,
                                            histogram_dense_ratio=histogram_dense_ratio, time_limit_ms=time_limit_ms)
    return SsspResult(source, distances.copy(), stats)


def ppsp(graph, source, target, schedule, team=None, debug=False, logger=None, histogram_dense_ratio=16,
         time_limit_ms=None):
    """
    Point-to-point shortest path; stops once the target's distance is final
    :return: DistanceResult
    """
    logger = logger or module_logger
    _check_vertex(graph, source, "source")
    _check_vertex(graph, target, "target")
    require_valid_schedule("ppsp", schedule, graph)
    with _team_scope(team, logger) as team:
        distances, stats = _distance_search(graph, source, schedule, team, target=target, debug=debug,
                                            logger=logger, histogram_dense_ratio=histogram_dense_ratio,
                                            time_limit_ms=time_limit_ms)
    return DistanceResult(source, target, int(distances[target]), stats)


class EuclideanHeuristic(object):
    """
    Straight-line distance to the target, scaled so no edge is shorter than
    its weight: h(v) = floor(euclid(v, t) / scale), scale = max euclid(u, v) / w(u, v)
    """

    def __init__(self, graph, coords, target, inflation=1.0):
        src, dst, weights = graph.edge_list()
        lengths = np.hypot(coords.x[src] - coords.x[dst], coords.y[src] - coords.y[dst])
        positive = lengths > 0
        self.target = target
        self.scale = 0.0
        if np.any(positive & (weights == 0)):
            self.scale = math.inf
        elif np.any(positive):
            self.scale = float(np.max(lengths[positive] / weights[positive]))
        if self.scale == 0.0 or math.isinf(self.scale):
            self.values = np.zeros(graph.num_vertices, dtype=np.int64)
        else:
            # shaved so rounding never breaks consistency
            scaled = coords.euclid_to(target) / self.scale * (1.0 - 1e-12) * inflation
            self.values = np.floor(scaled).astype(np.int64)


def astar(graph, coords, source, target, schedule, team=None, heuristic=None, debug=False, logger=None,
          histogram_dense_ratio=16, time_limit_ms=None):
    """
    A* search ordered by g = max(f(v) + h(v), g(parent))
    :param coords: CoordinateTable for the Euclidean heuristic
    :param heuristic: optional precomputed heuristic array overriding coords
    :return: DistanceResult holding f(target)
    """
    logger = logger or module_logger
    _check_vertex(graph, source, "source")
    _check_vertex(graph, target, "target")
    if heuristic is None:
        if coords is None:
            raise ConfigurationError("A* needs vertex coordinates")
        if len(coords) != graph.num_vertices:
            raise ConfigurationError("coordinates cover {} vertices, graph has {}".format(
                len(coords), graph.num_vertices))
        heuristic = EuclideanHeuristic(graph, coords, target).values
    heuristic = np.asarray(heuristic, dtype=np.int64)
    require_valid_schedule("astar", schedule, graph)
    with _team_scope(team, logger) as team:
        distances, stats = _distance_search(graph, source, schedule, team, target=target,
                                            start_priority=int(heuristic[source]), heuristic=heuristic,
                                            debug=debug, logger=logger,
                                            histogram_dense_ratio=histogram_dense_ratio, time_limit_ms=time_limit_ms)
    return DistanceResult(source, target, int(distances[target]), stats)


def kcore(graph, schedule, team=None, debug=False, logger=None, histogram_dense_ratio=16, time_limit_ms=None):
    """
    Coreness of every vertex of a symmetric graph by peeling the minimum-degree bucket
    :return: CorenessResult
    """
    logger = logger or module_logger
    if not graph.symmetric:
        raise ConfigurationError("k-core needs a symmetric graph")
    require_valid_schedule("kcore", schedule, graph)
    n = graph.num_vertices
    coreness = np.zeros(n, dtype=np.int64)
    with _team_scope(team, logger) as team:
        state = PriorityState(graph.out_degrees, delta=1, concurrent=team.concurrent, debug=debug, logger=logger)
        queue = create_queue(state, schedule, team, np.arange(n), logger)
        engine = TraversalEngine(graph, schedule, team, logger, histogram_dense_ratio, time_limit_ms)
        current = [0]

        def visit(key, frontier):
            current[0] = key
            coreness[frontier.ids] = key

        def decrement(s, d, w):
            return queue.update_priority_sum(d, -1, current[0])

        if schedule.update_strategy == LAZY_CONSTANT_SUM:
            stats = engine.run(queue, stop=None, visit=visit, constant_sum=-1)
        else:
            stats = engine.run(queue, decrement, visit=visit)
    return CorenessResult(coreness, stats)


def _log_bucket_fn(epsilon):
    base = math.log1p(epsilon)

    def bucket(degree):
        return np.floor(np.log(degree) / base)
    return bucket


def _check_incidence(graph, num_sets):
    if num_sets is None:
        raise ConfigurationError("set cover needs the number of set vertices")
    if not 0 <= num_sets <= graph.num_vertices:
        raise DomainError("set count {} outside [0, {}]".format(num_sets, graph.num_vertices))
    if not graph.symmetric:
        raise ConfigurationError("set cover needs a symmetric incidence graph")
    src, dst, _ = graph.edge_list()
    if np.any((src < num_sets) == (dst < num_sets)):
        raise DomainError("incidence graph has an edge between two sets or two elements")


def setcover(graph, schedule, epsilon=0.01, num_sets=None, seed=0, team=None, debug=False, logger=None,
             histogram_dense_ratio=16, time_limit_ms=None):
    """
    Unweighted approximate set cover over a symmetric incidence graph whose
    first num_sets vertices are sets and the rest elements. Sets are bucketed
    by floor(log_{1+epsilon}(uncovered degree)), highest bucket first.
    :return: SetCoverResult with element-indexed coverage
    """
    logger = logger or module_logger
    if not 0.0 < epsilon < 1.0:
        raise DomainError("epsilon must lie in (0, 1), got {}".format(epsilon))
    num_sets = graph.num_sets if num_sets is None else num_sets
    _check_incidence(graph, num_sets)
    require_valid_schedule("setcover", schedule, graph)
    n = graph.num_vertices
    adjacency = graph.adjacency
    rng = np.random.default_rng(seed)

    priorities = np.zeros(n, dtype=np.int64)
    priorities[:num_sets] = graph.out_degrees[:num_sets]
    covered = [False] * n
    chosen = []
    gains = {}
    with _team_scope(team, logger) as team:
        state = PriorityState(priorities, delta=1, direction=HIGHER_FIRST, bucket_fn=_log_bucket_fn(epsilon),
                              concurrent=team.concurrent, debug=debug, logger=logger)
        queue = create_queue(state, schedule, team, np.arange(num_sets), logger)
        engine = TraversalEngine(graph, schedule, team, logger, histogram_dense_ratio, time_limit_ms)
        claims = AtomicIntArray(np.full(n, INFINITE_DISTANCE, dtype=np.int64), concurrent=team.concurrent)
        stats = queue.stats
        started = perf_counter()

        def decrement(s, d, w):
            return queue.update_priority_sum(d, -1, 0)

        while True:
            item = queue.next_bucket()
            if item is None:
                break
            key, frontier = item
            engine.check_time_limit(stats.rounds)
            stats.rounds += 1
            queue.note_dequeue(key)
            sets = frontier.ids.tolist()
            ranks = rng.permutation(len(sets)).tolist()
            accepted = [False] * len(sets)

            def claim(worker_id, start, end):
                for i in range(start, end):
                    for e in adjacency[sets[i]]:
                        if not covered[e]:
                            claims.write_min(e, ranks[i])

            def judge(worker_id, start, end):
                for i in range(start, end):
                    won = 0
                    for e in adjacency[sets[i]]:
                        if not covered[e] and claims.array[e] == ranks[i]:
                            won += 1
                    accepted[i] = won >= (1.0 - epsilon) * state.values.load(sets[i])

            team.parallel_for(len(sets), claim, schedule.parallel_grain)
            team.parallel_for(len(sets), judge, schedule.parallel_grain)

            newly_covered = []
            rejected = []
            for s, ok in zip(sets, accepted):
                if not ok:
                    rejected.append(s)
                    continue
                chosen.append(s)
                before = len(newly_covered)
                state.values.store(s, 0)
                for e in adjacency[s]:
                    if not covered[e]:
                        covered[e] = True
                        newly_covered.append(e)
                gains[s] = len(newly_covered) - before
            claims.array[graph.gather_targets(frontier.ids)] = INFINITE_DISTANCE

            if newly_covered:
                covered_now = VertexSubset.from_ids(n, newly_covered)
                if schedule.update_strategy == LAZY_CONSTANT_SUM:
                    engine.histogram_constant_sum(covered_now, -1, 0, queue)
                else:
                    engine.apply_update_priority(covered_now, decrement, queue)
            # rejected sets whose bucket did not move go back into the current bucket
            keys = state.keys_array(np.asarray(rejected, dtype=np.int64))
            queue.bulk_update(BucketUpdate(s, k) for s, k in zip(rejected, keys.tolist()) if k != NULL_KEY)
            logger.debug("setcover: bucket key {} had {} sets, {} chosen".format(
                key, len(sets), len(sets) - len(rejected)))

        stats.wall_ms += (perf_counter() - started) * 1000.0
        engine.flush_stats(queue)

    covered_elements = np.asarray(covered[num_sets:], dtype=bool)
    uncoverable = np.flatnonzero(graph.out_degrees[num_sets:] == 0)
    chosen = sorted(chosen)
    return SetCoverResult(np.asarray(chosen, dtype=np.int64), covered_elements, uncoverable, stats,
                          np.asarray([gains[s] for s in chosen], dtype=np.int64))


ALGORITHMS = ("sssp", "wbfs", "ppsp", "astar", "kcore", "setcover")


def run_algorithm(name, graph, schedule, source=0, target=None, coords=None, team=None, epsilon=0.01, seed=0,
                  num_sets=None, heuristic=None, debug=False, logger=None, histogram_dense_ratio=16,
                  time_limit_ms=None):
    """
    Dispatch to one of the ordered algorithms by name
    """
    common = dict(team=team, debug=debug, logger=logger, histogram_dense_ratio=histogram_dense_ratio,
                  time_limit_ms=time_limit_ms)
    if name == "sssp":
        return sssp_delta_stepping(graph, source, schedule, **common)
    if name == "wbfs":
        return wbfs(graph, source, schedule, **common)
    if name == "ppsp":
        return ppsp(graph, source, target, schedule, **common)
    if name == "astar":
        return astar(graph, coords, source, target, schedule, heuristic=heuristic, **common)
    if name == "kcore":
        return kcore(graph, schedule, **common)
    if name == "setcover":
        return setcover(graph, schedule, epsilon=epsilon, num_sets=num_sets, seed=seed, **common)
    raise ConfigurationError("unknown algorithm {}".format(name))


def result_vector(result):
    """
    The values a result is compared and digested by
    """
    if isinstance(result, SsspResult):
        return result.distances
    if isinstance(result, DistanceResult):
        return np.asarray([result.distance], dtype=np.int64)
    if isinstance(result, CorenessResult):
        return result.coreness
    return result.chosen_sets
