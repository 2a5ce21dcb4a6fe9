import logging
from time import perf_counter

import numpy as np

from ordered_graph_bench.AtomicIntArray import AtomicIntArray
from ordered_graph_bench.BucketQueue import BucketUpdate
from ordered_graph_bench.EagerBucketQueue import EagerBucketQueue
from ordered_graph_bench.LazyBucketQueue import LazyBucketQueue
from ordered_graph_bench.PriorityState import NULL_KEY
from ordered_graph_bench.VertexSubset import out_degree_sum
from ordered_graph_bench.exceptions import ConfigurationError, GraphBenchError, TimeLimitExceeded
from ordered_graph_bench.schedule import DENSE_PULL, EAGER_STRATEGIES, LAZY_CONSTANT_SUM


class DedupFlags(object):
    """
    Per-vertex claimed bits; only touched vertices are cleared after a round
    """

    def __init__(self, num_vertices, concurrent=False):
        self.flags = AtomicIntArray(np.zeros(num_vertices, dtype=np.int64), concurrent=concurrent)

    def claim(self, v):
        return self.flags.compare_and_swap(v, 0, 1)

    def clear(self, ids):
        self.flags.array[ids] = 0


class UpdateBuffer(object):
    """
    Per-thread segments of vertices whose priority changed in the current round
    """

    def __init__(self, num_threads, capacity, dedup_flags=None):
        self.segments = [[] for _ in range(num_threads)]
        self.capacity = capacity
        self.dedup_flags = dedup_flags

    def append(self, worker_id, v):
        if self.dedup_flags is not None and not self.dedup_flags.claim(v):
            return False
        self.segments[worker_id].append(v)
        return True

    def lengths(self):
        return [len(segment) for segment in self.segments]


def exclusive_prefix_sum(lengths):
    """
    :return: (offsets, total) with offsets[i] = sum(lengths[:i])
    """
    lengths = np.asarray(lengths, dtype=np.int64)
    if lengths.size == 0:
        return lengths, 0
    inclusive = np.cumsum(lengths)
    return inclusive - lengths, int(inclusive[-1])


def compact_updates(buffer, state):
    """
    Concatenate the buffer segments at prefix-sum offsets and attach the
    bucket each vertex belongs to now
    :return: list of BucketUpdate
    """
    offsets, total = exclusive_prefix_sum(buffer.lengths())
    if total > buffer.capacity:
        raise GraphBenchError("update buffer holds {} entries, capacity {}".format(total, buffer.capacity))
    compacted = np.empty(total, dtype=np.int64)
    for offset, segment in zip(offsets.tolist(), buffer.segments):
        compacted[offset:offset + len(segment)] = segment
    if buffer.dedup_flags is not None:
        buffer.dedup_flags.clear(compacted)
    keys = state.keys_array(compacted)
    return [BucketUpdate(v, k) for v, k in zip(compacted.tolist(), keys.tolist()) if k != NULL_KEY]


def create_queue(state, schedule, team, start_ids, logger=None):
    if schedule.update_strategy in EAGER_STRATEGIES:
        queue = EagerBucketQueue(state, num_threads=team.num_threads, num_open_buckets=schedule.num_open_buckets,
                                 fusion_threshold=schedule.fusion_threshold if schedule.fusion else None,
                                 logger=logger)
    else:
        queue = LazyBucketQueue(state, num_open_buckets=schedule.num_open_buckets, logger=logger)
    queue.initialize(start_ids)
    return queue


class TraversalEngine(object):
    """
    Applies priority updates along the edges of a frontier and drives the
    ordered processing loop for a given schedule.
    """

    def __init__(self, graph, schedule, team, logger=None, histogram_dense_ratio=16, time_limit_ms=None):
        if logger is not None:
            self.logger = logger
        else:
            self.logger = logging.getLogger("ordered_graph_bench")
        self.graph = graph
        self.schedule = schedule
        self.team = team
        self.histogram_dense_ratio = histogram_dense_ratio
        self.dedup_flags = DedupFlags(graph.num_vertices, team.concurrent) if schedule.dedup else None
        self._edges = [0] * team.num_threads
        self._warned_experimental = False
        if schedule.direction == DENSE_PULL and not graph.has_in_edges:
            raise ConfigurationError("DensePull needs a graph built with in-edges")
        self.time_limit_ms = time_limit_ms
        self.deadline = None if time_limit_ms is None else perf_counter() + time_limit_ms / 1000.0

    def check_time_limit(self, rounds):
        """
        Raise TimeLimitExceeded once the engine has run past its time limit
        """
        if self.deadline is not None and perf_counter() >= self.deadline:
            self.logger.debug("TraversalEngine: abandoned after {} rounds".format(rounds))
            raise TimeLimitExceeded(self.time_limit_ms, rounds)

    def _push_range(self, worker_id, ids, start, end, udf):
        adjacency = self.graph.adjacency
        adjacency_weights = self.graph.adjacency_weights
        relaxed = 0
        for v in ids[start:end]:
            targets = adjacency[v]
            for u, w in zip(targets, adjacency_weights[v]):
                udf(v, u, w)
            relaxed += len(targets)
        self._edges[worker_id] += relaxed

    def _pull_range(self, worker_id, member, start, end, udf):
        in_adjacency = self.graph.in_adjacency
        in_weights = self.graph.in_adjacency_weights
        relaxed = 0
        for d in range(start, end):
            for s, w in zip(in_adjacency[d], in_weights[d]):
                if member[s]:
                    udf(s, d, w)
                    relaxed += 1
        self._edges[worker_id] += relaxed

    def _traverse(self, frontier, udf, after=None):
        grain = self.schedule.parallel_grain
        if self.schedule.direction == DENSE_PULL:
            member = frontier.bits.tolist()
            self.team.parallel_for(self.graph.num_vertices,
                                   lambda worker_id, start, end: self._pull_range(worker_id, member, start, end, udf),
                                   grain, after)
        else:
            ids = frontier.ids.tolist()
            self.team.parallel_for(len(ids),
                                   lambda worker_id, start, end: self._push_range(worker_id, ids, start, end, udf),
                                   grain, after)

    def _lazy_apply(self, queue, capacity, work):
        buffer = UpdateBuffer(self.team.num_threads, capacity, self.dedup_flags)
        queue.begin_round(buffer)
        try:
            work()
        finally:
            queue.end_round()
        queue.bulk_update(compact_updates(buffer, queue.state))
        queue.stats.buffer_compactions += 1

    def apply_update_priority(self, frontier, udf, queue):
        """
        Run udf(src, dst, weight) over the frontier's edges in the scheduled
        direction. Lazy queues get the changed vertices in bulk after the
        round; eager queues receive them in the caller thread's bins.
        """
        if self.schedule.direction == DENSE_PULL and not self.graph.has_in_edges:
            raise ConfigurationError("DensePull needs a graph built with in-edges")
        if isinstance(queue, LazyBucketQueue):
            self._lazy_apply(queue, out_degree_sum(self.graph, frontier), lambda: self._traverse(frontier, udf))
        else:
            self._warn_experimental()
            self._traverse(frontier, udf)

    def _warn_experimental(self):
        if self.schedule.direction == DENSE_PULL and not self._warned_experimental:
            self.logger.warning("TraversalEngine: DensePull with eager bucket updates is experimental")
            self._warned_experimental = True

    def _destination_counts(self, frontier):
        """
        :return: (vertices, counts) of frontier edges per destination
        """
        n = self.graph.num_vertices
        if self.schedule.direction == DENSE_PULL:
            member = frontier.bits[self.graph.in_sources]
            counts = np.bincount(self.graph.in_owner[member], minlength=n)
            vertices = np.flatnonzero(counts)
            return vertices, counts[vertices]

        ids = frontier.ids
        if out_degree_sum(self.graph, frontier) > n / self.histogram_dense_ratio:
            # dense: one count vector per thread, summed afterwards
            partial = [None] * self.team.num_threads

            def count(worker_id, start, end):
                partial[worker_id] = np.bincount(self.graph.gather_targets(ids[start:end]), minlength=n)

            self.team.parallel_for(ids.size, count)
            counts = np.sum([p for p in partial if p is not None], axis=0)
            vertices = np.flatnonzero(counts)
            return vertices, counts[vertices]
        return np.unique(self.graph.gather_targets(ids), return_counts=True)

    def histogram_constant_sum(self, frontier, constant, threshold, queue):
        """
        Add constant * (number of frontier edges into v) to every destination
        v in one step, never going below threshold
        """
        if isinstance(constant, bool) or not isinstance(constant, (int, np.integer)):
            raise ConfigurationError("histogram path needs a constant integer update, got {!r}".format(constant))
        if not isinstance(queue, LazyBucketQueue):
            raise ConfigurationError("histogram path runs on the lazy bucket queue only")
        if self.schedule.direction == DENSE_PULL and not self.graph.has_in_edges:
            raise ConfigurationError("DensePull needs a graph built with in-edges")
        vertices, counts = self._destination_counts(frontier)
        vertices = vertices.tolist()
        counts = counts.tolist()
        self._edges[0] += sum(counts)

        def apply(worker_id, start, end):
            for i in range(start, end):
                queue.update_priority_sum(vertices[i], constant * counts[i], threshold)

        self._lazy_apply(queue, len(vertices),
                         lambda: self.team.parallel_for(len(vertices), apply, self.schedule.parallel_grain))

    def _eager_round(self, frontier, udf, queue):
        self._warn_experimental()
        fused = [0] * self.team.num_threads
        after = None
        if self.schedule.fusion:
            def drain(worker_id):
                def process(live):
                    ids = live.tolist()
                    self._push_range(worker_id, ids, 0, len(ids), udf)
                fused[worker_id] = queue.fused_drain_local(worker_id, process)
            after = drain
        self._traverse(frontier, udf, after)
        queue.stats.fused_rounds += sum(fused)

    def ordered_process_loop(self, queue, udf=None, stop=None, visit=None, constant_sum=None):
        """
        Process buckets in priority order until the queue is finished or stop(key) is true
        :param queue: lazy or eager bucket queue
        :param udf: callable(src, dst, weight) -> changed
        :param stop: callable(order key of the next bucket) -> bool
        :param visit: callable(order key, frontier) run before a bucket is processed
        :param constant_sum: when set, run the histogram path with this per-edge constant,
            flooring at the current priority
        :return: RoundStats
        """
        if constant_sum is None and self.schedule.update_strategy == LAZY_CONSTANT_SUM:
            raise ConfigurationError("lazy_constant_sum needs an algorithm with a constant-sum update")
        if constant_sum is None and udf is None:
            raise ConfigurationError("no update function given")
        eager = isinstance(queue, EagerBucketQueue)
        self._edges = [0] * self.team.num_threads
        stats = queue.stats
        started = perf_counter()
        while True:
            item = queue.next_bucket()
            if item is None:
                break
            key, frontier = item
            if stop is not None and stop(key):
                self.logger.debug("TraversalEngine: stopped before bucket key {}".format(key))
                break
            self.check_time_limit(stats.rounds)
            stats.rounds += 1
            queue.note_dequeue(key)
            if visit is not None:
                visit(key, frontier)
            if constant_sum is not None:
                self.histogram_constant_sum(frontier, constant_sum, queue.get_current_priority(), queue)
            elif eager:
                self._eager_round(frontier, udf, queue)
            else:
                self.apply_update_priority(frontier, udf, queue)
        stats.wall_ms += (perf_counter() - started) * 1000.0
        self.flush_stats(queue)
        self.logger.debug("TraversalEngine: {} rounds, {} fused, {} edges".format(
            stats.rounds, stats.fused_rounds, stats.edges_relaxed))
        return stats

    def flush_stats(self, queue):
        queue.stats.edges_relaxed += sum(self._edges)
        self._edges = [0] * self.team.num_threads
        return queue.collect_stats()

    run = ordered_process_loop
