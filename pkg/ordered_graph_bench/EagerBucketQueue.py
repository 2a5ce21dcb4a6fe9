import numpy as np

from ordered_graph_bench.BucketQueue import BucketQueue
from ordered_graph_bench.PriorityState import NULL_KEY
from ordered_graph_bench.VertexSubset import VertexSubset
from ordered_graph_bench.WorkerTeam import current_worker_id


class LocalBins(object):
    """
    One thread's bins for a window of keys starting at base, plus overflow.
    Only the owning thread touches them between barriers.
    """

    def __init__(self, window):
        self.window = window
        self.base = None
        self.bins = [[] for _ in range(window)]
        self.overflow = []
        # no bin below this index holds anything
        self.low = 0
        self.inserts = 0
        self.stale = 0
        self.violations = 0

    def insert(self, v, key, floor_key):
        if self.base is None:
            self.base = key if floor_key is None else min(key, floor_key)
            self.low = 0
        index = max(key - self.base, 0)
        if index < self.window:
            self.bins[index].append(v)
            if index < self.low:
                self.low = index
        else:
            self.overflow.append(v)
        self.inserts += 1

    def min_key(self, state):
        """
        Lowest key holding a live vertex; bins holding only stale entries are cleared
        """
        if self.base is None:
            return None
        index = self.low
        while index < self.window:
            entries = self.bins[index]
            if entries:
                key = self.base + index
                ids = np.asarray(entries, dtype=np.int64)
                live = ids[state.keys_array(ids) == key]
                if live.size:
                    if live.size != ids.size:
                        self.stale += ids.size - live.size
                        self.bins[index] = live.tolist()
                    self.low = index
                    return key
                self.stale += ids.size
                self.bins[index] = []
            index += 1
        self.low = self.window
        if not self.overflow:
            return None
        ids = np.asarray(self.overflow, dtype=np.int64)
        keys = state.keys_array(ids)
        live = (keys != NULL_KEY) & (keys >= self.base + self.window)
        self.stale += ids.size - int(np.count_nonzero(live))
        self.overflow = ids[live].tolist()
        if not live.any():
            return None
        return int(keys[live].min())

    def rebase(self, key, state):
        self.bins = [[] for _ in range(self.window)]
        self.base = key
        self.low = 0
        if not self.overflow:
            return
        ids = np.asarray(self.overflow, dtype=np.int64)
        keys = state.keys_array(ids)
        live = (keys != NULL_KEY) & (keys >= key)
        self.stale += ids.size - int(np.count_nonzero(live))
        ids, keys = ids[live], keys[live]
        in_window = keys < key + self.window
        for v, k in zip(ids[in_window].tolist(), keys[in_window].tolist()):
            self.bins[k - key].append(v)
        self.overflow = ids[~in_window].tolist()

    def take(self, key):
        if self.base is None:
            return []
        index = key - self.base
        if index < 0 or index >= self.window:
            return []
        entries = self.bins[index]
        self.bins[index] = []
        return entries


class EagerBucketQueue(BucketQueue):
    """
    Per-thread bins written directly by the thread that changed a priority.
    The global frontier of a round is every thread's bin for the minimum key
    proposed by any thread. With fusion, a thread keeps draining its own bin
    for the current key while that bin stays below fusion_threshold.
    """

    def __init__(self, state, num_threads=1, num_open_buckets=128, fusion_threshold=None, logger=None):
        super(EagerBucketQueue, self).__init__(state, num_open_buckets, logger)
        self.num_threads = num_threads
        self.fusion_threshold = fusion_threshold
        self.locals = [LocalBins(num_open_buckets) for _ in range(num_threads)]

    def initialize(self, ids):
        ids = np.asarray(ids, dtype=np.int64)
        keys = self.state.keys_array(ids)
        live = keys != NULL_KEY
        if not live.any():
            return
        lowest = int(keys[live].min())
        for i, (v, key) in enumerate(zip(ids[live].tolist(), keys[live].tolist())):
            self.locals[i % self.num_threads].insert(v, key, lowest)

    def _record(self, v):
        key = self.state.key_of(v)
        if key == NULL_KEY:
            return
        bins = self.locals[current_worker_id()]
        if not self.state.check_monotone(v, key):
            bins.violations += 1
        bins.insert(v, key, self.state.current_key)

    def peek_key(self):
        proposals = [k for k in (bins.min_key(self.state) for bins in self.locals) if k is not None]
        if not proposals:
            return None
        return min(proposals)

    def next_global_bucket(self):
        """
        Gather every thread's bin for the minimum proposed key
        :return: (order key, VertexSubset) or None when the queue is finished
        """
        while True:
            key = self.peek_key()
            if key is None:
                return None
            parts = []
            for bins in self.locals:
                if bins.base is not None and key - bins.base >= bins.window:
                    bins.rebase(key, self.state)
                parts.extend(bins.take(key))
            ids = np.unique(np.asarray(parts, dtype=np.int64))
            live = ids[self.state.keys_array(ids) == key]
            self.stats.stale_filtered += len(parts) - live.size
            if live.size:
                self.state.current_key = key
                return key, VertexSubset(self.state.num_vertices, ids=live)

    next_bucket = next_global_bucket

    def fused_drain_local(self, worker_id, process):
        """
        Process the caller's own bin for the current key while it is non-empty
        and below the fusion threshold
        :param worker_id: owning thread
        :param process: callable(ids) relaxing the given vertices
        :return: number of fused sub-rounds
        """
        bins = self.locals[worker_id]
        key = self.state.current_key
        if self.fusion_threshold is None or bins.base is None or key is None:
            return 0
        index = key - bins.base
        if index < 0 or index >= bins.window:
            return 0
        fused = 0
        while True:
            entries = bins.bins[index]
            if not entries or len(entries) >= self.fusion_threshold:
                return fused
            bins.bins[index] = []
            ids = np.unique(np.asarray(entries, dtype=np.int64))
            live = ids[self.state.keys_array(ids) == key]
            bins.stale += len(entries) - live.size
            if live.size:
                self.note_dequeue(key)
                process(live)
                fused += 1

    def collect_stats(self):
        self.stats.bucket_inserts = sum(bins.inserts for bins in self.locals)
        self.stats.stale_filtered += sum(bins.stale for bins in self.locals)
        self.stats.monotonicity_violations += sum(bins.violations for bins in self.locals)
        for bins in self.locals:
            bins.stale = 0
            bins.violations = 0
        return self.stats
