import numpy as np

from ordered_graph_bench.BucketQueue import BucketQueue, BucketUpdate
from ordered_graph_bench.PriorityState import NULL_KEY
from ordered_graph_bench.VertexSubset import VertexSubset
from ordered_graph_bench.WorkerTeam import current_worker_id


class LazyBucketQueue(BucketQueue):
    """
    Materialized buckets for a window of num_open_buckets order keys plus an
    overflow list for everything further out. Priority changes made during a
    round are buffered and applied in bulk after the round; entries left
    behind by a move stay where they are and are filtered on dequeue.
    """

    def __init__(self, state, num_open_buckets=128, logger=None):
        super(LazyBucketQueue, self).__init__(state, num_open_buckets, logger)
        self.base = None
        self.cursor = 0
        self.buckets = [[] for _ in range(num_open_buckets)]
        self.overflow = []
        self.buffer = None

    def initialize(self, ids):
        ids = np.asarray(ids, dtype=np.int64)
        keys = self.state.keys_array(ids)
        live = keys != NULL_KEY
        if live.any():
            self.base = int(keys[live].min())
        self.bulk_update(BucketUpdate(v, k) for v, k in zip(ids[live].tolist(), keys[live].tolist()))

    def begin_round(self, buffer):
        self.buffer = buffer

    def end_round(self):
        self.buffer = None

    def _record(self, v):
        if self.buffer is not None:
            self.buffer.append(current_worker_id(), v)
            return
        key = self.state.key_of(v)
        if key != NULL_KEY:
            self._place(v, key)

    def _place(self, v, key):
        if self.base is None:
            self.base = key
            self.cursor = 0
        if key < self.base + self.cursor:
            # bucket already drained
            self._violation(v, key)
            return
        index = key - self.base
        if index < self.num_open_buckets:
            self.buckets[index].append(v)
        else:
            self.overflow.append(v)
        self.stats.bucket_inserts += 1

    def bulk_update(self, updates):
        """
        Append every (vertex, key) pair to its open bucket or the overflow
        :param updates: iterable of BucketUpdate
        """
        for v, key in updates:
            if key != NULL_KEY:
                self._place(v, key)

    def _rebin_overflow(self):
        if not self.overflow:
            return False
        raw = len(self.overflow)
        ids = np.unique(np.asarray(self.overflow, dtype=np.int64))
        self.overflow = []
        keys = self.state.keys_array(ids)
        window_end = self.base + self.num_open_buckets
        # keys inside the drained window were re-binned when they moved
        live = (keys != NULL_KEY) & (keys >= window_end)
        self.stats.stale_filtered += raw - int(np.count_nonzero(live))
        if not live.any():
            return False
        ids, keys = ids[live], keys[live]
        self.base = int(keys.min())
        self.cursor = 0
        self.logger.debug("LazyBucketQueue: window moved to key {}".format(self.base))
        in_window = keys < self.base + self.num_open_buckets
        for v, key in zip(ids[in_window].tolist(), keys[in_window].tolist()):
            self.buckets[key - self.base].append(v)
        self.overflow = ids[~in_window].tolist()
        return True

    def peek_key(self):
        """
        Order key of the lowest bucket holding a live vertex, None when finished
        """
        if self.base is None:
            return None
        while True:
            while self.cursor < self.num_open_buckets:
                bucket = self.buckets[self.cursor]
                if bucket:
                    key = self.base + self.cursor
                    ids = np.unique(np.asarray(bucket, dtype=np.int64))
                    live = ids[self.state.keys_array(ids) == key]
                    self.stats.stale_filtered += len(bucket) - live.size
                    if live.size:
                        self.buckets[self.cursor] = live.tolist()
                        return key
                    self.buckets[self.cursor] = []
                self.cursor += 1
            if not self._rebin_overflow():
                return None

    def dequeue_ready_set(self):
        """
        Remove the lowest live bucket
        :return: (order key, VertexSubset) or None when the queue is finished
        """
        key = self.peek_key()
        if key is None:
            return None
        ids = np.asarray(self.buckets[self.cursor], dtype=np.int64)
        self.buckets[self.cursor] = []
        self.state.current_key = key
        return key, VertexSubset(self.state.num_vertices, ids=ids)

    next_bucket = dequeue_ready_set
