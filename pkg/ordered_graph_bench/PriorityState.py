import logging

import numpy as np

from ordered_graph_bench.AtomicIntArray import AtomicIntArray
from ordered_graph_bench.Graph import INFINITE_DISTANCE
from ordered_graph_bench.exceptions import DomainError

LOWER_FIRST = "lower_first"
HIGHER_FIRST = "higher_first"
DIRECTIONS = (LOWER_FIRST, HIGHER_FIRST)

# order key of a vertex that is never binned
NULL_KEY = np.iinfo(np.int64).max


def coarsen(priority, delta):
    """
    Bucket of a priority under coarsening factor delta
    """
    if delta < 1:
        raise DomainError("coarsening factor must be >= 1, got {}".format(delta))
    return priority // delta


class PriorityState(object):
    """
    Per-vertex priorities plus the rule mapping a priority to its bucket.

    Buckets are compared through order keys: the bucket itself for
    lower_first, its negation for higher_first, so queues always drain the
    smallest key first while stored priorities are never negated.
    The null priority is 2^31 - 1 for lower_first and anything <= 0 for
    higher_first; null vertices are never binned.
    """

    def __init__(self, priorities, delta=1, direction=LOWER_FIRST, bucket_fn=None,
                 concurrent=False, debug=False, logger=None):
        if delta < 1:
            raise DomainError("coarsening factor must be >= 1, got {}".format(delta))
        if direction not in DIRECTIONS:
            raise DomainError("unknown priority direction {}".format(direction))
        if logger is not None:
            self.logger = logger
        else:
            self.logger = logging.getLogger("ordered_graph_bench")
        self.values = AtomicIntArray(priorities, concurrent=concurrent)
        self.delta = delta
        self.direction = direction
        self.bucket_fn = bucket_fn
        self.debug = debug
        self.current_key = None

    @property
    def num_vertices(self):
        return len(self.values)

    @property
    def lower_first(self):
        return self.direction == LOWER_FIRST

    def is_null(self, priority):
        if self.lower_first:
            return priority >= INFINITE_DISTANCE
        return priority <= 0

    def key_of_priority(self, priority):
        if self.is_null(priority):
            return NULL_KEY
        bucket = int(self.bucket_fn(priority)) if self.bucket_fn is not None else priority // self.delta
        return bucket if self.lower_first else -bucket

    def key_of(self, v):
        return self.key_of_priority(self.values.load(v))

    def keys_array(self, ids):
        """
        Order keys of many vertices at once
        :param ids: int64 id array
        :return: int64 key array with NULL_KEY for null priorities
        """
        p = self.values.array[ids]
        if self.bucket_fn is not None:
            buckets = np.asarray(self.bucket_fn(np.maximum(p, 1)), dtype=np.int64)
        else:
            buckets = p // self.delta
        if self.lower_first:
            null = p >= INFINITE_DISTANCE
        else:
            null = p <= 0
            buckets = -buckets
        return np.where(null, NULL_KEY, buckets)

    def priority_of_key(self, key):
        """
        Lowest priority that maps to the bucket with the given order key
        """
        bucket = key if self.lower_first else -key
        if self.bucket_fn is not None:
            return bucket
        return bucket * self.delta

    def update_min(self, v, candidate):
        return self.values.write_min(v, candidate)

    def update_sum(self, v, diff, threshold):
        old, new = self.values.fetch_add_bounded(v, diff, threshold)
        return new != old

    def check_monotone(self, v, key):
        """
        :return: False when key precedes the bucket being processed
        """
        if self.current_key is None or key >= self.current_key:
            return True
        message = "PriorityState: vertex {} moved to bucket key {} before current key {}".format(
            v, key, self.current_key)
        if self.debug:
            raise AssertionError(message)
        self.logger.debug(message)
        return False
