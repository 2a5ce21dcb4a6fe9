import logging
import threading
from dataclasses import dataclass, field, asdict
from typing import List, NamedTuple

from ordered_graph_bench.PriorityState import LOWER_FIRST


class BucketUpdate(NamedTuple):
    vertex: int
    key: int


@dataclass
class RoundStats:
    rounds: int = 0
    fused_rounds: int = 0
    edges_relaxed: int = 0
    buffer_compactions: int = 0
    stale_filtered: int = 0
    bucket_inserts: int = 0
    priority_inversions: int = 0
    monotonicity_violations: int = 0
    wall_ms: float = 0.0
    priority_trace: List[int] = field(default_factory=list)

    def to_dict(self, include_trace=False):
        values = asdict(self)
        if not include_trace:
            del values["priority_trace"]
        return values


class BucketQueue(object):
    """
    Operators shared by the lazy and eager bucket queues. Subclasses decide
    where a vertex whose priority changed gets recorded.
    """

    def __init__(self, state, num_open_buckets=128, logger=None):
        if logger is not None:
            self.logger = logger
        else:
            self.logger = logging.getLogger("ordered_graph_bench")
        self.state = state
        self.num_open_buckets = num_open_buckets
        self.stats = RoundStats()
        self._trace_lock = threading.Lock()
        self._last_key = None

    def update_priority_min(self, v, observed, candidate):
        """
        Lower v's priority to candidate
        :param observed: a value of v read earlier, used to skip the atomic when candidate cannot win
        :return: True iff the priority was strictly lowered
        """
        if observed is not None and candidate >= observed:
            return False
        if self.state.update_min(v, candidate):
            self._record(v)
            return True
        return False

    def update_priority_sum(self, v, diff, threshold):
        if self.state.update_sum(v, diff, threshold):
            self._record(v)
            return True
        return False

    def get_current_priority(self):
        if self.state.current_key is None:
            return None
        return self.state.priority_of_key(self.state.current_key)

    def finished(self):
        return self.peek_key() is None

    def finished_vertex(self, v, next_key=None):
        """
        :param next_key: order key of the bucket about to be processed, peeked when omitted
        :return: True when v's priority can no longer change
        """
        priority = self.state.values.load(v)
        if self.state.is_null(priority):
            return False
        if next_key is None:
            next_key = self.peek_key()
            if next_key is None:
                return True
        if self.state.direction == LOWER_FIRST and self.state.bucket_fn is None:
            return priority <= next_key * self.state.delta
        return self.state.key_of_priority(priority) < next_key

    def note_dequeue(self, key):
        """
        Append a processed bucket to the trace and count ordering inversions
        """
        with self._trace_lock:
            if self._last_key is not None and key < self._last_key:
                self.stats.priority_inversions += 1
                self.logger.warning("BucketQueue: bucket key {} processed after {}".format(key, self._last_key))
            self._last_key = key
            self.stats.priority_trace.append(key)

    def _violation(self, v, key):
        if not self.state.check_monotone(v, key):
            self.stats.monotonicity_violations += 1
            return True
        return False

    def _record(self, v):
        raise NotImplementedError

    def initialize(self, ids):
        raise NotImplementedError

    def next_bucket(self):
        raise NotImplementedError

    def peek_key(self):
        raise NotImplementedError

    def collect_stats(self):
        return self.stats
