import threading
from contextlib import nullcontext

import numpy as np

_NO_LOCK = nullcontext()


class AtomicIntArray(object):
    """
    int64 vector with read-modify-write operations guarded by striped locks.
    Without concurrency the locks are skipped.
    """

    def __init__(self, values, concurrent=False, stripes=64):
        self.array = np.array(values, dtype=np.int64)
        self.concurrent = concurrent
        self._locks = [threading.Lock() for _ in range(stripes)] if concurrent else None

    def _lock(self, i):
        if self._locks is None:
            return _NO_LOCK
        return self._locks[i % len(self._locks)]

    def __len__(self):
        return self.array.size

    def load(self, i):
        return int(self.array[i])

    def store(self, i, value):
        with self._lock(i):
            self.array[i] = value

    def compare_and_swap(self, i, expected, value):
        with self._lock(i):
            if self.array[i] == expected:
                self.array[i] = value
                return True
            return False

    def write_min(self, i, value):
        """
        :return: True iff the stored value was strictly lowered
        """
        while True:
            old = int(self.array[i])
            if value >= old:
                return False
            if self.compare_and_swap(i, old, value):
                return True

    def fetch_add_bounded(self, i, diff, bound):
        """
        Add diff unless the value already sits at or below bound; the result
        never drops below bound.
        :return: (old, new)
        """
        with self._lock(i):
            old = int(self.array[i])
            if old <= bound:
                return old, old
            new = max(old + diff, bound)
            self.array[i] = new
            return old, new
