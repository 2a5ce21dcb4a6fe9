import logging
import threading
from threading import Thread

VERTEX_PARALLEL_STATIC = "vertex-parallel-static"
VERTEX_PARALLEL_DYNAMIC = "vertex-parallel-dynamic"
GRAINS = (VERTEX_PARALLEL_STATIC, VERTEX_PARALLEL_DYNAMIC)

_worker_local = threading.local()


def current_worker_id():
    """
    Id of the worker running the caller, 0 on the controlling thread
    """
    return getattr(_worker_local, "worker_id", 0)


class BucketWorker(Thread):
    """
    One member of a WorkerTeam. Waits at the team barrier, runs the posted
    task, then waits again so the controller can join the round.
    """

    def __init__(self, team, worker_id, logger=None):
        super(BucketWorker, self).__init__(name="BucketWorker-{}".format(worker_id), daemon=True)
        if logger is not None:
            self.logger = logger
        else:
            self.logger = logging
        self.team = team
        self.worker_id = worker_id
        self._stop_event = threading.Event()

    def run(self):
        _worker_local.worker_id = self.worker_id
        while True:
            self.team.barrier.wait()
            if self.is_stopped():
                break
            try:
                self.team.task(self.worker_id)
            except Exception as e:
                self.logger.error("BucketWorker: worker {} failed".format(self.worker_id))
                self.logger.exception(e)
                with self.team.error_lock:
                    self.team.errors.append(e)
            self.team.barrier.wait()

    def stop(self):
        self._stop_event.set()

    def is_stopped(self):
        return self._stop_event.is_set()


class WorkerTeam(object):
    """
    A fixed pool of worker threads driven round by round through one cyclic
    barrier shared with the controlling thread. With a single thread, tasks
    run inline on the caller.
    """

    def __init__(self, num_threads=1, logger=None, dynamic_chunk_size=64):
        if num_threads < 1:
            raise ValueError("a team needs at least one thread, got {}".format(num_threads))
        if logger is not None:
            self.logger = logger
        else:
            self.logger = logging
        self.num_threads = num_threads
        self.dynamic_chunk_size = dynamic_chunk_size
        self.task = None
        self.errors = []
        self.error_lock = threading.Lock()
        self.workers = []
        self.barrier = None
        if num_threads > 1:
            self.barrier = threading.Barrier(num_threads + 1)
            self.workers = [BucketWorker(self, i, self.logger) for i in range(num_threads)]
            for worker in self.workers:
                worker.start()
            self.logger.debug("WorkerTeam: started {} workers".format(num_threads))

    @property
    def concurrent(self):
        return self.num_threads > 1

    def run(self, task):
        """
        Run task(worker_id) on every worker and wait for all of them
        :param task: callable taking the worker id
        """
        if not self.workers:
            _worker_local.worker_id = 0
            task(0)
            return
        self.task = task
        self.errors = []
        # release the round, then wait for everyone to finish it
        self.barrier.wait()
        self.barrier.wait()
        self.task = None
        if self.errors:
            raise self.errors[0]

    def parallel_for(self, count, body, grain=VERTEX_PARALLEL_STATIC, after=None):
        """
        Split range(count) across the team
        :param count: number of items
        :param body: callable(worker_id, start, end) for a contiguous chunk
        :param grain: static slices or dynamic chunks from a shared cursor
        :param after: optional callable(worker_id) run by each worker once its chunks are done
        """
        num_threads = self.num_threads
        if grain == VERTEX_PARALLEL_DYNAMIC and num_threads > 1:
            cursor = [0]
            cursor_lock = threading.Lock()
            chunk = self.dynamic_chunk_size

            def task(worker_id):
                while True:
                    with cursor_lock:
                        start = cursor[0]
                        cursor[0] = min(count, start + chunk)
                    if start >= count:
                        break
                    body(worker_id, start, min(count, start + chunk))
                if after is not None:
                    after(worker_id)
        else:
            def task(worker_id):
                start = count * worker_id // num_threads
                end = count * (worker_id + 1) // num_threads
                if start < end:
                    body(worker_id, start, end)
                if after is not None:
                    after(worker_id)
        self.run(task)

    def stop(self):
        if not self.workers:
            return
        for worker in self.workers:
            worker.stop()
        self.barrier.wait()
        for worker in self.workers:
            worker.join()
        self.workers = []
        self.logger.debug("WorkerTeam: stopped")

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        self.stop()
