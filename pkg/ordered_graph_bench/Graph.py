import math
from functools import cached_property

import numpy as np

from ordered_graph_bench.exceptions import DomainError

INFINITE_DISTANCE = 2 ** 31 - 1
MAX_VERTICES = 2 ** 31 - 1
MAX_WEIGHT = 2 ** 31 - 1


def _build_csr(num_vertices, src, dst, weights):
    order = np.argsort(src, kind="stable")
    offsets = np.zeros(num_vertices + 1, dtype=np.int64)
    if src.size:
        offsets[1:] = np.cumsum(np.bincount(src, minlength=num_vertices))
    return offsets, dst[order].astype(np.int32), weights[order].astype(np.int64)


class Graph(object):
    """
    Immutable compressed adjacency with out-edges and optional in-edges.
    Vertex ids are 32-bit, weights are non-negative integers.
    """

    def __init__(self, num_vertices, offsets, targets, weights,
                 in_offsets=None, in_sources=None, in_weights=None,
                 symmetric=None, num_sets=None):
        self.num_vertices = int(num_vertices)
        self.offsets = offsets
        self.targets = targets
        self.weights = weights
        self.in_offsets = in_offsets
        self.in_sources = in_sources
        self.in_weights = in_weights
        self._symmetric = symmetric
        # number of leading set vertices when the graph is a set-cover incidence
        self.num_sets = num_sets
        for array in (offsets, targets, weights, in_offsets, in_sources, in_weights):
            if array is not None:
                array.setflags(write=False)

    @classmethod
    def from_edges(cls, num_vertices, src, dst, weights, symmetrize=False, build_in_edges=False, num_sets=None):
        """
        Build a graph from parallel edge arrays
        :param num_vertices: vertex count
        :param src: source ids
        :param dst: destination ids
        :param weights: non-negative integer weights
        :param symmetrize: add (v, u, w) for every (u, v, w)
        :param build_in_edges: also build the transposed adjacency
        :return: Graph
        """
        if num_vertices < 0 or num_vertices > MAX_VERTICES:
            raise DomainError("vertex count {} outside [0, 2^31 - 1]".format(num_vertices))
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        weights = np.asarray(weights, dtype=np.int64).ravel()
        if not (src.size == dst.size == weights.size):
            raise DomainError("edge arrays differ in length")
        if src.size:
            if min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= num_vertices:
                raise DomainError("edge endpoint outside [0, {})".format(num_vertices))
            if weights.max() > MAX_WEIGHT:
                raise DomainError("edge weight {} above 2^31 - 1".format(int(weights.max())))
            if weights.min() < 0:
                raise DomainError("negative edge weight {}".format(int(weights.min())))
        if symmetrize:
            src, dst = np.concatenate((src, dst)), np.concatenate((dst, src))
            weights = np.concatenate((weights, weights))

        offsets, targets, out_weights = _build_csr(num_vertices, src, dst, weights)
        in_offsets = in_sources = in_weights = None
        if symmetrize:
            # a symmetric graph is its own transpose
            in_offsets, in_sources, in_weights = offsets, targets, out_weights
        elif build_in_edges:
            in_offsets, in_sources, in_weights = _build_csr(num_vertices, dst, src, weights)
        return cls(num_vertices, offsets, targets, out_weights, in_offsets, in_sources, in_weights,
                   symmetric=True if symmetrize else None, num_sets=num_sets)

    @property
    def num_edges(self):
        return int(self.offsets[-1])

    @property
    def has_in_edges(self):
        return self.in_offsets is not None

    @cached_property
    def out_degrees(self):
        return np.diff(self.offsets)

    @cached_property
    def in_degrees(self):
        if not self.has_in_edges:
            return np.bincount(self.targets, minlength=self.num_vertices).astype(np.int64)
        return np.diff(self.in_offsets)

    def out_neighbors(self, v):
        start, end = self.offsets[v], self.offsets[v + 1]
        return list(zip(self.targets[start:end].tolist(), self.weights[start:end].tolist()))

    def in_neighbors(self, v):
        if not self.has_in_edges:
            raise DomainError("graph was built without in-edges")
        start, end = self.in_offsets[v], self.in_offsets[v + 1]
        return list(zip(self.in_sources[start:end].tolist(), self.in_weights[start:end].tolist()))

    # Per-vertex python lists for the relaxation loops
    @cached_property
    def adjacency(self):
        return _split(self.targets, self.offsets)

    @cached_property
    def adjacency_weights(self):
        return _split(self.weights, self.offsets)

    @cached_property
    def in_adjacency(self):
        return _split(self.in_sources, self.in_offsets)

    @cached_property
    def in_adjacency_weights(self):
        return _split(self.in_weights, self.in_offsets)

    @cached_property
    def in_owner(self):
        """
        Destination vertex of every in-edge slot
        """
        return np.repeat(np.arange(self.num_vertices, dtype=np.int64), self.in_degrees)

    def edge_sources(self):
        return np.repeat(np.arange(self.num_vertices, dtype=np.int64), self.out_degrees)

    def edge_list(self):
        return self.edge_sources(), self.targets.astype(np.int64), self.weights

    def gather_targets(self, ids):
        """
        Targets of every out-edge of the given vertices
        :param ids: vertex id array
        :return: int64 array of targets, one per edge
        """
        ids = np.asarray(ids, dtype=np.int64)
        starts = self.offsets[ids]
        lengths = self.offsets[ids + 1] - starts
        total = int(lengths.sum())
        if total == 0:
            return np.empty(0, dtype=np.int64)
        shift = np.repeat(starts - (np.cumsum(lengths) - lengths), lengths)
        return self.targets[np.arange(total, dtype=np.int64) + shift].astype(np.int64)

    @property
    def symmetric(self):
        if self._symmetric is None:
            self._symmetric = self._check_symmetric()
        return self._symmetric

    def _check_symmetric(self):
        src, dst, w = self.edge_list()
        forward = np.lexsort((w, dst, src))
        backward = np.lexsort((w, src, dst))
        return bool(np.array_equal(src[forward], dst[backward])
                    and np.array_equal(dst[forward], src[backward])
                    and np.array_equal(w[forward], w[backward]))

    def symmetrized(self):
        src, dst, w = self.edge_list()
        return Graph.from_edges(self.num_vertices, src, dst, w, symmetrize=True, num_sets=self.num_sets)

    def __repr__(self):
        return "Graph(n={}, m={})".format(self.num_vertices, self.num_edges)


def _split(values, offsets):
    flat = values.tolist()
    bounds = offsets.tolist()
    return [flat[bounds[v]:bounds[v + 1]] for v in range(len(bounds) - 1)]


class CoordinateTable(object):
    """
    Per-vertex planar (x, y) positions used by the A* heuristic
    """

    def __init__(self, x, y):
        self.x = np.asarray(x, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.float64)
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise DomainError("coordinate arrays differ in shape")
        if not (np.isfinite(self.x).all() and np.isfinite(self.y).all()):
            raise DomainError("coordinates must be finite")

    @classmethod
    def from_fixed_point(cls, x_micro, y_micro):
        """
        :param x_micro: longitudes in micro-degrees
        :param y_micro: latitudes in micro-degrees
        """
        return cls(np.asarray(x_micro, dtype=np.float64) / 1e6, np.asarray(y_micro, dtype=np.float64) / 1e6)

    def __len__(self):
        return self.x.size

    def euclid(self, u, v):
        return math.hypot(self.x[u] - self.x[v], self.y[u] - self.y[v])

    def euclid_to(self, target):
        return np.hypot(self.x - self.x[target], self.y - self.y[target])
