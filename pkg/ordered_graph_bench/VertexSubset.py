import numpy as np

SPARSE = "sparse"
DENSE = "dense"


class VertexSubset(object):
    """
    A frontier over num_vertices vertices, held either as a sorted id array
    (sparse) or as a boolean membership bitmap (dense).
    """

    def __init__(self, num_vertices, ids=None, bits=None):
        self.num_vertices = num_vertices
        self._ids = ids
        self._bits = bits
        self._size = None if bits is not None else (0 if ids is None else int(ids.size))

    @classmethod
    def from_ids(cls, num_vertices, ids, dedup=True):
        ids = np.asarray(ids, dtype=np.int64).ravel()
        if dedup:
            ids = np.unique(ids)
        return cls(num_vertices, ids=ids)

    @classmethod
    def from_bitmap(cls, bits):
        bits = np.asarray(bits, dtype=bool).ravel()
        return cls(bits.size, bits=bits)

    @classmethod
    def empty(cls, num_vertices):
        return cls(num_vertices, ids=np.empty(0, dtype=np.int64))

    @classmethod
    def full(cls, num_vertices):
        return cls(num_vertices, ids=np.arange(num_vertices, dtype=np.int64))

    @property
    def is_dense(self):
        return self._bits is not None

    @property
    def size(self):
        if self._size is None:
            self._size = int(np.count_nonzero(self._bits))
        return self._size

    def __len__(self):
        return self.size

    @property
    def ids(self):
        if self._ids is None:
            self._ids = np.flatnonzero(self._bits).astype(np.int64)
        return self._ids

    @property
    def bits(self):
        if self._bits is None:
            bits = np.zeros(self.num_vertices, dtype=bool)
            bits[self._ids] = True
            self._bits = bits
        return self._bits

    def to_sparse(self):
        return VertexSubset(self.num_vertices, ids=self.ids)

    def to_dense(self):
        return VertexSubset(self.num_vertices, bits=self.bits)

    def __contains__(self, v):
        if self._bits is not None:
            return bool(self._bits[v])
        return bool(np.any(self._ids == v))

    def __repr__(self):
        return "VertexSubset(n={}, size={}, {})".format(self.num_vertices, self.size,
                                                         DENSE if self.is_dense else SPARSE)


def subset_convert(subset, representation):
    """
    Convert a frontier between its sparse and dense forms
    :param subset: VertexSubset
    :param representation: "sparse" or "dense"
    :return: VertexSubset with the same membership
    """
    if representation == SPARSE:
        return subset.to_sparse()
    if representation == DENSE:
        return subset.to_dense()
    raise ValueError("unknown representation {}".format(representation))


def out_degree_sum(graph, subset):
    if subset.size == 0:
        return 0
    return int(graph.out_degrees[subset.ids].sum())
