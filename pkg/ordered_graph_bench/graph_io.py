import logging

import numpy as np

from ordered_graph_bench.Graph import Graph, CoordinateTable, MAX_WEIGHT
from ordered_graph_bench.exceptions import ConfigurationError, DomainError, GraphFormatError

logger = logging.getLogger("ordered_graph_bench.graph_io")

SYNTHETIC_KINDS = ("path", "grid", "uniform_random")


def _header_value(parts, line_number):
    try:
        value = int(parts[1])
    except ValueError:
        raise GraphFormatError("header '# {} {}' is not an integer".format(parts[0], parts[1]), line_number)
    if value < 0:
        raise GraphFormatError("header '# {}' is negative".format(parts[0]), line_number)
    return value


def load_weighted_edge_list(path, symmetrize=False, build_in_edges=False):
    """
    Load a weighted edge list ("src dst weight" per line)
    :param path: .wel file
    :param symmetrize: add the reverse of every edge
    :param build_in_edges: build the transposed adjacency
    :return: Graph
    """
    header_n = None
    num_sets = None
    src, dst, weights = [], [], []
    with open(path) as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "n":
                    header_n = _header_value(parts, line_number)
                elif len(parts) == 2 and parts[0] == "sets":
                    num_sets = _header_value(parts, line_number)
                continue
            parts = line.split()
            if len(parts) != 3:
                raise GraphFormatError("expected 'src dst weight', got '{}'".format(line), line_number)
            try:
                s, d, w = int(parts[0]), int(parts[1]), int(parts[2])
            except ValueError:
                raise GraphFormatError("non-integer field in '{}'".format(line), line_number)
            if s < 0 or d < 0:
                raise GraphFormatError("negative vertex id in '{}'".format(line), line_number)
            if w < 0:
                raise DomainError("negative weight {} on line {}".format(w, line_number))
            if w > MAX_WEIGHT:
                raise DomainError("weight {} on line {} above 2^31 - 1".format(w, line_number))
            src.append(s)
            dst.append(d)
            weights.append(w)

    num_vertices = max(max(src) + 1, max(dst) + 1) if src else 0
    if header_n is not None:
        if header_n < num_vertices:
            logger.warning("graph_io: header declares {} vertices but ids reach {}, using {}".format(
                header_n, num_vertices - 1, num_vertices))
        else:
            num_vertices = header_n
    logger.debug("graph_io: loaded {} edges over {} vertices from {}".format(len(src), num_vertices, path))
    return Graph.from_edges(num_vertices, src, dst, weights, symmetrize=symmetrize,
                            build_in_edges=build_in_edges, num_sets=num_sets)


def save_weighted_edge_list(graph, path):
    src, dst, weights = graph.edge_list()
    with open(path, 'w') as f:
        f.write("# n {}\n".format(graph.num_vertices))
        if graph.num_sets is not None:
            f.write("# sets {}\n".format(graph.num_sets))
        for s, d, w in zip(src.tolist(), dst.tolist(), weights.tolist()):
            f.write("{} {} {}\n".format(s, d, w))


def load_coordinates(path, num_vertices, fixed_point=False):
    """
    Load "v lat lon" lines
    :param path: .coords file
    :param num_vertices: vertex count of the graph the coordinates belong to
    :param fixed_point: values are integer micro-degrees
    :return: CoordinateTable
    """
    x = np.full(num_vertices, np.nan)
    y = np.full(num_vertices, np.nan)
    with open(path) as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise GraphFormatError("expected 'v lat lon', got '{}'".format(line), line_number)
            try:
                v = int(parts[0])
                lat = int(parts[1]) / 1e6 if fixed_point else float(parts[1])
                lon = int(parts[2]) / 1e6 if fixed_point else float(parts[2])
            except ValueError:
                raise GraphFormatError("malformed coordinate line '{}'".format(line), line_number)
            if v < 0 or v >= num_vertices:
                raise GraphFormatError("vertex {} outside [0, {})".format(v, num_vertices), line_number)
            x[v] = lon
            y[v] = lat
    missing = int(np.count_nonzero(np.isnan(x)))
    if missing:
        raise ConfigurationError("coordinates missing for {} of {} vertices".format(missing, num_vertices))
    return CoordinateTable(x, y)


def save_coordinates(coords, path):
    with open(path, 'w') as f:
        for v, (lon, lat) in enumerate(zip(coords.x.tolist(), coords.y.tolist())):
            f.write("{} {!r} {!r}\n".format(v, lat, lon))


def _weights(rng, count, weight_range):
    if weight_range is None:
        return np.ones(count, dtype=np.int64)
    lo, hi = weight_range
    if lo < 0 or hi <= lo:
        raise DomainError("weight range [{}, {}) is empty or negative".format(lo, hi))
    return rng.integers(lo, hi, size=count, dtype=np.int64)


def generate_synthetic(kind, seed=0, **params):
    """
    Generate a deterministic synthetic graph
    :param kind: "path", "grid" or "uniform_random"
    :param seed: random seed
    :param params: n for path; rows, cols for grid; n, m for uniform_random;
        weight_range=(lo, hi) for all (path and grid default to unit weights)
    :return: Graph
    """
    rng = np.random.default_rng(seed)
    if kind == "path":
        n = params.get("n", 0)
        if n < 2:
            raise DomainError("path needs n >= 2, got {}".format(n))
        left = np.arange(n - 1, dtype=np.int64)
        w = _weights(rng, n - 1, params.get("weight_range"))
        return Graph.from_edges(n, left, left + 1, w, symmetrize=True)
    if kind == "grid":
        rows, cols = params.get("rows", 0), params.get("cols", 0)
        if rows < 2 or cols < 2:
            raise DomainError("grid needs rows, cols >= 2, got {}x{}".format(rows, cols))
        ids = np.arange(rows * cols, dtype=np.int64).reshape(rows, cols)
        src = np.concatenate((ids[:, :-1].ravel(), ids[:-1, :].ravel()))
        dst = np.concatenate((ids[:, 1:].ravel(), ids[1:, :].ravel()))
        w = _weights(rng, src.size, params.get("weight_range"))
        return Graph.from_edges(rows * cols, src, dst, w, symmetrize=True)
    if kind == "uniform_random":
        n, m = params.get("n", 0), params.get("m", 0)
        if n < 2 or m < 1:
            raise DomainError("uniform_random needs n >= 2 and m >= 1, got n={} m={}".format(n, m))
        src = rng.integers(0, n, size=m, dtype=np.int64)
        dst = rng.integers(0, n, size=m, dtype=np.int64)
        loops = np.flatnonzero(src == dst)
        while loops.size:
            dst[loops] = rng.integers(0, n, size=loops.size, dtype=np.int64)
            loops = loops[src[loops] == dst[loops]]
        w = _weights(rng, m, params.get("weight_range", (1, 1000)))
        return Graph.from_edges(n, src, dst, w, build_in_edges=params.get("build_in_edges", False))
    raise DomainError("unknown synthetic graph kind {}".format(kind))


def grid_coordinates(rows, cols):
    """
    Lattice positions matching generate_synthetic("grid", rows=rows, cols=cols)
    """
    ids = np.arange(rows * cols)
    return CoordinateTable(ids % cols, ids // cols)


def bipartite_incidence(sets, num_elements):
    """
    Build the symmetric set/element incidence graph. Set i is vertex i,
    element e is vertex len(sets) + e.
    :param sets: iterable of element id iterables
    :param num_elements: element count
    :return: Graph with num_sets set
    """
    sets = [sorted(set(members)) for members in sets]
    num_sets = len(sets)
    src, dst = [], []
    for i, members in enumerate(sets):
        for e in members:
            if e < 0 or e >= num_elements:
                raise DomainError("element {} outside [0, {})".format(e, num_elements))
            src.append(i)
            dst.append(num_sets + e)
    return Graph.from_edges(num_sets + num_elements, src, dst, np.ones(len(src), dtype=np.int64),
                            symmetrize=True, num_sets=num_sets)


def random_set_cover_instance(num_sets, num_elements, density, seed=0):
    """
    Random sets where every element joins every set with probability density
    :return: list of element id lists
    """
    if num_sets < 1 or num_elements < 1:
        raise DomainError("set cover instance needs at least one set and one element")
    if not 0.0 < density <= 1.0:
        raise DomainError("density must lie in (0, 1], got {}".format(density))
    rng = np.random.default_rng(seed)
    membership = rng.random((num_sets, num_elements)) < density
    return [np.flatnonzero(row).tolist() for row in membership]
