import heapq
from dataclasses import dataclass

import numpy as np

from ordered_graph_bench.Graph import INFINITE_DISTANCE
from ordered_graph_bench.algorithms import CorenessResult, DistanceResult, SetCoverResult, SsspResult


def dijkstra_oracle(graph, source, target=None):
    """
    Serial binary-heap Dijkstra
    :return: int64 distance array, 2^31 - 1 for unreachable vertices
    """
    dist = [INFINITE_DISTANCE] * graph.num_vertices
    dist[source] = 0
    adjacency = graph.adjacency
    adjacency_weights = graph.adjacency_weights
    heap = [(0, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        if v == target:
            break
        for u, w in zip(adjacency[v], adjacency_weights[v]):
            candidate = d + w
            if candidate < dist[u]:
                dist[u] = candidate
                heapq.heappush(heap, (candidate, u))
    return np.asarray(dist, dtype=np.int64)


def kcore_oracle(graph):
    """
    Serial peeling: repeatedly remove a minimum-degree vertex
    :return: int64 coreness array
    """
    n = graph.num_vertices
    degree = graph.out_degrees.tolist()
    removed = [False] * n
    coreness = [0] * n
    heap = [(d, v) for v, d in enumerate(degree)]
    heapq.heapify(heap)
    k = 0
    adjacency = graph.adjacency
    while heap:
        d, v = heapq.heappop(heap)
        if removed[v] or d != degree[v]:
            continue
        removed[v] = True
        k = max(k, d)
        coreness[v] = k
        for u in adjacency[v]:
            if not removed[u] and degree[u] > k:
                degree[u] -= 1
                heapq.heappush(heap, (degree[u], u))
    return np.asarray(coreness, dtype=np.int64)


def greedy_setcover_oracle(graph, num_sets=None):
    """
    Serial greedy set cover: always take the set covering the most
    uncovered elements, lowest id on ties
    :return: sorted int64 array of chosen set ids
    """
    num_sets = graph.num_sets if num_sets is None else num_sets
    adjacency = graph.adjacency
    covered = [False] * graph.num_vertices
    gain = [len(set(adjacency[s])) for s in range(num_sets)]
    heap = [(-g, s) for s, g in enumerate(gain) if g > 0]
    heapq.heapify(heap)
    chosen = []
    while heap:
        negative_gain, s = heapq.heappop(heap)
        current = sum(1 for e in set(adjacency[s]) if not covered[e])
        if current == 0:
            continue
        if current != -negative_gain:
            heapq.heappush(heap, (-current, s))
            continue
        chosen.append(s)
        for e in adjacency[s]:
            covered[e] = True
    return np.asarray(sorted(chosen), dtype=np.int64)


@dataclass
class OracleMismatch:
    vertex: int
    expected: object
    got: object

    def describe(self):
        return "vertex {}: expected {}, got {}".format(self.vertex, self.expected, self.got)


def first_mismatch(expected, got):
    """
    :return: OracleMismatch for the first differing index, None when equal
    """
    expected = np.asarray(expected)
    got = np.asarray(got)
    if expected.shape != got.shape:
        return OracleMismatch(-1, expected.shape, got.shape)
    differing = np.flatnonzero(expected != got)
    if differing.size == 0:
        return None
    v = int(differing[0])
    return OracleMismatch(v, expected[v].item(), got[v].item())


def check_against_oracle(graph, result, coords=None, num_sets=None, cost_factor=2.0):
    """
    Compare an algorithm result with its serial oracle
    :return: OracleMismatch or None
    """
    if isinstance(result, SsspResult):
        return first_mismatch(dijkstra_oracle(graph, result.source), result.distances)
    if isinstance(result, DistanceResult):
        expected = int(dijkstra_oracle(graph, result.source, result.target)[result.target])
        if expected != result.distance:
            return OracleMismatch(result.target, expected, result.distance)
        return None
    if isinstance(result, CorenessResult):
        return first_mismatch(kcore_oracle(graph), result.coreness)
    if isinstance(result, SetCoverResult):
        num_sets = graph.num_sets if num_sets is None else num_sets
        coverable = graph.out_degrees[num_sets:] > 0
        missed = np.flatnonzero(coverable & ~result.covered)
        if missed.size:
            return OracleMismatch(int(missed[0]) + num_sets, "covered", "uncovered")
        if result.selection_gains is not None:
            idle = np.flatnonzero(result.selection_gains < 1)
            if idle.size:
                return OracleMismatch(int(result.chosen_sets[idle[0]]), "a new element", "none")
        greedy = greedy_setcover_oracle(graph, num_sets)
        if result.chosen_sets.size > cost_factor * greedy.size:
            return OracleMismatch(-1, "at most {} sets".format(int(cost_factor * greedy.size)),
                                  "{} sets".format(result.chosen_sets.size))
        return None
    raise TypeError("no oracle for {}".format(type(result).__name__))
