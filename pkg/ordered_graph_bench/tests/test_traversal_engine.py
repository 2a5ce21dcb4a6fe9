import numpy as np
import pytest

from ordered_graph_bench.Graph import Graph, INFINITE_DISTANCE as INF
from ordered_graph_bench.LazyBucketQueue import LazyBucketQueue
from ordered_graph_bench.PriorityState import PriorityState
from ordered_graph_bench.TraversalEngine import (DedupFlags, TraversalEngine, UpdateBuffer, compact_updates,
                                                 create_queue, exclusive_prefix_sum)
from ordered_graph_bench.VertexSubset import VertexSubset
from ordered_graph_bench.WorkerTeam import WorkerTeam, VERTEX_PARALLEL_DYNAMIC
from ordered_graph_bench.algorithms import sssp_delta_stepping
from ordered_graph_bench.exceptions import ConfigurationError, TimeLimitExceeded
from ordered_graph_bench.graph_io import generate_synthetic
from ordered_graph_bench.schedule import (Schedule, DENSE_PULL, EAGER_NO_FUSION, EAGER_WITH_FUSION, LAZY,
                                          LAZY_CONSTANT_SUM, SPARSE_PUSH)


@pytest.fixture(scope="module")
def team():
    team = WorkerTeam(1)
    yield team
    team.stop()


@pytest.fixture(scope="module")
def quad_team():
    team = WorkerTeam(4, dynamic_chunk_size=4)
    yield team
    team.stop()


def relax_with(queue):
    values = queue.state.values

    def relax(s, d, w):
        return queue.update_priority_min(d, None, values.load(s) + w)
    return relax


def test_path_single_application(team):
    """
    GIVEN the directed path 0 -> 1 -> 2 with the source in the frontier
    WHEN one update round is applied
    THEN only vertex 1 changes and is recorded
    """
    graph = Graph.from_edges(3, [0, 1], [1, 2], [1, 1], build_in_edges=True)
    for direction in (SPARSE_PUSH, DENSE_PULL):
        schedule = Schedule(update_strategy=LAZY, delta=1, direction=direction)
        state = PriorityState([0, INF, INF])
        queue = create_queue(state, schedule, team, [0])
        engine = TraversalEngine(graph, schedule, team)
        engine.apply_update_priority(VertexSubset.from_ids(3, [0]), relax_with(queue), queue)
        assert state.values.array.tolist() == [0, 1, INF]
        assert [bucket for bucket in queue.buckets if bucket] == [[0], [1]]
        assert queue.stats.buffer_compactions == 1


@pytest.mark.parametrize("dedup, inserts", [(True, 1), (False, 2)])
def test_dedup_two_predecessors(team, dedup, inserts):
    """
    GIVEN a vertex improved by two frontier predecessors in the same round
    WHEN the round is compacted
    THEN dedup leaves a single entry for it
    """
    graph = Graph.from_edges(3, [0, 1], [2, 2], [5, 1])
    schedule = Schedule(update_strategy=LAZY, delta=1, dedup=dedup)
    state = PriorityState([0, 0, INF])
    queue = LazyBucketQueue(state)
    engine = TraversalEngine(graph, schedule, team)
    engine.apply_update_priority(VertexSubset.from_ids(3, [0, 1]), relax_with(queue), queue)
    assert state.values.load(2) == 1
    assert queue.stats.bucket_inserts == inserts
    if dedup:
        assert engine.dedup_flags.flags.array.tolist() == [0, 0, 0]


def test_exclusive_prefix_sum():
    offsets, total = exclusive_prefix_sum([2, 0, 1])
    assert offsets.tolist() == [0, 2, 2]
    assert total == 3
    offsets, total = exclusive_prefix_sum([])
    assert total == 0


def test_compact_updates():
    """
    GIVEN three thread segments
    WHEN they are compacted
    THEN entries land at prefix-sum offsets, and dedup keeps one copy of a vertex
    """
    state = PriorityState([4, 1, 9, 2])
    buffer = UpdateBuffer(3, capacity=3)
    buffer.append(0, 2)
    buffer.append(0, 1)
    buffer.append(2, 3)
    updates = compact_updates(buffer, state)
    assert [(u.vertex, u.key) for u in updates] == [(2, 9), (1, 1), (3, 2)]

    empty = UpdateBuffer(3, capacity=0)
    assert compact_updates(empty, state) == []

    flags = DedupFlags(4)
    deduped = UpdateBuffer(3, capacity=3, dedup_flags=flags)
    for worker_id in range(3):
        deduped.append(worker_id, 0)
    assert len(compact_updates(deduped, state)) == 1
    assert flags.flags.array.tolist() == [0, 0, 0, 0]


def histogram_fixture():
    # 0, 1, 2 point at 3; 4..8 point at 9
    src = [0, 1, 2, 4, 5, 6, 7, 8]
    dst = [3, 3, 3, 9, 9, 9, 9, 9]
    graph = Graph.from_edges(10, src, dst, np.ones(8, dtype=np.int64), build_in_edges=True)
    priorities = [2, 2, 2, 9, 2, 2, 2, 2, 2, 3]
    return graph, priorities


@pytest.mark.parametrize("direction, dense_ratio", [
    (SPARSE_PUSH, 16),
    (SPARSE_PUSH, 1),
    (DENSE_PULL, 16),
])
def test_histogram_constant_sum(team, direction, dense_ratio):
    """
    GIVEN frontier vertices pointing 3 times at a priority-9 vertex and 5 times at a priority-3 vertex
    WHEN the histogram path subtracts 1 per edge with floor 2
    THEN they end at 6 and 2, exactly as the per-edge path gives
    """
    graph, priorities = histogram_fixture()
    schedule = Schedule(update_strategy=LAZY_CONSTANT_SUM, delta=1, direction=direction)
    state = PriorityState(priorities)
    queue = create_queue(state, schedule, team, range(10))
    key, frontier = queue.dequeue_ready_set()
    assert key == 2
    engine = TraversalEngine(graph, schedule, team, histogram_dense_ratio=dense_ratio)
    engine.histogram_constant_sum(frontier, -1, 2, queue)
    assert state.values.load(3) == 6
    assert state.values.load(9) == 2

    plain_schedule = Schedule(update_strategy=LAZY, delta=1, direction=direction)
    plain_state = PriorityState(priorities)
    plain_queue = create_queue(plain_state, plain_schedule, team, range(10))
    _, plain_frontier = plain_queue.dequeue_ready_set()
    TraversalEngine(graph, plain_schedule, team).apply_update_priority(
        plain_frontier, lambda s, d, w: plain_queue.update_priority_sum(d, -1, 2), plain_queue)
    assert np.array_equal(state.values.array, plain_state.values.array)


def test_histogram_rejects_non_constant(team):
    graph, priorities = histogram_fixture()
    schedule = Schedule(update_strategy=LAZY_CONSTANT_SUM, delta=1)
    queue = create_queue(PriorityState(priorities), schedule, team, range(10))
    _, frontier = queue.dequeue_ready_set()
    engine = TraversalEngine(graph, schedule, team)
    with pytest.raises(ConfigurationError):
        engine.histogram_constant_sum(frontier, lambda count: -count, 2, queue)
    with pytest.raises(ConfigurationError):
        engine.run(queue, udf=None)


def test_dense_pull_without_in_edges(team):
    graph = Graph.from_edges(3, [0, 1], [1, 2], [1, 1])
    with pytest.raises(ConfigurationError):
        TraversalEngine(graph, Schedule(direction=DENSE_PULL), team)


def test_single_vertex_one_round(team):
    graph = Graph.from_edges(1, [], [], [])
    for strategy in (EAGER_WITH_FUSION, EAGER_NO_FUSION, LAZY):
        result = sssp_delta_stepping(graph, 0, Schedule(update_strategy=strategy), team=team)
        assert result.stats.rounds == 1
        assert result.distances.tolist() == [0]


@pytest.mark.parametrize("threads_fixture", ["team", "quad_team"])
def test_direction_invariance(request, threads_fixture):
    """
    GIVEN a random graph with in-edges
    WHEN SSSP runs push and pull under every strategy
    THEN all distance vectors agree
    """
    team = request.getfixturevalue(threads_fixture)
    graph = generate_synthetic("uniform_random", seed=11, n=64, m=512, build_in_edges=True)
    vectors = []
    for strategy in (EAGER_WITH_FUSION, EAGER_NO_FUSION, LAZY):
        for direction in (SPARSE_PUSH, DENSE_PULL):
            schedule = Schedule(update_strategy=strategy, delta=64, direction=direction,
                                parallel_grain=VERTEX_PARALLEL_DYNAMIC)
            vectors.append(sssp_delta_stepping(graph, 0, schedule, team=team).distances)
    for vector in vectors[1:]:
        assert np.array_equal(vector, vectors[0])


def test_fusion_rounds_short_path(team):
    """
    GIVEN a unit-weight path of 1000 vertices and delta 100
    WHEN SSSP runs with and without fusion
    THEN fusion needs one round per bucket while the plain eager queue needs one per vertex
    """
    graph = generate_synthetic("path", n=1000)
    fused = sssp_delta_stepping(graph, 0, Schedule(EAGER_WITH_FUSION, delta=100, fusion_threshold=1000), team=team)
    plain = sssp_delta_stepping(graph, 0, Schedule(EAGER_NO_FUSION, delta=100, fusion_threshold=1000), team=team)
    assert fused.stats.rounds <= 12
    assert plain.stats.rounds >= 990
    assert plain.stats.fused_rounds == 0
    assert fused.stats.fused_rounds > 0
    assert np.array_equal(fused.distances, plain.distances)
    assert fused.distances[-1] == 999


def test_fusion_rounds_long_path(team):
    """
    GIVEN a unit-weight path of 10^5 vertices, delta 1024 and threshold 1000
    WHEN SSSP runs with and without fusion
    THEN fusion takes at most a tenth of the rounds
    """
    graph = generate_synthetic("path", n=100000)
    schedule = Schedule(EAGER_WITH_FUSION, delta=1024, fusion_threshold=1000)
    fused = sssp_delta_stepping(graph, 0, schedule, team=team)
    plain = sssp_delta_stepping(graph, 0, schedule.replace(update_strategy=EAGER_NO_FUSION), team=team)
    assert fused.stats.rounds * 10 <= plain.stats.rounds
    assert fused.stats.priority_inversions == 0


def test_fusion_rounds_short_path_four_threads(quad_team):
    """
    GIVEN the 1000-vertex unit path and delta 100 on a four-thread team
    WHEN SSSP runs with and without fusion
    THEN the round counts match the single-thread bounds
    """
    graph = generate_synthetic("path", n=1000)
    fused = sssp_delta_stepping(graph, 0, Schedule(EAGER_WITH_FUSION, delta=100, fusion_threshold=1000),
                                team=quad_team)
    plain = sssp_delta_stepping(graph, 0, Schedule(EAGER_NO_FUSION, delta=100, fusion_threshold=1000),
                                team=quad_team)
    assert fused.stats.rounds <= 12
    assert plain.stats.rounds >= 990
    assert fused.stats.priority_inversions == 0
    assert np.array_equal(fused.distances, plain.distances)
    assert fused.distances.tolist() == list(range(1000))


def test_stop_callback_cuts_rounds(team):
    graph = generate_synthetic("path", n=50)
    schedule = Schedule(LAZY, delta=1)
    state = PriorityState(np.where(np.arange(50) == 0, 0, INF))
    queue = create_queue(state, schedule, team, [0])
    engine = TraversalEngine(graph, schedule, team)
    stats = engine.run(queue, relax_with(queue), stop=lambda key: key >= 10)
    assert stats.rounds == 10
    assert stats.edges_relaxed > 0


def test_time_limit_abandons_run(team):
    """
    GIVEN an engine whose time limit has already passed
    WHEN the ordered loop starts
    THEN it raises before processing the first bucket, and a generous limit changes nothing
    """
    graph = generate_synthetic("path", n=50)
    schedule = Schedule(LAZY, delta=1)
    state = PriorityState(np.where(np.arange(50) == 0, 0, INF))
    queue = create_queue(state, schedule, team, [0])
    engine = TraversalEngine(graph, schedule, team, time_limit_ms=0)
    with pytest.raises(TimeLimitExceeded) as info:
        engine.run(queue, relax_with(queue))
    assert info.value.rounds == 0
    assert queue.stats.rounds == 0

    result = sssp_delta_stepping(graph, 0, schedule, team=team, time_limit_ms=60000)
    assert result.distances[-1] == 49
