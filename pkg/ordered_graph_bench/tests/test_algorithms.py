import numpy as np
import pytest

from ordered_graph_bench.Graph import Graph, INFINITE_DISTANCE as INF
from ordered_graph_bench.ReportSaver import result_digest
from ordered_graph_bench.WorkerTeam import WorkerTeam
from ordered_graph_bench.algorithms import (EuclideanHeuristic, astar, kcore, ppsp, result_vector, run_algorithm,
                                            setcover, sssp_delta_stepping, wbfs)
from ordered_graph_bench.exceptions import ConfigurationError, DomainError, ScheduleError
from ordered_graph_bench.graph_io import (bipartite_incidence, generate_synthetic, grid_coordinates,
                                          random_set_cover_instance)
from ordered_graph_bench.oracles import (check_against_oracle, dijkstra_oracle, greedy_setcover_oracle,
                                         kcore_oracle)
from ordered_graph_bench.schedule import (Schedule, DENSE_PULL, EAGER_NO_FUSION, EAGER_WITH_FUSION, LAZY,
                                          LAZY_CONSTANT_SUM, SPARSE_PUSH)

DISTANCE_STRATEGIES = (EAGER_WITH_FUSION, EAGER_NO_FUSION, LAZY)
DIRECTIONS = (SPARSE_PUSH, DENSE_PULL)
SOURCES = (0, 21, 42)


@pytest.fixture(scope="module")
def teams():
    teams = {threads: WorkerTeam(threads) for threads in (1, 4, 8)}
    yield teams
    for team in teams.values():
        team.stop()


def corpus_graph(seed, weight_range=(1, 1000)):
    return generate_synthetic("uniform_random", seed=seed, n=64, m=512, weight_range=weight_range,
                              build_in_edges=True)


def all_schedules(delta):
    for strategy in DISTANCE_STRATEGIES:
        for direction in DIRECTIONS:
            yield Schedule(update_strategy=strategy, delta=delta, direction=direction, fusion_threshold=8)


@pytest.mark.parametrize("seed", range(100))
def test_distances_match_dijkstra(teams, seed):
    """
    GIVEN a random corpus graph
    WHEN SSSP, wBFS and PPSP run under every strategy, direction and team size from several sources
    THEN distances equal Dijkstra's and buckets never come out of order
    """
    graph = corpus_graph(seed)
    for source in SOURCES:
        expected = dijkstra_oracle(graph, source)
        target = (source + 7) % graph.num_vertices
        for threads, team in teams.items():
            for schedule in all_schedules(delta=32):
                label = "{} threads={}".format(schedule.describe(), threads)
                result = sssp_delta_stepping(graph, source, schedule, team=team)
                assert np.array_equal(result.distances, expected), label
                assert result.stats.priority_inversions == 0
                assert result.stats.monotonicity_violations == 0
                result = wbfs(graph, source, schedule, team=team)
                assert np.array_equal(result.distances, expected), label
                assert result.stats.priority_inversions == 0
                result = ppsp(graph, source, target, schedule, team=team)
                assert result.distance == expected[target], label


def test_sssp_path_unit_delta():
    graph = generate_synthetic("path", n=3)
    result = sssp_delta_stepping(graph, 0, Schedule(LAZY, delta=1))
    assert result.distances.tolist() == [0, 1, 2]


def test_sssp_unreachable_sentinel():
    graph = Graph.from_edges(3, [0], [1], [4])
    result = sssp_delta_stepping(graph, 0, Schedule(EAGER_WITH_FUSION, delta=2))
    assert result.distances.tolist() == [0, 4, INF]


def test_sssp_source_out_of_range():
    graph = generate_synthetic("path", n=3)
    with pytest.raises(DomainError):
        sssp_delta_stepping(graph, 3, Schedule())


def test_sssp_rejects_constant_sum_strategy():
    graph = generate_synthetic("path", n=3)
    with pytest.raises(ScheduleError):
        sssp_delta_stepping(graph, 0, Schedule(LAZY_CONSTANT_SUM))


@pytest.mark.parametrize("seed", range(10))
def test_wbfs_matches_dijkstra(teams, seed):
    """
    GIVEN a corpus graph with small positive weights
    WHEN wBFS runs with any delta
    THEN delta is pinned to 1 and distances equal Dijkstra's
    """
    graph = corpus_graph(seed, weight_range=(1, 6))
    for source in SOURCES:
        expected = dijkstra_oracle(graph, source)
        for schedule in all_schedules(delta=16):
            result = wbfs(graph, source, schedule, team=teams[1])
            assert np.array_equal(result.distances, expected)
            reference = sssp_delta_stepping(graph, source, schedule.replace(delta=1), team=teams[1])
            assert result.stats.rounds == reference.stats.rounds


def test_wbfs_unit_weights_is_bfs():
    graph = generate_synthetic("grid", rows=3, cols=4)
    result = wbfs(graph, 0, Schedule(LAZY))
    hops = [r + c for r in range(3) for c in range(4)]
    assert result.distances.tolist() == hops


def test_wbfs_rejects_zero_weight():
    graph = Graph.from_edges(2, [0], [1], [0])
    with pytest.raises(DomainError):
        wbfs(graph, 0, Schedule())


def test_ppsp_matches_dijkstra_and_stops_early(teams):
    """
    GIVEN the 100 random corpus graphs
    WHEN PPSP runs towards every reachable target
    THEN the distance is exact, it never needs more rounds than SSSP,
        and it needs strictly fewer for at least half the targets closer than the farthest
    """
    schedule = Schedule(LAZY, delta=32)
    strict = eligible = 0
    for seed in range(100):
        graph = corpus_graph(seed)
        full = sssp_delta_stepping(graph, 0, schedule, team=teams[1])
        expected = dijkstra_oracle(graph, 0)
        farthest = expected[expected < INF].max()
        for target in range(graph.num_vertices):
            if expected[target] >= INF:
                continue
            result = ppsp(graph, 0, target, schedule, team=teams[1])
            assert result.distance == expected[target], (seed, target)
            assert result.stats.rounds <= full.stats.rounds, (seed, target)
            if expected[target] < farthest:
                eligible += 1
                strict += result.stats.rounds < full.stats.rounds
    assert strict >= 0.5 * eligible


def test_ppsp_threaded_strategies(teams):
    graph = corpus_graph(5)
    expected = dijkstra_oracle(graph, 21)
    for threads in (1, 4, 8):
        for schedule in all_schedules(delta=64):
            result = ppsp(graph, 21, 42, schedule, team=teams[threads])
            assert result.distance == expected[42]


def test_ppsp_same_source_and_target():
    graph = generate_synthetic("path", n=10)
    result = ppsp(graph, 4, 4, Schedule(EAGER_WITH_FUSION, delta=4))
    assert result.distance == 0
    assert result.stats.rounds == 0


@pytest.mark.parametrize("seed", range(5))
def test_dedup_does_not_change_results(teams, seed):
    """
    GIVEN a corpus graph
    WHEN SSSP and k-core run on the lazy queue with deduplication on and off
    THEN the final vectors are identical and only the bucket traffic differs
    """
    graph = corpus_graph(seed)
    symmetric = graph.symmetrized()
    for threads in (1, 4):
        for direction in DIRECTIONS:
            schedule = Schedule(LAZY, delta=32, direction=direction)
            on = sssp_delta_stepping(graph, 0, schedule, team=teams[threads])
            off = sssp_delta_stepping(graph, 0, schedule.replace(dedup=False), team=teams[threads])
            assert np.array_equal(on.distances, off.distances)
            assert on.stats.bucket_inserts <= off.stats.bucket_inserts

            schedule = Schedule(LAZY, delta=1, num_open_buckets=16, direction=direction)
            on = kcore(symmetric, schedule, team=teams[threads])
            off = kcore(symmetric, schedule.replace(dedup=False), team=teams[threads])
            assert np.array_equal(on.coreness, off.coreness)


@pytest.fixture(scope="module")
def grid_graph():
    graph = generate_synthetic("grid", seed=7, rows=100, cols=100, weight_range=(1, 10))
    return graph, grid_coordinates(100, 100)


ASTAR_PAIRS = np.random.default_rng(2024).integers(0, 100 * 100, size=(50, 2)).tolist()


@pytest.mark.parametrize("source, target", ASTAR_PAIRS)
def test_astar_grid_exact(teams, grid_graph, source, target):
    """
    GIVEN a 100x100 grid with weights in [1, 10) and lattice coordinates
    WHEN A* runs with the scaled Euclidean heuristic
    THEN the distance equals Dijkstra's
    """
    graph, coords = grid_graph
    expected = dijkstra_oracle(graph, source, target)[target]
    result = astar(graph, coords, source, target, Schedule(EAGER_WITH_FUSION, delta=8), team=teams[1])
    assert result.distance == expected
    assert result.stats.priority_inversions == 0


def test_astar_zero_heuristic_matches_ppsp(teams, grid_graph):
    """
    GIVEN a zero heuristic
    WHEN A* and PPSP run the same query under the same schedule
    THEN both return the same distance after the same number of rounds
    """
    graph, _ = grid_graph
    for schedule in (Schedule(LAZY, delta=8), Schedule(EAGER_WITH_FUSION, delta=8)):
        a = astar(graph, None, 0, 5555, schedule, team=teams[1],
                  heuristic=np.zeros(graph.num_vertices, dtype=np.int64))
        p = ppsp(graph, 0, 5555, schedule, team=teams[1])
        assert a.distance == p.distance
        assert a.stats.rounds == p.stats.rounds


def test_astar_inflated_heuristic_not_below_optimum(grid_graph):
    graph, coords = grid_graph
    inflated = EuclideanHeuristic(graph, coords, 9999, inflation=10.0).values
    expected = dijkstra_oracle(graph, 0, 9999)[9999]
    result = astar(graph, coords, 0, 9999, Schedule(LAZY, delta=8), heuristic=inflated)
    assert expected <= result.distance < INF


def test_astar_inadmissible_heuristic_overshoots():
    """
    GIVEN paths 0 -> 1 -> 3 of length 2 and 0 -> 2 -> 3 of length 6, with h(1) far above the truth
    WHEN A* runs with that heuristic
    THEN it settles the target through the longer path, while Dijkstra finds 2
    """
    graph = Graph.from_edges(4, [0, 1, 0, 2], [1, 3, 2, 3], [1, 1, 1, 5])
    assert dijkstra_oracle(graph, 0)[3] == 2
    heuristic = np.array([0, 100, 0, 0], dtype=np.int64)
    for strategy in DISTANCE_STRATEGIES:
        result = astar(graph, None, 0, 3, Schedule(strategy, delta=1), heuristic=heuristic)
        assert result.distance == 6, strategy


def test_astar_heuristic_is_consistent(grid_graph):
    graph, coords = grid_graph
    h = EuclideanHeuristic(graph, coords, 4242).values
    src, dst, w = graph.edge_list()
    assert h[4242] == 0
    assert np.all(h[src] <= w + h[dst])


def test_astar_needs_coordinates():
    graph = generate_synthetic("path", n=4)
    with pytest.raises(ConfigurationError):
        astar(graph, None, 0, 3, Schedule())


def test_kcore_triangle_and_star():
    triangle = Graph.from_edges(3, [0, 1, 2], [1, 2, 0], [1, 1, 1], symmetrize=True)
    star = Graph.from_edges(5, [0, 0, 0, 0], [1, 2, 3, 4], [1, 1, 1, 1], symmetrize=True)
    for strategy in (LAZY, LAZY_CONSTANT_SUM):
        schedule = Schedule(strategy, delta=1, num_open_buckets=16)
        assert kcore(triangle, schedule).coreness.tolist() == [2, 2, 2]
        assert kcore(star, schedule).coreness.tolist() == [1, 1, 1, 1, 1]


@pytest.mark.parametrize("seed", range(15))
def test_kcore_matches_peeling(teams, seed):
    """
    GIVEN a symmetrized random corpus graph
    WHEN k-core runs with the per-edge and the histogram path
    THEN both are bit-identical to serial peeling and bounded by degree
    """
    graph = generate_synthetic("uniform_random", seed=seed, n=64, m=512).symmetrized()
    expected = kcore_oracle(graph)
    for threads in (1, 4):
        for strategy in (LAZY, LAZY_CONSTANT_SUM):
            for direction in DIRECTIONS:
                schedule = Schedule(strategy, delta=1, num_open_buckets=16, direction=direction)
                result = kcore(graph, schedule, team=teams[threads])
                assert np.array_equal(result.coreness, expected)
                assert np.all(result.coreness <= graph.out_degrees)
                assert result.stats.priority_inversions == 0


def test_kcore_rejects_coarsening_and_eager():
    graph = generate_synthetic("path", n=4)
    with pytest.raises(ScheduleError):
        kcore(graph, Schedule(LAZY, delta=4))
    with pytest.raises(ScheduleError):
        kcore(graph, Schedule(EAGER_WITH_FUSION, delta=1))


def test_kcore_needs_symmetric_graph():
    graph = Graph.from_edges(3, [0, 1], [1, 2], [1, 1])
    with pytest.raises(ConfigurationError):
        kcore(graph, Schedule(LAZY))


def test_setcover_small_example():
    """
    GIVEN sets A={0,1}, B={1,2}, C={2}
    WHEN set cover runs over several seeds
    THEN it always picks two sets covering everything, A together with B for some seed
    """
    graph = bipartite_incidence([[0, 1], [1, 2], [2]], 3)
    outcomes = set()
    for seed in range(10):
        result = setcover(graph, Schedule(LAZY, delta=1), seed=seed)
        assert result.covered.all()
        assert len(result.chosen_sets) == 2
        outcomes.add(tuple(result.chosen_sets.tolist()))
    assert (0, 1) in outcomes
    assert outcomes <= {(0, 1), (0, 2)}


def test_setcover_single_covering_set():
    graph = bipartite_incidence([[0, 1, 2], [0], [1]], 3)
    for strategy in (LAZY, LAZY_CONSTANT_SUM):
        result = setcover(graph, Schedule(strategy, delta=1))
        assert result.chosen_sets.tolist() == [0]


def test_setcover_reports_uncoverable():
    graph = bipartite_incidence([[0], [0, 1]], 4)
    result = setcover(graph, Schedule(LAZY))
    assert result.uncoverable.tolist() == [2, 3]
    assert result.covered.tolist() == [True, True, False, False]


@pytest.mark.parametrize("seed", range(200))
def test_setcover_valid_and_near_greedy(teams, seed):
    """
    GIVEN a random bipartite instance with at most 64 sets and 256 elements
    WHEN set cover runs under both lazy strategies
    THEN the cover is valid, every chosen set covered a new element when it was picked,
        and the cost is at most twice the greedy cost
    """
    rng = np.random.default_rng(seed)
    num_sets = int(rng.integers(1, 65))
    num_elements = int(rng.integers(1, 257))
    sets = random_set_cover_instance(num_sets, num_elements, float(rng.uniform(0.02, 0.3)), seed=seed)
    graph = bipartite_incidence(sets, num_elements)
    greedy = greedy_setcover_oracle(graph)
    for strategy in (LAZY, LAZY_CONSTANT_SUM):
        result = setcover(graph, Schedule(strategy, delta=1), seed=seed, team=teams[1])
        assert check_against_oracle(graph, result) is None
        assert len(result.selection_gains) == len(result.chosen_sets)
        assert np.all(result.selection_gains >= 1)
        assert result.selection_gains.sum() == np.count_nonzero(result.covered)
        assert len(result.chosen_sets) <= 2 * len(greedy)
        assert result.stats.priority_inversions == 0


def test_setcover_rejects_bad_epsilon():
    graph = bipartite_incidence([[0]], 1)
    with pytest.raises(DomainError):
        setcover(graph, Schedule(LAZY), epsilon=0.0)


@pytest.mark.parametrize("algo", ["sssp", "kcore", "setcover"])
def test_digest_determinism_across_threads(teams, algo):
    """
    GIVEN one input per algorithm
    WHEN it runs twice on 1, 4 and 8 threads
    THEN every run yields the same digest
    """
    if algo == "setcover":
        graph = bipartite_incidence(random_set_cover_instance(30, 90, 0.1, seed=3), 90)
        schedule = Schedule(LAZY, delta=1)
    elif algo == "kcore":
        graph = generate_synthetic("uniform_random", seed=8, n=64, m=512).symmetrized()
        schedule = Schedule(LAZY_CONSTANT_SUM, delta=1, num_open_buckets=16)
    else:
        graph = corpus_graph(8)
        schedule = Schedule(EAGER_WITH_FUSION, delta=64, fusion_threshold=8)
    digests = set()
    for threads in (1, 4, 8):
        for _ in range(2):
            result = run_algorithm(algo, graph, schedule, source=0, team=teams[threads], seed=5)
            digests.add(result_digest(result_vector(result)))
    assert len(digests) == 1
