import functools
import json
import os
import sys

import click
import numpy as np

from ordered_graph_bench import create_context, load_config, save_config
from ordered_graph_bench.ReportSaver import ReportSaver, RunReport, result_digest
from ordered_graph_bench.ScheduleTuner import tune as tune_schedules
from ordered_graph_bench.WorkerTeam import GRAINS, WorkerTeam
from ordered_graph_bench.algorithms import ALGORITHMS, run_algorithm, result_vector
from ordered_graph_bench.exceptions import (ConfigurationError, DomainError, GraphBenchError, GraphFormatError,
                                            TuneError, VerificationError)
from ordered_graph_bench.graph_io import (bipartite_incidence, generate_synthetic, grid_coordinates,
                                          load_coordinates, load_weighted_edge_list, random_set_cover_instance,
                                          save_coordinates, save_weighted_edge_list)
from ordered_graph_bench.oracles import check_against_oracle
from ordered_graph_bench.schedule import (DENSE_PULL, STRATEGIES, TRAVERSAL_DIRECTIONS, default_schedule,
                                          require_valid_schedule, validate_schedule)

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIGURATION = 2
EXIT_VERIFICATION = 3

SYMMETRIC_ALGORITHMS = ("kcore", "setcover")


def exit_codes(command):
    """
    Map library errors onto process exit codes
    """
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (VerificationError, TuneError) as e:
            click.echo("verification failed: {}".format(e), err=True)
            sys.exit(EXIT_VERIFICATION)
        except GraphFormatError as e:
            click.echo("format error: {}".format(e), err=True)
            sys.exit(EXIT_IO)
        except (ConfigurationError, DomainError) as e:
            click.echo("configuration error: {}".format(e), err=True)
            sys.exit(EXIT_CONFIGURATION)
        except GraphBenchError as e:
            click.echo("run error: {}".format(e), err=True)
            sys.exit(EXIT_CONFIGURATION)
        except OSError as e:
            click.echo("i/o error: {}".format(e), err=True)
            sys.exit(EXIT_IO)
    return wrapper


def schedule_options(command):
    options = [
        click.option("--schedule", "strategy", type=click.Choice(STRATEGIES), default=None,
                     help="Bucket update strategy"),
        click.option("--delta", type=int, default=None, help="Priority coarsening factor"),
        click.option("--fusion-threshold", type=int, default=None),
        click.option("--num-buckets", type=int, default=None, help="Open bucket count"),
        click.option("--direction", type=click.Choice(TRAVERSAL_DIRECTIONS), default=None),
        click.option("--grain", type=click.Choice(GRAINS), default=None),
        click.option("--no-dedup", is_flag=True, default=False),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def query_options(command):
    options = [
        click.option("--algo", type=click.Choice(ALGORITHMS), required=True),
        click.option("--graph", "graph_path", required=True, help="Weighted edge list (.wel)"),
        click.option("--threads", type=int, default=None),
        click.option("--source", type=int, default=0),
        click.option("--target", type=int, default=None),
        click.option("--coords", "coords_path", default=None, help="Vertex coordinates (.coords)"),
        click.option("--fixed-point-coords", is_flag=True, default=False, help="Coordinates in micro-degrees"),
        click.option("--num-sets", type=int, default=None, help="Leading set vertices of a set cover incidence"),
        click.option("--symmetrize", is_flag=True, default=False),
        click.option("--seed", type=int, default=0),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def build_schedule(algo, config, strategy=None, delta=None, fusion_threshold=None, num_buckets=None,
                   direction=None, grain=None, no_dedup=False):
    overrides = {"update_strategy": strategy, "delta": delta, "fusion_threshold": fusion_threshold,
                 "num_open_buckets": num_buckets, "direction": direction, "parallel_grain": grain}
    schedule = default_schedule(algo, config).replace(**{k: v for k, v in overrides.items() if v is not None})
    if no_dedup:
        schedule = schedule.replace(dedup=False)
    return require_valid_schedule(algo, schedule)


def load_graph(context, algo, graph_path, build_in_edges, symmetrize=False):
    graph = load_weighted_edge_list(graph_path, symmetrize=symmetrize, build_in_edges=build_in_edges)
    if algo in SYMMETRIC_ALGORITHMS and not graph.symmetric:
        context.logger.info("cli: {} needs a symmetric graph, symmetrizing {}".format(algo, graph_path))
        graph = graph.symmetrized()
    return graph


def load_queries(sources_file, source, target):
    if sources_file is None:
        return [(source, target)]
    queries = []
    with open(sources_file) as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                values = [int(p) for p in parts]
            except ValueError:
                raise GraphFormatError("malformed query '{}'".format(line), line_number)
            if len(values) == 1:
                queries.append((values[0], target))
            elif len(values) == 2:
                queries.append((values[0], values[1]))
            else:
                raise GraphFormatError("expected 'source [target]', got '{}'".format(line), line_number)
    return queries


def graph_descriptor(graph_path, graph):
    return {"path": graph_path, "n": graph.num_vertices, "m": graph.num_edges}


def mean_stats(stats):
    """
    Per-field mean over the round statistics of several queries
    """
    values = [s.to_dict() for s in stats]
    return {key: float(np.mean([v[key] for v in values])) for key in values[0]}


def apply_setting(config, assignment):
    """
    Apply one 'dotted.key=value' assignment to a config dict; the value is
    read as json and falls back to a plain string
    """
    key, separator, raw = assignment.partition("=")
    if not separator or not key:
        raise ConfigurationError("expected key=value, got '{}'".format(assignment))
    try:
        value = json.loads(raw)
    except ValueError:
        value = raw
    path = key.split(".")
    section = config
    for name in path[:-1]:
        if not isinstance(section.get(name), dict):
            raise ConfigurationError("unknown config section '{}' in {}".format(name, key))
        section = section[name]
    if path[-1] not in section:
        raise ConfigurationError("unknown config key {}".format(key))
    section[path[-1]] = value


def _coords(graph, coords_path, fixed_point):
    if coords_path is None:
        return None
    return load_coordinates(coords_path, graph.num_vertices, fixed_point)


def _run_options(context, algo, seed, num_sets, debug=None):
    config = context.config
    return dict(epsilon=config.get("setcover_epsilon", 0.01), seed=seed, num_sets=num_sets,
                debug=config.get("debug_checks", False) if debug is None else debug, logger=context.logger,
                histogram_dense_ratio=config.get("histogram_dense_ratio", 16))


def _team(context, threads):
    threads = threads or context.config.get("default_threads", 1)
    return WorkerTeam(threads, context.logger, context.config.get("dynamic_chunk_size", 64))


@click.group()
@click.option("--config", "config_path", default=None, help="User config json merged over the defaults")
@click.option("--data-path", default=None, help="Directory for logs and the config copy")
@click.option("--log-level", default=None)
@click.pass_context
def cli(ctx, config_path, data_path, log_level):
    """
    Ordered graph processing benchmarks
    """
    try:
        ctx.obj = create_context(config_path, data_path, log_level)
    except ConfigurationError as e:
        click.echo("configuration error: {}".format(e), err=True)
        sys.exit(EXIT_CONFIGURATION)
    except OSError as e:
        click.echo("i/o error: {}".format(e), err=True)
        sys.exit(EXIT_IO)


@cli.command()
@query_options
@schedule_options
@click.option("--sources-file", default=None, help="One 'source [target]' query per line")
@click.option("--epsilon", type=float, default=None, help="Set cover approximation slack")
@click.option("--out", "out_path", default=None, help="Result file")
@click.option("--report", "report_path", default=None, help="JSON run report")
@click.pass_obj
@exit_codes
def run(context, algo, graph_path, threads, source, target, coords_path, fixed_point_coords, num_sets, symmetrize,
        seed, strategy, delta, fusion_threshold, num_buckets, direction, grain, no_dedup, sources_file, epsilon,
        out_path, report_path):
    """
    Run one algorithm under one schedule
    """
    schedule = build_schedule(algo, context.config, strategy, delta, fusion_threshold, num_buckets, direction,
                              grain, no_dedup)
    graph = load_graph(context, algo, graph_path, schedule.direction == DENSE_PULL, symmetrize)
    require_valid_schedule(algo, schedule, graph)
    coords = _coords(graph, coords_path, fixed_point_coords)
    queries = load_queries(sources_file, source, target)
    options = _run_options(context, algo, seed, num_sets)
    if epsilon is not None:
        options["epsilon"] = epsilon

    results = []
    with _team(context, threads) as team:
        for query_source, query_target in queries:
            result = run_algorithm(algo, graph, schedule, source=query_source, target=query_target, coords=coords,
                                   team=team, **options)
            results.append((query_source, result))
            context.logger.info("cli: {} from {} took {:.3f} ms in {} rounds".format(
                algo, query_source, result.stats.wall_ms, result.stats.rounds))
        threads_used = team.num_threads

    saver = ReportSaver(context.logger)
    if out_path is not None:
        saver.save_results(out_path, results)
    vectors = [result_vector(result) for _, result in results]
    digest = result_digest(np.concatenate(vectors))
    stats = mean_stats([result.stats for _, result in results])
    report = RunReport(algorithm=algo, graph=graph_descriptor(graph_path, graph), schedule=schedule.to_dict(),
                       threads=threads_used, wall_ms=stats["wall_ms"], stats=stats, digest=digest,
                       queries=[{"source": s, "target": getattr(r, "target", None),
                                 "digest": result_digest(result_vector(r)), "rounds": r.stats.rounds,
                                 "wall_ms": r.stats.wall_ms} for s, r in results])
    if report_path is not None:
        saver.save_report(report_path, report)
    click.echo("{} digest={} rounds={:g} ms={:.3f}".format(algo, digest, stats["rounds"], report.wall_ms))


@cli.command()
@query_options
@click.option("--delta", type=int, default=None)
@click.pass_obj
@exit_codes
def verify(context, algo, graph_path, threads, source, target, coords_path, fixed_point_coords, num_sets,
           symmetrize, seed, delta):
    """
    Check every valid strategy and direction against the serial oracle
    """
    graph = load_graph(context, algo, graph_path, True, symmetrize)
    coords = _coords(graph, coords_path, fixed_point_coords)
    base = default_schedule(algo, context.config)
    if delta is not None:
        base = base.replace(delta=delta)
    options = _run_options(context, algo, seed, num_sets)
    failures = []
    checked = 0
    with _team(context, threads) as team:
        for strategy in STRATEGIES:
            for direction in TRAVERSAL_DIRECTIONS:
                schedule = base.replace(update_strategy=strategy, direction=direction)
                if validate_schedule(algo, schedule, graph):
                    continue
                result = run_algorithm(algo, graph, schedule, source=source, target=target, coords=coords,
                                       team=team, **options)
                mismatch = check_against_oracle(graph, result, coords=coords, num_sets=num_sets)
                checked += 1
                if mismatch is None:
                    click.echo("ok {}".format(schedule.describe()))
                else:
                    click.echo("mismatch {}: {}".format(schedule.describe(), mismatch.describe()))
                    failures.append(schedule)
    if checked == 0:
        raise ConfigurationError("no valid schedule to verify for {}".format(algo))
    if failures:
        raise VerificationError("{} of {} schedules disagree with the oracle".format(len(failures), checked))


@cli.command()
@click.option("--kind", type=click.Choice(["path", "grid", "uniform_random", "bipartite"]), required=True)
@click.option("--n", type=int, default=None, help="Vertices (path, uniform_random)")
@click.option("--m", type=int, default=None, help="Edges (uniform_random)")
@click.option("--rows", type=int, default=None)
@click.option("--cols", type=int, default=None)
@click.option("--num-sets", type=int, default=None)
@click.option("--num-elements", type=int, default=None)
@click.option("--density", type=float, default=0.05)
@click.option("--weight-lo", type=int, default=None)
@click.option("--weight-hi", type=int, default=None)
@click.option("--unit-weights", is_flag=True, default=False)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_path", required=True)
@click.option("--coords-out", default=None, help="Coordinates for grids, defaults next to --out")
@click.pass_obj
@exit_codes
def gen(context, kind, n, m, rows, cols, num_sets, num_elements, density, weight_lo, weight_hi, unit_weights, seed,
        out_path, coords_out):
    """
    Write a synthetic graph
    """
    lo, hi = context.config.get("synthetic_weight_range", [1, 1000])
    weight_range = None if unit_weights else (lo if weight_lo is None else weight_lo,
                                              hi if weight_hi is None else weight_hi)
    if kind == "bipartite":
        sets = random_set_cover_instance(num_sets or 0, num_elements or 0, density, seed)
        graph = bipartite_incidence(sets, num_elements)
    elif kind == "grid":
        graph = generate_synthetic(kind, seed, rows=rows or 0, cols=cols or 0, weight_range=weight_range)
    else:
        graph = generate_synthetic(kind, seed, n=n or 0, m=m or 0, weight_range=weight_range)
    save_weighted_edge_list(graph, out_path)
    if kind == "grid":
        coords_out = coords_out or os.path.splitext(out_path)[0] + ".coords"
        save_coordinates(grid_coordinates(rows, cols), coords_out)
        context.logger.info("cli: wrote coordinates to " + coords_out)
    click.echo("wrote {} (n={}, m={})".format(out_path, graph.num_vertices, graph.num_edges))


@cli.command()
@query_options
@click.option("--budget", type=int, default=10, help="Number of schedules to try")
@click.option("--out", "out_path", default=None, help="TuneReport json")
@click.pass_obj
@exit_codes
def tune(context, algo, graph_path, threads, source, target, coords_path, fixed_point_coords, num_sets,
         symmetrize, seed, budget, out_path):
    """
    Random search for the fastest valid schedule
    """
    graph = load_graph(context, algo, graph_path, True, symmetrize)
    coords = _coords(graph, coords_path, fixed_point_coords)
    with _team(context, threads) as team:
        report = tune_schedules(algo, graph, budget, seed=seed, config=context.config, team=team, source=source,
                                target=target, coords=coords, num_sets=num_sets, graph_name=graph_path,
                                logger=context.logger)
    if out_path is not None:
        ReportSaver(context.logger).save_json(out_path, report.to_dict())
    click.echo("best {} {:.3f} ms".format(report.best.describe(), report.best_ms))


@cli.command()
@click.option("--algo", type=click.Choice(ALGORITHMS), required=True)
@click.option("--graph", "graph_paths", multiple=True, required=True)
@click.option("--schedule", "strategies", type=click.Choice(STRATEGIES), multiple=True)
@click.option("--delta", type=int, default=None)
@click.option("--threads", type=int, default=None)
@click.option("--source", type=int, default=0)
@click.option("--target", type=int, default=None)
@click.option("--coords", "coords_path", default=None)
@click.option("--fixed-point-coords", is_flag=True, default=False, help="Coordinates in micro-degrees")
@click.option("--num-sets", type=int, default=None)
@click.option("--seed", type=int, default=0)
@click.option("--report", "report_path", default=None)
@click.pass_obj
@exit_codes
def bench(context, algo, graph_paths, strategies, delta, threads, source, target, coords_path, fixed_point_coords,
          num_sets, seed, report_path):
    """
    Time every strategy on every graph
    """
    base = default_schedule(algo, context.config)
    if delta is not None:
        base = base.replace(delta=delta)
    strategies = strategies or STRATEGIES
    options = _run_options(context, algo, seed, num_sets)
    rows = []
    with _team(context, threads) as team:
        for graph_path in graph_paths:
            graph = load_graph(context, algo, graph_path, base.direction == DENSE_PULL)
            coords = _coords(graph, coords_path, fixed_point_coords)
            for strategy in strategies:
                schedule = base.replace(update_strategy=strategy)
                if validate_schedule(algo, schedule, graph):
                    continue
                result = run_algorithm(algo, graph, schedule, source=source, target=target, coords=coords,
                                       team=team, **options)
                row = {"graph": graph_path, "schedule": schedule.to_dict(), "ms": result.stats.wall_ms,
                       "rounds": result.stats.rounds, "fused_rounds": result.stats.fused_rounds,
                       "digest": result_digest(result_vector(result))}
                rows.append(row)
                click.echo("{}\t{}\t{:.3f} ms\t{} rounds\t{} fused".format(
                    graph_path, strategy, row["ms"], row["rounds"], row["fused_rounds"]))
        threads_used = team.num_threads
    if report_path is not None:
        ReportSaver(context.logger).save_json(report_path, {"algo": algo, "threads": threads_used, "rows": rows})


@cli.command("config")
@click.option("--set", "assignments", multiple=True, help="dotted.key=value, repeatable")
@click.pass_obj
@exit_codes
def config_command(context, assignments):
    """
    Print the active configuration, or change the copy in the data directory
    """
    if not assignments:
        click.echo(json.dumps(context.config, sort_keys=True, indent=4, separators=(',', ': ')))
        return
    path = os.path.join(context.data_path, "config.json")
    config = load_config(path) if os.path.isfile(path) else load_config()
    for assignment in assignments:
        apply_setting(config, assignment)
    for algo in ALGORITHMS:
        require_valid_schedule(algo, default_schedule(algo, config))
    save_config(config, path)
    context.logger.info("cli: saved {} setting(s) to {}".format(len(assignments), path))
    click.echo("saved " + path)
