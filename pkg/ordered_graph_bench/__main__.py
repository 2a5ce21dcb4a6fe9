from ordered_graph_bench.cli import cli

if __name__ == '__main__':
    cli(prog_name="ordered_graph_bench")
