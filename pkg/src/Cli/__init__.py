from src.Cli.main import build_parser, main
from src.Cli.bench import run_bench, transform_bench_results

__all__ = [
    'build_parser',
    'main',
    'run_bench',
    'transform_bench_results'
]
