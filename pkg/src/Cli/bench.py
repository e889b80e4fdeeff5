import logging
import math
import time

import numpy as np
import pandas as pd

from config import BENCH_ORACLE_LIMIT, DEFAULT_EPSILON, DEFAULT_OMEGA, family_list
from src.errors import DomainError
from src.Instance.gap import gen_gap_instance
from src.Instance.main import gen_random
from src.main import solve_instance
from src.Oracle.main import UTILITARIAN, brute_force_opt
from src.Valuations.main import BudgetAdditive

logger = logging.getLogger(__name__)

SUITES = ('random', 'gap')

BENCH_COLUMNS = [
    'instance_id', 'suite', 'family', 'mode', 'n', 'm',
    'primal', 'dual', 'certificate', 'oracle', 'updates', 'reassignments'
]


def _oracle_value(instance) -> float:
    if instance.n ** instance.m > BENCH_ORACLE_LIMIT:
        return math.nan
    value, _ = brute_force_opt(instance, UTILITARIAN)
    return value


def _random_cases(n: int, m: int, count: int, seed: int):
    # one family per instance, cycling; smooth-log agents only make sense additively
    for k in range(count):
        family = family_list[k % len(family_list)]
        instance = gen_random(n, m, family, seed=seed + k)
        yield k, family, ('add' if family == 'smooth_log' else 'mult'), instance


def _gap_cases(count: int, seed: int):
    rng = np.random.default_rng(seed)
    for k in range(count):
        cap = float(rng.uniform(1.0, 2.0))
        width = cap * float(rng.choice([1.0, 0.5]))
        instance, _ = gen_gap_instance(BudgetAdditive(cap=cap), width)
        yield k, 'budget', 'mult', instance


def run_bench(suite: str = 'random', n: int = 3, m: int = 6, count: int = 10, seed: int = 0,
              epsilon: float = DEFAULT_EPSILON, omega: float = DEFAULT_OMEGA,
              timing: bool = False) -> pd.DataFrame:
    """
    Solve a seeded batch of instances and tabulate the outcome.

    The random suite cycles through every valuation family; the gap suite builds
    budget-additive integrality-gap instances (n and m are then fixed by the
    construction). The oracle column holds the brute-force utilitarian optimum
    when n**m is small enough, NaN otherwise.

    Columns: instance_id, suite, family, mode, n, m, primal, dual, certificate,
             oracle, updates, reassignments (+ wall_time when timing is set)
    """
    if suite not in SUITES:
        raise DomainError(f"suite must be one of {list(SUITES)}, got {suite!r}")
    if count < 0:
        raise DomainError(f"count must be >= 0, got {count}")

    cases = _random_cases(n, m, count, seed) if suite == 'random' else _gap_cases(count, seed)
    results = []
    for k, family, mode, instance in cases:
        if timing:
            started = time.perf_counter()
            report = solve_instance(instance, mode=mode, epsilon=epsilon, omega=omega)
            wall_time = time.perf_counter() - started
        else:
            report = solve_instance(instance, mode=mode, epsilon=epsilon, omega=omega)
        row = {
            "instance_id": k,
            "suite": suite,
            "family": family,
            "mode": mode,
            "n": instance.n,
            "m": instance.m,
            "primal": report.primal,
            "dual": report.certified_dual,
            "certificate": report.certificate,
            "oracle": _oracle_value(instance),
            "updates": sum(report.slope_updates),
            "reassignments": report.reassignments,
        }
        if timing:
            row["wall_time"] = wall_time
        results.append(row)
        logger.info(f"bench {suite} #{k} ({family}, {mode}): certificate={report.certificate:.6g}")

    return pd.DataFrame(results)


def transform_bench_results(df: pd.DataFrame) -> pd.DataFrame:
    """
    Coerce the bench table's dtypes and sort it by instance id.
    An empty table keeps its columns.
    """
    if df.empty:
        return pd.DataFrame(columns=BENCH_COLUMNS)

    df = df.copy()

    df['suite'] = df['suite'].astype(str)
    df['family'] = df['family'].astype(str)
    df['mode'] = df['mode'].astype(str)
    int_cols = ['instance_id', 'n', 'm', 'updates', 'reassignments']
    df[int_cols] = df[int_cols].astype(int)
    numeric_cols = ['primal', 'dual', 'certificate', 'oracle']
    if 'wall_time' in df.columns:
        numeric_cols.append('wall_time')
    df[numeric_cols] = df[numeric_cols].apply(pd.to_numeric, errors='coerce')

    df = df.sort_values('instance_id').reset_index(drop=True)

    return df
