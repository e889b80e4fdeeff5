from src.Solvers.main import (
    SolveRule,
    MultiplicativeRule,
    AdditiveRule,
    UnderAllocated,
    run_primal_dual,
    resolve_mult_targets,
    resolve_add_targets,
    solve_multiplicative,
    solve_multiplicative_guessing,
    solve_additive
)
from src.Solvers.report import SolveReport, trace_lines

__all__ = [
    'SolveRule',
    'MultiplicativeRule',
    'AdditiveRule',
    'UnderAllocated',
    'run_primal_dual',
    'resolve_mult_targets',
    'resolve_add_targets',
    'solve_multiplicative',
    'solve_multiplicative_guessing',
    'solve_additive',
    'SolveReport',
    'trace_lines'
]
