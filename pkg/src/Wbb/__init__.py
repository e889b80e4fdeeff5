from src.Wbb.main import (
    Normalization,
    WbbRule,
    normalize_instance,
    smooth_log_instance,
    nash_log_objective,
    solve_wbb,
    solve_smooth_nash,
    trace_signature
)

__all__ = [
    'Normalization',
    'WbbRule',
    'normalize_instance',
    'smooth_log_instance',
    'nash_log_objective',
    'solve_wbb',
    'solve_smooth_nash',
    'trace_signature'
]
