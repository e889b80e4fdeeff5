from src.Dual.main import (
    DualState,
    agent_dual_value,
    best_agent,
    item_prices,
    check_dual_feasible,
    dual_objective_from_utilities
)

__all__ = [
    'DualState',
    'agent_dual_value',
    'best_agent',
    'item_prices',
    'check_dual_feasible',
    'dual_objective_from_utilities'
]
