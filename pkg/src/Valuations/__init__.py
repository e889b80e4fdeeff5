from src.Valuations.main import (
    ConcaveValuation,
    SlopePoint,
    Linear,
    BudgetAdditive,
    PiecewiseLinear,
    Power,
    SmoothLog,
    valuation_from_dict,
    value,
    slope_point_from_slope,
    tangent_line_value
)

__all__ = [
    'ConcaveValuation',
    'SlopePoint',
    'Linear',
    'BudgetAdditive',
    'PiecewiseLinear',
    'Power',
    'SmoothLog',
    'valuation_from_dict',
    'value',
    'slope_point_from_slope',
    'tangent_line_value'
]
