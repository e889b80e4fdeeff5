from src.Curvature.main import (
    MULTIPLICATIVE,
    ADDITIVE,
    CurvatureReport,
    secant_slope,
    curvature_expression,
    mult_curvature,
    add_curvature,
    curvature,
    smooth_log_alpha_closed_form
)

__all__ = [
    'MULTIPLICATIVE',
    'ADDITIVE',
    'CurvatureReport',
    'secant_slope',
    'curvature_expression',
    'mult_curvature',
    'add_curvature',
    'curvature',
    'smooth_log_alpha_closed_form'
]
