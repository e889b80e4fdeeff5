from src.Oracle.main import (
    UTILITARIAN,
    NASH_LOG,
    brute_force_opt,
    verify_gap_certificate,
    oracle_z_range,
    numeric_curvature_oracle
)

__all__ = [
    'UTILITARIAN',
    'NASH_LOG',
    'brute_force_opt',
    'verify_gap_certificate',
    'oracle_z_range',
    'numeric_curvature_oracle'
]
