from src.Solvers.main import solve_additive, solve_multiplicative, solve_multiplicative_guessing
from src.Solvers.report import SolveReport
from src.Wbb.main import solve_smooth_nash
from src.Instance.main import Instance
from src.errors import DomainError
from config import DEFAULT_EPSILON, DEFAULT_OMEGA
from typing import Sequence, Union
import logging

"""
This file is the solve orchestrator: it takes an instance plus a mode and hands it
to the matching solver. The CLI and the bench harness both come through here so
a mode string means the same thing everywhere.

Modes:
    mult -> multiplicative primal-dual (mu="auto", "guess", or one target per agent)
    add  -> additive primal-dual with numeric alpha
    wbb  -> smooth asymmetric Nash welfare (bid dynamics for linear agents,
            smooth-log additive solve for piecewise and budget agents)
"""

logger = logging.getLogger(__name__)

MODES = ('mult', 'add', 'wbb')


def solve_instance(instance: Instance, mode: str = 'mult', epsilon: float = DEFAULT_EPSILON,
                   omega: float = DEFAULT_OMEGA, mu: Union[str, Sequence[float]] = 'auto',
                   trace: bool = False) -> SolveReport:
    """
    Main solve orchestrator function.

    Args:
        instance: validated problem instance
        mode: 'mult', 'add' or 'wbb'
        epsilon: solver step parameter
        omega: smoothing parameter, used by 'wbb' only
        mu: 'auto', 'guess' or explicit targets, used by 'mult' only
        trace: record the event trace

    Returns:
        SolveReport of the chosen solver
    """
    if mode not in MODES:
        raise DomainError(f"mode must be one of {list(MODES)}, got {mode!r}")
    logger.info(f"solving n={instance.n}, m={instance.m} in {mode} mode (epsilon={epsilon})")

    if mode == 'mult':
        if mu == 'guess':
            return solve_multiplicative_guessing(instance, epsilon=epsilon, trace=trace)
        return solve_multiplicative(instance, epsilon=epsilon, mu=mu, trace=trace)
    if mode == 'add':
        return solve_additive(instance, epsilon=epsilon, trace=trace)
    return solve_smooth_nash(instance, omega=omega, epsilon=epsilon, trace=trace)
