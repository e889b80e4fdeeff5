"""
Dual Module - Slope-Space Dual Solutions

This module handles:
1. DualState: one supergradient line (slope, anchor, intercept) per agent
2. D(u_i), the agent's utility priced along its dual line
3. Best-agent selection for an item (proper assignment)
4. Item prices and the dual feasibility / objective check

Prices are never stored; they are derived from the current slopes on demand.
"""

import copy
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from config import CERTIFICATE_TOL
from src.Curvature.main import ADDITIVE, MULTIPLICATIVE
from src.errors import DomainError
from src.Instance.main import Allocation, Instance
from src.Valuations.main import SlopePoint


@dataclass
class DualState:
    """Mutable dual solution owned by a single solve."""
    points: List[SlopePoint]
    mode: str = MULTIPLICATIVE
    epsilon: float = 0.01

    def __post_init__(self):
        if self.mode not in (MULTIPLICATIVE, ADDITIVE):
            raise DomainError(f"dual mode must be {MULTIPLICATIVE!r} or {ADDITIVE!r}, got {self.mode!r}")
        self.points = list(self.points)

    @property
    def slopes(self) -> np.ndarray:
        return np.array([p.slope for p in self.points], dtype=float)

    @property
    def intercepts(self) -> np.ndarray:
        return np.array([p.intercept for p in self.points], dtype=float)

    def snapshot(self) -> "DualState":
        return copy.deepcopy(self)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "epsilon": self.epsilon,
            "slopes": [p.slope for p in self.points],
            "anchors": [p.anchor for p in self.points],
            "intercepts": [p.intercept for p in self.points],
        }


def agent_dual_value(state: DualState, i: int, u_i: float) -> float:
    """D(u_i) = y_i + s_i * u_i."""
    return state.points[i].line(u_i)


def best_agent(state: DualState, instance: Instance, j: int, current_owner: Optional[int] = None) -> Optional[int]:
    """
    Agent maximizing u[i][j] * s_i.

    Args:
        state: current dual state
        instance: problem instance
        j: item index
        current_owner: returned unchanged when every product is 0

    Returns:
        Lowest-index maximizer, or current_owner if the item is worthless at current slopes
    """
    products = instance.utilities[:, j] * state.slopes
    if products.max() <= 0:
        return current_owner
    return int(np.argmax(products))


def item_prices(state: DualState, instance: Instance, scale: Optional[float] = None,
                allocation: Optional[Allocation] = None) -> np.ndarray:
    """
    Item prices derived from slopes.

    Without an allocation p_j is the max product over agents; with one it is the
    owner's product (the max product for unassigned items). In multiplicative mode
    the price is multiplied by scale, in additive mode scale is added as slack.
    Without a scale prices are left unscaled.
    """
    if scale is None:
        scale = 1.0 if state.mode == MULTIPLICATIVE else 0.0
    products = instance.utilities * state.slopes[:, None]
    if instance.m == 0:
        return np.zeros(0)
    prices = products.max(axis=0)
    if allocation is not None:
        for j, owner in enumerate(allocation.owner):
            if owner is not None:
                prices[j] = products[owner, j]
    if state.mode == MULTIPLICATIVE:
        return prices * scale
    return prices + scale


def check_dual_feasible(state: DualState, instance: Instance, scale: Optional[float] = None,
                        allocation: Optional[Allocation] = None,
                        tol: float = CERTIFICATE_TOL) -> Tuple[bool, float]:
    """
    Verify p_j >= s_i u[i][j] for every agent/item pair and price the dual objective.

    Args:
        state: dual state to check
        instance: problem instance
        scale: multiplicative factor (mult mode, >= 1) or additive slack (add mode)
        allocation: price items at their owner when given
        tol: relative slack on each constraint

    Returns:
        (feasible, sum_i y_i + sum_j p_j)
    """
    if state.mode == MULTIPLICATIVE and scale is not None and scale < 1:
        raise DomainError(f"multiplicative price scale must be >= 1, got {scale}")
    prices = item_prices(state, instance, scale, allocation)
    demand = instance.utilities * state.slopes[:, None]
    slack = tol * np.maximum(1.0, np.abs(demand))
    feasible = bool(np.all(state.slopes >= 0)) and bool(np.all(prices[None, :] >= demand - slack))
    objective = float(state.intercepts.sum() + prices.sum())
    return feasible, objective


def dual_objective_from_utilities(state: DualState, utilities) -> float:
    """Sum of D(u_i); equals the dual objective under proper assignment."""
    return float(sum(p.line(float(u)) for p, u in zip(state.points, utilities)))
