"""
Wbb Module - Weighted Bang-Per-Buck Dynamics for Smooth Asymmetric Nash Welfare

This module handles:
1. Normalizing an instance (row max 1 per agent, weights summing to 1)
2. The bid-space solver: uniform bids start at omega and rise while an agent's
   utility is too far above its bid; items follow the max weighted bang-per-buck
   eta_i u_ij / b_i
3. Log, product and original-unit objectives plus the dual bound
4. The smooth Nash dispatcher for linear and piecewise-linear valuations
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from config import DEFAULT_EPSILON, DEFAULT_OMEGA
from src.Curvature.main import smooth_log_alpha_closed_form
from src.errors import DomainError, InstanceValidationError
from src.Instance.main import Agent, Instance
from src.Solvers.main import AdditiveRule, run_primal_dual, solve_additive
from src.Solvers.report import SolveReport
from src.Valuations.main import BudgetAdditive, Linear, PiecewiseLinear, SlopePoint, SmoothLog

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Normalization:
    """Factors removed by normalize_instance, kept for converting objectives back."""
    row_max: Tuple[float, ...]
    weights: Tuple[float, ...]

    @property
    def weight_total(self) -> float:
        return float(sum(self.weights))

    def to_original_product(self, normalized_product: float) -> float:
        """(normalized product)^eta * prod_i (max_j u_ij)^eta_i."""
        log_scale = sum(w * math.log(r) for w, r in zip(self.weights, self.row_max))
        return math.exp(self.weight_total * math.log(normalized_product) + log_scale)


def normalize_instance(instance: Instance) -> Tuple[Instance, Normalization]:
    """
    Divide each utility row by its max and the weights by their sum.

    Args:
        instance: instance whose agents each value some item

    Returns:
        (normalized instance, Normalization)
    """
    row_max = []
    for i in range(instance.n):
        top = instance.row_max(i)
        if top <= 0:
            raise InstanceValidationError(f"utilities[{i}]", "agent values no item; cannot normalize")
        row_max.append(top)
    weights = instance.weights
    total = float(weights.sum())
    utilities = instance.utilities / np.array(row_max)[:, None]
    agents = tuple(Agent(valuation=a.valuation, weight=float(a.weight / total)) for a in instance.agents)
    normalized = Instance(agents=agents, m=instance.m, utilities=utilities)
    return normalized, Normalization(row_max=tuple(row_max), weights=tuple(float(w) for w in weights))


def smooth_log_instance(instance: Instance, omega: float) -> Instance:
    """Same utilities and weights; agent i valued by eta_i * ln(u + omega)."""
    agents = tuple(Agent(valuation=SmoothLog(eta=a.weight, omega=omega), weight=a.weight) for a in instance.agents)
    return Instance(agents=agents, m=instance.m, utilities=instance.utilities)


def nash_log_objective(instance: Instance, utilities, omega: float) -> float:
    """sum_i eta_i ln(u_i + omega) with the instance's weights."""
    return float(sum(a.weight * math.log(float(u) + omega) for a, u in zip(instance.agents, utilities)))


class WbbRule(AdditiveRule):
    """Additive rule in bid space: b_i = t_i + omega and s_i = eta_i / b_i."""

    update_event = "bid_update"

    def __init__(self, instance: Instance, epsilon: float, omega: float, alpha_bar: float):
        etas = [a.weight for a in instance.agents]
        super().__init__(instance, epsilon, [eta * alpha_bar for eta in etas])
        self.omega = omega
        self.alpha_bar = alpha_bar
        self.etas = etas
        self.bids = [omega] * instance.n

    def _point(self, i: int, b: float) -> SlopePoint:
        eta = self.etas[i]
        return SlopePoint(slope=eta / b, anchor=b - self.omega, intercept=eta * math.log(b) - eta + self.omega * eta / b)

    def start(self, i):
        return self._point(i, self.omega)

    def lower(self, i, sp, u):
        b = self.bids[i]
        eta_m = self.etas[i] * max(self.instance.m, 1)
        denominator = eta_m - self.epsilon * b
        # the bid never rises past u + omega, where eta / b is the tangent slope at u
        if u + self.omega > b and (denominator <= 0 or eta_m * b / denominator > u + self.omega):
            self.bids[i] = u + self.omega
            return self._point(i, self.bids[i]), False
        if denominator <= 0:
            return sp, True
        self.bids[i] = eta_m * b / denominator
        return self._point(i, self.bids[i]), False

    def excess(self, i, u, sp):
        # ln x < x - 1 - alpha_bar, compared in log space
        x = (u + self.omega) / self.bids[i]
        return (x - 1.0 - self.alpha_bar) - math.log(x)

    def trace_fields(self, i, sp):
        return {"bid": self.bids[i]}


def _check_normalized(instance: Instance) -> None:
    if abs(float(instance.weights.sum()) - 1.0) > 1e-9:
        raise DomainError("weights must sum to 1; call normalize_instance first")
    for i in range(instance.n):
        if abs(instance.row_max(i) - 1.0) > 1e-12:
            raise DomainError(f"agent {i}: max utility must be 1; call normalize_instance first")


def _check_omega(omega: float) -> None:
    if not (0 < omega <= 1):
        raise DomainError(f"omega must lie in (0, 1], got {omega}")


def solve_wbb(instance: Instance, omega: float = DEFAULT_OMEGA, epsilon: float = DEFAULT_EPSILON,
              trace: bool = False, normalization: Normalization = None) -> SolveReport:
    """
    Weighted bang-per-buck solver on a normalized instance.

    Args:
        instance: output of normalize_instance (row max 1, weights sum 1)
        omega: smoothing added to every agent's utility inside the log
        epsilon: each bid update lowers eta_i / b_i by epsilon / m
        trace: record the event trace
        normalization: when given, the original-unit product objective is reported too

    Returns:
        SolveReport in additive mode; extras hold bids and the log/product objectives
    """
    _check_omega(omega)
    if not (epsilon > 0):
        raise DomainError(f"epsilon must be > 0, got {epsilon}")
    _check_normalized(instance)
    nonlinear = [i for i, a in enumerate(instance.agents) if not a.valuation.is_linear()]
    if nonlinear:
        raise DomainError(f"solve_wbb needs linear valuations, agents {nonlinear} are not; use solve_smooth_nash")
    smooth = smooth_log_instance(instance, omega)
    alpha_bar = smooth_log_alpha_closed_form(1.0, omega)
    rule = WbbRule(smooth, epsilon, omega, alpha_bar)
    report = run_primal_dual(smooth, rule, trace=trace)

    extras = {
        "omega": omega,
        "alpha_bar": alpha_bar,
        "bids": list(rule.bids),
        "log_objective": report.primal,
        "product_objective": math.exp(report.primal),
        "product_upper_bound": math.exp(report.certified_dual),
    }
    if normalization is not None:
        extras["original_product_objective"] = normalization.to_original_product(extras["product_objective"])
    return dataclasses.replace(report, extras=extras)


def _inner_function(v) -> PiecewiseLinear:
    if isinstance(v, PiecewiseLinear):
        return v
    if isinstance(v, BudgetAdditive):
        return v.as_piecewise()
    if isinstance(v, Linear):
        return PiecewiseLinear(points=(0.0,), slopes=(v.a,))
    raise DomainError(f"smooth Nash welfare supports linear, budget and piecewise valuations, got {v.family}")


def solve_smooth_nash(instance: Instance, omega: float = DEFAULT_OMEGA, epsilon: float = DEFAULT_EPSILON,
                      trace: bool = False) -> SolveReport:
    """
    Smooth asymmetric Nash welfare sum_i eta_i ln(f_i(u_i + omega)).

    Additive (linear) agents go through the bid-space solver on the normalized
    instance. Otherwise each agent's valuation becomes the nested f_i of a
    smooth-log valuation and the additive solver runs with numeric curvature.
    """
    _check_omega(omega)
    if all(isinstance(a.valuation, Linear) for a in instance.agents):
        normalized, normalization = normalize_instance(instance)
        return solve_wbb(normalized, omega=omega, epsilon=epsilon, trace=trace, normalization=normalization)
    total = float(instance.weights.sum())
    agents = []
    for a in instance.agents:
        eta = a.weight / total
        agents.append(Agent(valuation=SmoothLog(eta=eta, omega=omega, inner=_inner_function(a.valuation)), weight=eta))
    smooth = Instance(agents=tuple(agents), m=instance.m, utilities=instance.utilities)
    logger.info(f"smooth Nash over nested valuations, n={instance.n}: solving additively")
    report = solve_additive(smooth, epsilon=epsilon, trace=trace)
    extras = {"omega": omega, "log_objective": report.primal, "product_objective": math.exp(report.primal)}
    return dataclasses.replace(report, extras=extras)


def trace_signature(trace) -> List[Tuple]:
    """Event kinds with their agent/item fields; bid and slope updates count as the same step."""
    out = []
    for e in trace:
        event = "slope_update" if e["event"] == "bid_update" else e["event"]
        out.append((e["t"], event, e.get("agent"), e.get("item"), e.get("to")))
    return out
