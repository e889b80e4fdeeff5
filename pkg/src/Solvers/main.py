"""
Solvers Module - Primal-Dual Allocation Algorithms

This module handles:
1. The shared primal-dual loop: greedy start, defect improper items, lower slopes
2. The multiplicative variant (stop when D(u_i) <= mu_i v_i(u_i), slopes divided by 1+eps)
3. The additive variant (stop when D(u_i) - v_i(u_i) <= alpha_i, slopes lowered by eps/m)
4. The mu-guessing wrapper for when curvatures are not known up front
5. Instrumentation: under-allocation checks, update ceilings, iteration budget, event trace

A variant is a SolveRule; the loop itself never looks at which variant it runs.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import DEFAULT_EPSILON, GUESS_CAP, INVARIANT_TOL, ITERATION_SAFETY_FACTOR, SLOPE_FLOOR
from src.Curvature.main import ADDITIVE, MULTIPLICATIVE, add_curvature, mult_curvature
from src.Dual.main import DualState, check_dual_feasible
from src.errors import DomainError, InvariantViolation, IterationBudgetExceeded
from src.Instance.main import Allocation, Instance
from src.Solvers.report import SolveReport
from src.Valuations.main import SlopePoint

logger = logging.getLogger(__name__)

TargetSpec = Union[str, Sequence[float], None]


class UnderAllocated(InvariantViolation):
    """An agent below its anchor broke its loop bound after a reassignment or a slope update."""


def _check_epsilon(epsilon: float) -> None:
    if not (epsilon > 0) or not math.isfinite(epsilon):
        raise DomainError(f"epsilon must be a finite positive number, got {epsilon}")


class SolveRule:
    """Initialization, loop condition and slope update of one solver variant."""

    mode = MULTIPLICATIVE
    update_event = "slope_update"

    def __init__(self, instance: Instance, epsilon: float, targets: Sequence[float],
                 clamped: Sequence[int] = (), skipped: Sequence[int] = ()):
        self.instance = instance
        self.epsilon = epsilon
        self.targets = [float(t) for t in targets]
        self.clamped = tuple(clamped)
        self.skipped = frozenset(skipped)

    def valuation(self, i: int):
        return self.instance.agents[i].valuation

    def start(self, i: int) -> SlopePoint:
        """Tangent at 0, or at the smallest positive utility when the slope at 0 is unbounded."""
        v = self.valuation(i)
        if math.isfinite(v.slope(0.0)):
            return v.slope_point_at(0.0)
        row = self.instance.utilities[i]
        positive = row[row > 0]
        return v.slope_point_at(float(positive.min()) if positive.size else 1.0)

    def floor(self, i: int) -> float:
        return max(SLOPE_FLOOR, self.valuation(i).min_slope())

    def decrease(self, i: int, s: float) -> float:
        raise NotImplementedError

    def lower(self, i: int, sp: SlopePoint, u: float) -> Tuple[SlopePoint, bool]:
        """
        One slope update at current utility u; the flag is set when the slope floor was reached.

        A step that would pass v_i'(u) stops at the tangent through u instead, so an
        update never moves the anchor beyond the agent's utility.
        """
        v = self.valuation(i)
        floor = self.floor(i)
        s = self.decrease(i, sp.slope)
        tangent = float(v.slope(u))
        if s < tangent < sp.slope and tangent > floor:
            return v.slope_point_at(u), False
        if s <= floor:
            if sp.slope <= floor:
                return sp, True
            return v.slope_point_from_slope(floor), True
        return v.slope_point_from_slope(s), False

    def excess(self, i: int, u: float, sp: SlopePoint) -> float:
        """Amount by which the loop condition is violated (> 0 means keep going)."""
        raise NotImplementedError

    def trace_fields(self, i: int, sp: SlopePoint) -> Dict:
        return {"slope": sp.slope}

    def price_scale(self) -> float:
        raise NotImplementedError

    def ceiling(self, i: int, s0: float) -> float:
        raise NotImplementedError

    def certificate(self, dual: float, primal: float) -> float:
        raise NotImplementedError


class MultiplicativeRule(SolveRule):
    mode = MULTIPLICATIVE

    def decrease(self, i, s):
        return s / (1 + self.epsilon)

    def excess(self, i, u, sp):
        d = sp.line(u)
        val = self.valuation(i).value(u)
        if val <= 0:
            return math.inf if d > 0 else 0.0
        return d / val - self.targets[i]

    def price_scale(self):
        return 1 + self.epsilon

    def ceiling(self, i, s0):
        total = self.instance.row_sum(i)
        if total <= 0:
            return 0.0
        if not math.isfinite(s0):
            return math.inf
        v_total = self.valuation(i).value(total)
        if v_total <= 0:
            return math.inf
        ratio = s0 * total / (self.epsilon * v_total)
        updates = math.ceil(math.log(ratio) / math.log1p(self.epsilon)) if ratio > 1 else 0
        return float(updates + 1)

    def certificate(self, dual, primal):
        if primal <= 0:
            return 1.0 if dual <= 0 else math.inf
        return dual / primal


class AdditiveRule(SolveRule):
    mode = ADDITIVE

    @property
    def step(self) -> float:
        return self.epsilon / max(self.instance.m, 1)

    def decrease(self, i, s):
        return s - self.step

    def excess(self, i, u, sp):
        return sp.line(u) - self.valuation(i).value(u) - self.targets[i]

    def price_scale(self):
        return self.step

    def ceiling(self, i, s0):
        if not math.isfinite(s0):
            return math.inf
        return float(math.ceil(s0 / self.step) + 1)

    def certificate(self, dual, primal):
        return dual - primal


class _PrimalDualRun:
    """Mutable state of a single solve; discarded once the report is built."""

    def __init__(self, instance: Instance, rule: SolveRule, record_trace: bool):
        self.instance = instance
        self.rule = rule
        self.U = instance.utilities
        n, m = instance.n, instance.m
        self.points: List[SlopePoint] = [rule.start(i) for i in range(n)]
        self.slopes = np.array([p.slope for p in self.points], dtype=float)
        self.start_slopes = self.slopes.copy()
        self.owner = np.full(m, -1, dtype=int)
        self.u = np.zeros(n)
        self.updates = [0] * n
        self.reassignments = 0
        self.saturated = set()
        self.checks = 0
        self.trace: Optional[List[Dict]] = [] if record_trace else None
        self.step = 0
        self.iterations = 0
        self.ceilings = [rule.ceiling(i, float(self.start_slopes[i])) for i in range(n)]
        live = [c for i, c in enumerate(self.ceilings) if i not in rule.skipped]
        self.budget = ITERATION_SAFETY_FACTOR * (m + 1) * sum(live) + m

    def _record(self, event: str, **fields) -> None:
        if self.trace is not None:
            self.trace.append({"t": self.step, "event": event, **fields})
        self.step += 1

    def _tick(self) -> None:
        self.iterations += 1
        if self.iterations > self.budget:
            raise IterationBudgetExceeded(
                f"{self.rule.mode} solve exceeded its iteration budget of {self.budget:g}",
                trace=self.trace,
                details={"updates": list(self.updates), "reassignments": self.reassignments},
            )

    def _best(self, j: int, current: Optional[int]) -> Optional[int]:
        products = self.U[:, j] * self.slopes
        if products.max() <= 0:
            return current
        return int(np.argmax(products))

    def _recompute(self, i: int) -> None:
        self.u[i] = float(self.U[i, self.owner == i].sum())

    def _assign_initial(self) -> None:
        for j in range(self.instance.m):
            k = self._best(j, None)
            if k is not None:
                self.owner[j] = k
        for i in range(self.instance.n):
            self._recompute(i)

    def _below_start(self, i: int) -> bool:
        """Still at the initial point, whose anchor lies above the current utility."""
        return self.updates[i] == 0 and self.u[i] < self.points[i].anchor

    def _violates(self, i: int) -> bool:
        if i in self.rule.skipped or i in self.saturated:
            return False
        # below the anchor a slope update only widens the gap; past tolerance the check has raised already
        if self.u[i] < self.points[i].anchor:
            return False
        return self.rule.excess(i, float(self.u[i]), self.points[i]) > 0

    def _improper_item(self, i: int) -> Optional[Tuple[int, int]]:
        items = np.flatnonzero(self.owner == i)
        if items.size == 0:
            return None
        products = self.U[:, items] * self.slopes[:, None]
        regret = products.max(axis=0) - products[i]
        k = int(np.argmax(regret))
        if regret[k] <= 0:
            return None
        return int(items[k]), int(np.argmax(products[:, k]))

    def _defect(self, i: int, j: int, k: int) -> None:
        self.owner[j] = k
        self._recompute(i)
        self._recompute(k)
        self.reassignments += 1
        self._record("defect", agent=i, item=j, to=k, slope=float(self.slopes[i]))
        self._tick()
        self._check_under_allocation()

    def _lower(self, i: int) -> None:
        sp, saturated = self.rule.lower(i, self.points[i], float(self.u[i]))
        self.points[i] = sp
        self.slopes[i] = sp.slope
        self.updates[i] += 1
        self._record(self.rule.update_event, agent=i, **self.rule.trace_fields(i, sp))
        if saturated:
            self.saturated.add(i)
            logger.warning(f"agent {i} reached the slope floor and is treated as satisfied")
        self._tick()
        self._check_under_allocation()

    def _check_under_allocation(self) -> None:
        for k in range(self.instance.n):
            if k in self.rule.skipped or k in self.saturated or self._below_start(k):
                continue
            sp = self.points[k]
            if self.u[k] >= sp.anchor:
                continue
            self.checks += 1
            excess = self.rule.excess(k, float(self.u[k]), sp)
            if excess > INVARIANT_TOL * max(1.0, abs(self.rule.targets[k])):
                raise UnderAllocated(
                    f"agent {k} is under-allocated (u={self.u[k]:g} < t={sp.anchor:g}) and exceeds its bound by {excess:g}",
                    trace=self.trace,
                    details={"agent": k, "utility": float(self.u[k]), "anchor": sp.anchor, "excess": excess},
                )

    def _settle(self, i: int) -> None:
        while self._violates(i):
            found = self._improper_item(i)
            if found is not None:
                self._defect(i, *found)
            else:
                self._lower(i)
        self._record("agent_done", agent=i, **self.rule.trace_fields(i, self.points[i]))

    def run(self) -> None:
        self._assign_initial()
        while True:
            for i in range(self.instance.n):
                if self._violates(i):
                    self._settle(i)
                    break
            else:
                return

    def rho_max(self) -> float:
        ratios = []
        for i, agent in enumerate(self.instance.agents):
            total = self.instance.row_sum(i)
            v_total = agent.valuation.value(total) if total > 0 else 0.0
            if v_total > 0:
                ratios.append(float(self.start_slopes[i]) * total / v_total)
        return max(ratios) if ratios else 1.0

    def report(self, extras: Optional[Dict] = None) -> SolveReport:
        rule, instance = self.rule, self.instance
        allocation = Allocation(owner=tuple(None if o < 0 else int(o) for o in self.owner))
        state = DualState(points=list(self.points), mode=rule.mode, epsilon=rule.epsilon)
        primal = instance.welfare(self.u)
        _, dual = check_dual_feasible(state, instance)
        feasible, scaled = check_dual_feasible(state, instance, scale=rule.price_scale(), allocation=allocation)
        if not feasible:
            logger.warning("owner-priced dual with slack is infeasible; certifying with the max-price dual")
        certificate = rule.certificate(scaled if feasible else dual, primal)
        unassigned = tuple(int(j) for j in np.flatnonzero(self.owner < 0))
        termination = "converged_saturated" if self.saturated else "converged"
        logger.info(
            f"{rule.mode} solve {termination}: primal={primal:.6g}, dual={scaled if feasible else dual:.6g}, "
            f"reassignments={self.reassignments}, updates={sum(self.updates)}"
        )
        return SolveReport(
            mode=rule.mode,
            epsilon=rule.epsilon,
            allocation=allocation,
            state=state,
            utilities=tuple(float(x) for x in self.u),
            primal=primal,
            dual=dual,
            scaled_dual=scaled,
            certificate=certificate,
            dual_feasible=feasible,
            reassignments=self.reassignments,
            slope_updates=tuple(self.updates),
            targets=tuple(rule.targets),
            ceilings=tuple(self.ceilings),
            rho_max=self.rho_max(),
            termination=termination,
            clamped=rule.clamped,
            skipped=tuple(sorted(rule.skipped)),
            saturated=tuple(sorted(self.saturated)),
            unassigned_items=unassigned,
            under_allocation_checks=self.checks,
            trace=tuple(self.trace or ()),
            extras=dict(extras or {}),
        )


def run_primal_dual(instance: Instance, rule: SolveRule, trace: bool = False,
                    extras: Optional[Dict] = None) -> SolveReport:
    """Run the shared primal-dual loop under the given rule and build its report."""
    solve = _PrimalDualRun(instance, rule, record_trace=trace)
    solve.run()
    return solve.report(extras)


def _explicit_targets(instance: Instance, values: Sequence[float], name: str, lowest: float) -> List[float]:
    values = list(values)
    if len(values) != instance.n:
        raise DomainError(f"expected one {name} per agent ({instance.n}), got {len(values)}")
    out = []
    for i, x in enumerate(values):
        x = float(x)
        if math.isnan(x) or x < lowest:
            raise DomainError(f"{name}[{i}] must be >= {lowest}, got {x}")
        out.append(x)
    return out


def resolve_mult_targets(instance: Instance, epsilon: float, mu: TargetSpec = "auto") -> Tuple[List[float], List[int], List[int]]:
    """
    Per-agent mu targets, the agents whose target was clamped up to 1 + eps, and the skipped agents.

    Linear agents and agents valuing no item are skipped (they are never over- or
    under-allocated), as are agents with unbounded curvature.
    """
    given = None if mu in (None, "auto") else _explicit_targets(instance, mu, "mu", 1.0)
    targets, clamped, skipped = [], [], []
    for i, agent in enumerate(instance.agents):
        v = agent.valuation
        w = instance.row_max(i)
        if v.is_linear() or w <= 0:
            targets.append(1.0)
            skipped.append(i)
            continue
        target = given[i] if given is not None else mult_curvature(v, w, z_max_bound=instance.row_sum(i)).value
        if math.isinf(target):
            skipped.append(i)
        elif target < 1 + epsilon:
            clamped.append(i)
            target = 1 + epsilon
        targets.append(target)
    if clamped:
        logger.warning(f"mu raised to 1 + epsilon for agents {clamped}")
    return targets, clamped, skipped


def resolve_add_targets(instance: Instance, alpha: TargetSpec = "auto") -> Tuple[List[float], List[int]]:
    """Per-agent alpha targets and the skipped agents (linear, valuing nothing, or unbounded)."""
    given = None if alpha in (None, "auto") else _explicit_targets(instance, alpha, "alpha", 0.0)
    targets, skipped = [], []
    for i, agent in enumerate(instance.agents):
        v = agent.valuation
        w = instance.row_max(i)
        if v.is_linear() or w <= 0:
            targets.append(0.0)
            skipped.append(i)
            continue
        target = given[i] if given is not None else add_curvature(v, w, z_max_bound=instance.row_sum(i)).value
        if math.isinf(target):
            skipped.append(i)
        targets.append(target)
    return targets, skipped


def _require_nonnegative(instance: Instance) -> None:
    for i, agent in enumerate(instance.agents):
        if agent.valuation.value(0.0) < 0:
            raise DomainError(
                f"agent {i}: multiplicative guarantees need a non-negative valuation, "
                f"{agent.valuation.family} has v(0) < 0"
            )


def solve_multiplicative(instance: Instance, epsilon: float = DEFAULT_EPSILON,
                         mu: TargetSpec = "auto", trace: bool = False) -> SolveReport:
    """
    Multiplicative primal-dual solver.

    Args:
        instance: problem instance with non-negative valuations
        epsilon: slope decrease factor 1 + epsilon
        mu: "auto" (curvature module) or one target per agent
        trace: record the event trace

    Returns:
        SolveReport whose certificate is scaled dual / primal
    """
    _check_epsilon(epsilon)
    _require_nonnegative(instance)
    targets, clamped, skipped = resolve_mult_targets(instance, epsilon, mu)
    rule = MultiplicativeRule(instance, epsilon, targets, clamped=clamped, skipped=skipped)
    return run_primal_dual(instance, rule, trace=trace)


def solve_multiplicative_guessing(instance: Instance, epsilon: float = DEFAULT_EPSILON,
                                  trace: bool = False, cap: float = GUESS_CAP) -> SolveReport:
    """
    Multiplicative solver without known curvatures.

    Runs with one uniform guess for every non-linear agent, starting at 1 + epsilon.
    A run that leaves an under-allocated agent above the guess is discarded and the
    guess grows by epsilon; the first clean run is returned.
    """
    _check_epsilon(epsilon)
    _require_nonnegative(instance)
    skipped = [i for i, a in enumerate(instance.agents) if a.valuation.is_linear() or instance.row_max(i) <= 0]
    rejected = 0
    while True:
        guess = 1 + (rejected + 1) * epsilon
        if guess > cap + 1e-12:
            raise InvariantViolation(f"no mu guess up to {cap} produced a clean run", details={"rejected": rejected})
        targets = [1.0 if i in skipped else guess for i in range(instance.n)]
        rule = MultiplicativeRule(instance, epsilon, targets, skipped=skipped)
        try:
            return run_primal_dual(instance, rule, trace=trace, extras={"guess": guess, "rejected_guesses": rejected})
        except UnderAllocated as e:
            logger.info(f"mu guess {guess:.4g} rejected: {e}")
            rejected += 1


def solve_additive(instance: Instance, epsilon: float = DEFAULT_EPSILON,
                   alpha: TargetSpec = "auto", trace: bool = False) -> SolveReport:
    """
    Additive primal-dual solver: stop when D(u_i) - v_i(u_i) <= alpha_i, slopes lowered by epsilon/m.

    Returns:
        SolveReport whose certificate is scaled dual - primal
    """
    _check_epsilon(epsilon)
    targets, skipped = resolve_add_targets(instance, alpha)
    rule = AdditiveRule(instance, epsilon, targets, skipped=skipped)
    return run_primal_dual(instance, rule, trace=trace)
