"""
Tests for Solvers module (multiplicative, additive and mu-guessing primal-dual solvers)
"""
import json

import numpy as np
import pytest

from src.errors import DomainError, IterationBudgetExceeded
from src.Instance.main import Agent, Instance, gen_random
from src.Oracle.main import brute_force_opt
from src.Solvers.main import (
    AdditiveRule,
    UnderAllocated,
    resolve_add_targets,
    resolve_mult_targets,
    run_primal_dual,
    solve_additive,
    solve_multiplicative,
    solve_multiplicative_guessing,
)
from src.Solvers.report import trace_lines
from src.Valuations.main import BudgetAdditive, SmoothLog


class TestMultiplicative:
    """Test the multiplicative solver"""

    def test_single_agent_update_count(self, single_budget_instance):
        """Test the slope schedule of one over-allocated budget agent"""
        report = solve_multiplicative(single_budget_instance, epsilon=0.01)
        # mu = 1/(1 - 0.15) at w = 0.6; D = 1 + 0.2 s drops below it after 13 divisions by 1.01
        assert report.slope_updates == (13,)
        assert report.reassignments == 0
        assert report.allocation.owner == (0, 0)
        assert report.primal == pytest.approx(1.0)
        assert report.termination == "converged"

    def test_certificate_bounds(self, single_budget_instance):
        """Test that the certificate sits between OPT/primal and (1+eps) mu"""
        report = solve_multiplicative(single_budget_instance, epsilon=0.01)
        assert report.dual_feasible
        assert report.certificate == pytest.approx(report.scaled_dual / report.primal)
        assert report.certificate <= 1.01 * report.targets[0] + 1e-9
        assert report.certificate >= 1.0

    def test_weak_duality_two_agents(self, budget_instance):
        """Test that the certified dual bounds the brute-force optimum"""
        report = solve_multiplicative(budget_instance, epsilon=0.05)
        opt, _ = brute_force_opt(budget_instance)
        assert report.certified_dual >= opt - 1e-9
        assert report.primal * 1.05 * max(report.targets) >= opt - 1e-9
        assert report.unassigned_items == ()

    def test_linear_agents_are_skipped(self, linear_instance):
        """Test that linear agents keep their slopes and get the optimum"""
        report = solve_multiplicative(linear_instance, epsilon=0.01)
        assert report.skipped == (0, 1)
        assert report.slope_updates == (0, 0)
        assert report.primal == pytest.approx(1.6)
        assert report.dual == pytest.approx(1.6)
        assert report.certificate == pytest.approx(1.01)

    def test_explicit_targets(self, single_budget_instance):
        """Test that explicit mu values are used as given"""
        report = solve_multiplicative(single_budget_instance, epsilon=0.01, mu=[1.5])
        assert report.targets == (1.5,)
        assert report.slope_updates == (0,)

    def test_targets_clamped_to_one_plus_epsilon(self, single_budget_instance):
        """Test that a target below 1 + eps is raised and reported"""
        targets, clamped, skipped = resolve_mult_targets(single_budget_instance, 0.5)
        assert targets == [1.5]
        assert clamped == [0]
        assert skipped == []

    def test_power_agents_skipped_with_infinite_target(self):
        """Test that unbounded curvature skips the agent and serializes as inf"""
        instance = gen_random(2, 3, "power", seed=1)
        report = solve_multiplicative(instance, epsilon=0.05)
        assert report.skipped == (0, 1)
        d = report.to_dict()
        assert d["targets"] == ["inf", "inf"]
        json.dumps(d)

    def test_negative_valuation_rejected(self):
        """Test DomainError when some v(0) < 0"""
        instance = Instance(agents=(Agent(SmoothLog(eta=1.0, omega=0.5)),), m=1, utilities=np.array([[1.0]]))
        with pytest.raises(DomainError):
            solve_multiplicative(instance)

    def test_bad_epsilon(self, budget_instance):
        """Test DomainError for a non-positive epsilon"""
        with pytest.raises(DomainError):
            solve_multiplicative(budget_instance, epsilon=0.0)

    def test_wrong_target_count(self, budget_instance):
        """Test DomainError for a target list of the wrong length"""
        with pytest.raises(DomainError):
            solve_multiplicative(budget_instance, mu=[1.5])

    def test_iteration_budget(self, single_budget_instance, monkeypatch):
        """Test that running past the iteration budget raises with the trace attached"""
        monkeypatch.setattr("src.Solvers.main.ITERATION_SAFETY_FACTOR", 0)
        with pytest.raises(IterationBudgetExceeded) as exc:
            solve_multiplicative(single_budget_instance, epsilon=0.01, trace=True)
        assert exc.value.trace
        assert exc.value.details["updates"] == [3]


class TestUpdateCeilings:
    """Test the per-agent update ceilings"""

    def test_counts_within_ceilings(self):
        """Test slope updates against ceil(ln(rho/eps)/ln(1+eps)) + 1"""
        for seed in range(5):
            instance = gen_random(3, 5, "budget", seed=seed)
            report = solve_multiplicative(instance, epsilon=0.05)
            for updates, ceiling in zip(report.slope_updates, report.ceilings):
                assert updates <= ceiling

    def test_rho_max(self, single_budget_instance):
        """Test rho_max = s0 * U / v(U) for the single agent"""
        report = solve_multiplicative(single_budget_instance, epsilon=0.01)
        assert report.rho_max == pytest.approx(1.2)


class TestTrace:
    """Test the event trace"""

    def test_event_kinds_and_order(self, budget_instance):
        """Test trace steps and event kinds"""
        report = solve_multiplicative(budget_instance, epsilon=0.05, trace=True)
        steps = [e["t"] for e in report.trace]
        assert steps == list(range(len(steps)))
        assert {e["event"] for e in report.trace} <= {"defect", "slope_update", "agent_done"}
        updates = [e for e in report.trace if e["event"] == "slope_update"]
        assert len(updates) == sum(report.slope_updates)

    def test_trace_lines_are_json(self, single_budget_instance):
        """Test one JSON object per event"""
        report = solve_multiplicative(single_budget_instance, epsilon=0.01, trace=True)
        lines = trace_lines(report.trace)
        first = json.loads(lines[0])
        assert first == {"t": 0, "event": "slope_update", "agent": 0, "slope": pytest.approx(1 / 1.01)}
        assert json.loads(lines[-1])["event"] == "agent_done"

    def test_no_trace_by_default(self, single_budget_instance):
        """Test that traces are only recorded on request"""
        assert solve_multiplicative(single_budget_instance).trace == ()


class TestGuessing:
    """Test the mu-guessing wrapper"""

    def test_first_guess_accepted(self, single_budget_instance):
        """Test a run that never under-allocates keeps the first guess"""
        report = solve_multiplicative_guessing(single_budget_instance, epsilon=0.01)
        assert report.extras["guess"] == pytest.approx(1.01)
        assert report.extras["rejected_guesses"] == 0
        assert report.certificate <= 1.01 * 1.01 + 1e-9

    def test_guess_reported(self, budget_instance):
        """Test that the accepted guess lands in the serialized report"""
        report = solve_multiplicative_guessing(budget_instance, epsilon=0.05)
        d = report.to_dict()
        assert d["guess"] >= 1.05 - 1e-12
        assert d["rejected_guesses"] >= 0


class TestAdditive:
    """Test the additive solver"""

    def test_single_agent_update_count(self):
        """Test the eps/m slope schedule of one budget agent"""
        instance = Instance(agents=(Agent(BudgetAdditive(cap=1.0)),), m=2, utilities=np.array([[0.6, 0.7]]))
        report = solve_additive(instance, epsilon=0.01)
        # alpha = 0.175 at w = 0.7; D - v = 0.3 s exceeds it until s = 1 - 84 * 0.005
        assert report.slope_updates == (84,)
        assert report.certificate == pytest.approx(0.184)
        assert report.certificate <= report.targets[0] + 0.01 + 1e-9

    def test_smooth_log_bound(self):
        """Test dual - primal <= sum alpha + eps on a random smooth-log instance"""
        instance = gen_random(3, 5, "smooth_log", seed=4, omega=0.5)
        report = solve_additive(instance, epsilon=0.01)
        assert report.dual_feasible
        assert report.certificate <= sum(report.targets) + 0.01 + 1e-9
        opt, _ = brute_force_opt(instance)
        assert report.certified_dual >= opt - 1e-9

    def test_linear_targets_skipped(self, linear_instance):
        """Test that linear agents get alpha = 0 and are skipped"""
        targets, skipped = resolve_add_targets(linear_instance)
        assert targets == [0.0, 0.0]
        assert skipped == [0, 1]

    def test_report_counters(self, budget_instance):
        """Test the counters block of the serialized report"""
        d = solve_additive(budget_instance, epsilon=0.05).to_dict()
        assert d["mode"] == "additive"
        assert set(d["counters"]) == {"reassignments", "slope_updates", "under_allocation_checks"}


def _small_smooth_log_instance():
    return Instance(agents=(Agent(SmoothLog(eta=0.6105, omega=1.0), weight=0.6105),), m=1,
                    utilities=np.array([[0.0263]]))


class TestSlopeStepClamp:
    """Test that one slope update never carries the anchor past the agent's utility"""

    def test_small_utility_stops_at_tangent(self):
        """Test a step larger than the gap to v'(u): one update, no saturation, bound kept"""
        report = solve_additive(_small_smooth_log_instance(), epsilon=0.05)
        assert report.slope_updates == (1,)
        assert report.saturated == ()
        assert report.termination == "converged"
        assert report.state.points[0].slope == pytest.approx(0.6105 / 1.0263)
        assert report.state.points[0].anchor == pytest.approx(0.0263)
        assert report.certificate <= sum(report.targets) + 0.05 + 1e-9

    def test_regular_step_is_unchanged(self):
        """Test that a step short of the tangent lowers the slope by exactly eps/m"""
        instance = Instance(agents=(Agent(BudgetAdditive(cap=1.0)),), m=2, utilities=np.array([[0.6, 0.7]]))
        rule = AdditiveRule(instance, 0.01, [0.175])
        sp, saturated = rule.lower(0, rule.start(0), 1.3)
        assert not saturated
        assert sp.slope == pytest.approx(1.0 - 0.005)

    def test_random_smooth_log_batch(self):
        """Test dual - primal <= sum alpha + eps and no saturation on seeded instances"""
        for seed in range(40):
            rng = np.random.default_rng(seed)
            instance = gen_random(int(rng.integers(1, 4)), int(rng.integers(1, 7)), "smooth_log", seed=seed, omega=1.0)
            report = solve_additive(instance, epsilon=0.05)
            assert report.saturated == ()
            assert report.certificate <= sum(report.targets) + 0.05 + 1e-9


class _UnclampedRule(AdditiveRule):
    """Plain eps/m steps with no stop at the tangent."""

    def lower(self, i, sp, u):
        return self.valuation(i).slope_point_from_slope(self.decrease(i, sp.slope)), False


class TestUnderAllocationAfterUpdates:
    """Test that the under-allocation check also runs after slope updates"""

    def test_overshooting_update_raises(self):
        """Test UnderAllocated when an update alone leaves the agent below its anchor"""
        instance = _small_smooth_log_instance()
        targets, skipped = resolve_add_targets(instance)
        rule = _UnclampedRule(instance, 0.05, targets, skipped=skipped)
        with pytest.raises(UnderAllocated) as exc:
            run_primal_dual(instance, rule, trace=True)
        assert exc.value.details["agent"] == 0
        assert exc.value.trace[-1]["event"] == "slope_update"

