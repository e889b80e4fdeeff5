"""
End-to-end acceptance checks over seeded random batches.

Full-size batches are marked slow; run them with: pytest -m slow
"""
import math

import numpy as np
import pytest

from src.Curvature.main import add_curvature, mult_curvature, smooth_log_alpha_closed_form
from src.Instance.gap import gen_gap_instance
from src.Instance.main import Agent, Instance, gen_random
from src.Oracle.main import brute_force_opt, numeric_curvature_oracle
from src.Solvers.main import solve_additive, solve_multiplicative
from src.Valuations.main import BudgetAdditive, Linear, PiecewiseLinear, SmoothLog
from src.Wbb.main import normalize_instance, smooth_log_instance, solve_wbb, trace_signature


def _random_piecewise(rng, w):
    pieces = int(rng.integers(2, 6))
    lengths = rng.uniform(w, 3 * w, pieces - 1)
    points = np.concatenate(([0.0], np.cumsum(lengths)))
    slopes = np.sort(rng.uniform(0.01, 5.0, pieces))[::-1]
    return PiecewiseLinear(points=tuple(points.tolist()), slopes=tuple(slopes.tolist()))


class TestCurvatureAcceptance:
    """Curvature values the solvers rely on"""

    @pytest.mark.parametrize("cap", [0.5, 1.0, 2.0, 7.5])
    def test_budget_mu_at_full_width(self, cap):
        """Test mu(c, w = c) = 4/3 with witness z* = c/2"""
        report = mult_curvature(BudgetAdditive(cap=cap), cap)
        assert report.value == pytest.approx(4 / 3, abs=1e-9)
        assert report.witness_zstar == pytest.approx(cap / 2)

    @pytest.mark.slow
    def test_piecewise_segments_at_least_w(self):
        """Test mu <= 4/3 for random piecewise functions whose segments are all at least w long"""
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            w = float(rng.uniform(0.1, 2.0))
            v = _random_piecewise(rng, w)
            assert mult_curvature(v, w).value <= 4 / 3 + 1e-9

    def test_smooth_log_alpha(self):
        """Test the closed form against the grid oracle at eta = omega = 1"""
        alpha = smooth_log_alpha_closed_form(1.0, 1.0)
        assert alpha == pytest.approx(0.05966, abs=1e-5)
        assert add_curvature(SmoothLog(eta=1.0, omega=1.0), 1.0).value == pytest.approx(alpha)
        assert numeric_curvature_oracle(SmoothLog(eta=1.0, omega=1.0), 1.0, "add") == pytest.approx(alpha, abs=1e-5)
        assert abs(math.exp(alpha) - 1.061) < 0.001


class TestGapAcceptance:
    """Integrality-gap instance sizes"""

    def test_budget_gap_optima(self):
        """Test OPT_I = 3 and OPT_F = 4 for cap 2 at width 2"""
        instance, spec = gen_gap_instance(BudgetAdditive(cap=2.0), 2.0)
        opt, _ = brute_force_opt(instance)
        assert opt == pytest.approx(3.0, abs=1e-9)
        assert spec.opt_fractional() == pytest.approx(4.0, abs=1e-9)


def _random_shape(seed):
    rng = np.random.default_rng(seed)
    return int(rng.integers(1, 4)), int(rng.integers(1, 7))


def _check_multiplicative(family, seeds, epsilon=0.05):
    for seed in seeds:
        n, m = _random_shape(seed)
        instance = gen_random(n, m, family, seed=seed)
        report = solve_multiplicative(instance, epsilon=epsilon)
        opt, _ = brute_force_opt(instance)
        assert report.certified_dual >= opt - 1e-9, f"seed {seed}"
        bound = max(report.targets)
        if math.isfinite(bound):
            assert report.primal * (1 + epsilon) * bound >= opt - 1e-9, f"seed {seed}"
        for updates, ceiling in zip(report.slope_updates, report.ceilings):
            assert updates <= ceiling, f"seed {seed}"


def _check_additive(omega, seeds, epsilon=0.05):
    for seed in seeds:
        n, m = _random_shape(100_000 + seed)
        instance = gen_random(n, m, "smooth_log", seed=seed, omega=omega)
        report = solve_additive(instance, epsilon=epsilon)
        opt, _ = brute_force_opt(instance)
        assert report.saturated == (), f"seed {seed}"
        assert report.certificate <= sum(report.targets) + epsilon + 1e-9, f"seed {seed}"
        assert report.primal >= opt - sum(report.targets) - epsilon - 1e-9, f"seed {seed}"
        assert report.certified_dual >= opt - 1e-9, f"seed {seed}"


def _check_equivalence(seeds, epsilon=0.05):
    for seed in seeds:
        rng = np.random.default_rng(200_000 + seed)
        n, m = int(rng.integers(1, 4)), int(rng.integers(1, 7))
        normalized, _ = normalize_instance(gen_random(n, m, "linear", seed=seed))
        wbb = solve_wbb(normalized, omega=1.0, epsilon=epsilon, trace=True)
        additive = solve_additive(smooth_log_instance(normalized, 1.0), epsilon=epsilon, trace=True)
        assert trace_signature(wbb.trace) == trace_signature(additive.trace), f"seed {seed}"
        assert wbb.allocation == additive.allocation, f"seed {seed}"


def _check_product_bound(seeds, epsilon=0.01):
    alpha_bar = smooth_log_alpha_closed_form(1.0, 1.0)
    for seed in seeds:
        rng = np.random.default_rng(300_000 + seed)
        n, m = int(rng.integers(2, 4)), int(rng.integers(2, 7))
        agents = tuple(Agent(Linear(a=1.0), weight=float(w)) for w in rng.uniform(0.2, 3.0, n))
        instance = Instance(agents=agents, m=m, utilities=rng.uniform(0.05, 1.0, (n, m)))
        normalized, normalization = normalize_instance(instance)
        report = solve_wbb(normalized, omega=1.0, epsilon=epsilon, normalization=normalization)
        opt_log, _ = brute_force_opt(normalized, "nash_log", omega=1.0)
        product = report.extras["product_objective"]
        assert product >= math.exp(opt_log) / math.exp(alpha_bar + epsilon) - 1e-9, f"seed {seed}"
        if epsilon == 0.01:
            assert product >= math.exp(opt_log) / 1.073 - 1e-9, f"seed {seed}"


class TestSolverSmoke:
    """A few seeds of each solver batch"""

    @pytest.mark.parametrize("family", ["budget", "piecewise", "power"])
    def test_multiplicative_guarantee(self, family):
        """Test primal (1+eps) max mu >= OPT, certified dual >= OPT and the update ceilings"""
        _check_multiplicative(family, range(5))

    @pytest.mark.parametrize("omega", [0.25, 0.5, 1.0])
    def test_additive_smooth_log(self, omega):
        """Test dual - primal <= sum alpha + eps and primal >= OPT - sum alpha - eps"""
        _check_additive(omega, range(5))

    def test_trace_equivalence(self):
        """Test that bid dynamics replay the additive smooth-log solve"""
        _check_equivalence(range(5))

    def test_asymmetric_product_bound(self):
        """Test product >= OPT_product / exp(alpha_bar + eps) with unequal weights"""
        _check_product_bound(range(5))


@pytest.mark.slow
class TestSolverAcceptance:
    """Approximation and duality guarantees against brute force at full batch size"""

    @pytest.mark.parametrize("family", ["budget", "piecewise", "power"])
    def test_multiplicative_guarantee(self, family):
        """Test 500 instances per family against brute force"""
        _check_multiplicative(family, range(500))

    @pytest.mark.parametrize("omega", [0.25, 0.5, 1.0])
    def test_additive_smooth_log(self, omega):
        """Test 500 smooth-log instances per omega against brute force"""
        _check_additive(omega, range(500))

    def test_trace_equivalence(self):
        """Test identical traces and allocations on 200 normalized instances"""
        _check_equivalence(range(200))

    def test_asymmetric_product_bound(self):
        """Test the product bound on 200 asymmetric instances at eps = 0.01"""
        _check_product_bound(range(200))
