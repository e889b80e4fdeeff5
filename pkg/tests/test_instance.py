"""
Tests for Instance module (instances, allocations, random and gap generators)
"""
import logging

import numpy as np
import pytest

from src.errors import DomainError, GapConstructionError, InstanceValidationError
from src.Instance.gap import gen_gap_instance
from src.Instance.main import (
    Agent,
    Allocation,
    Instance,
    allocation_from_dict,
    gen_random,
    instance_from_dict,
    load_instance,
    save_instance,
)
from src.Valuations.main import BudgetAdditive, Linear, PiecewiseLinear, Power, SmoothLog


def _raw_instance(**overrides):
    raw = {
        "agents": [
            {"valuation": {"family": "budget", "cap": 1.0}, "weight": 1.0},
            {"valuation": {"family": "linear", "slope": 1.0}},
        ],
        "m": 2,
        "utilities": [[1.0, 0.5], [0.5, 1.0]],
    }
    raw.update(overrides)
    return raw


class TestInstanceValidation:
    """Test validation and field paths"""

    def test_valid_instance(self):
        """Test building a valid instance from its JSON form"""
        instance = instance_from_dict(_raw_instance())
        assert instance.n == 2
        assert instance.m == 2
        assert instance.weights.tolist() == [1.0, 1.0]
        assert instance.row_max(0) == 1.0
        assert instance.row_sum(1) == 1.5

    def test_utilities_are_read_only(self, budget_instance):
        """Test that the utility matrix cannot be modified in place"""
        with pytest.raises(ValueError):
            budget_instance.utilities[0, 0] = 5.0

    def test_negative_utility_path(self):
        """Test the path of a negative utility"""
        with pytest.raises(InstanceValidationError) as exc:
            instance_from_dict(_raw_instance(utilities=[[1.0, 0.5], [-0.5, 1.0]]))
        assert exc.value.field_path == "utilities[1][0]"

    def test_ragged_row_path(self):
        """Test the path of a row with the wrong length"""
        with pytest.raises(InstanceValidationError) as exc:
            instance_from_dict(_raw_instance(utilities=[[1.0, 0.5], [1.0]]))
        assert exc.value.field_path == "utilities[1]"

    def test_missing_m(self):
        """Test the path of a missing item count"""
        raw = _raw_instance()
        del raw["m"]
        with pytest.raises(InstanceValidationError) as exc:
            instance_from_dict(raw)
        assert exc.value.field_path == "m"

    def test_bad_weight(self):
        """Test the path of a non-positive weight"""
        raw = _raw_instance()
        raw["agents"][0]["weight"] = 0
        with pytest.raises(InstanceValidationError) as exc:
            instance_from_dict(raw)
        assert exc.value.field_path == "agents[0].weight"

    def test_bad_valuation_path(self):
        """Test the path of a malformed valuation"""
        raw = _raw_instance()
        raw["agents"][1]["valuation"] = {"family": "power", "exponent": 2.0}
        with pytest.raises(InstanceValidationError) as exc:
            instance_from_dict(raw)
        assert exc.value.field_path == "agents[1].valuation"

    def test_warns_on_long_items(self, caplog):
        """Test the warning when a piecewise agent's utilities exceed its shortest segment"""
        agents = (Agent(PiecewiseLinear(points=(0.0, 0.5), slopes=(1.0, 0.5))),)
        with caplog.at_level(logging.WARNING):
            Instance(agents=agents, m=1, utilities=np.array([[0.8]]))
        assert "shortest segment" in caplog.text

    def test_warns_on_unvalued_items(self, caplog):
        """Test the warning for items nobody values"""
        with caplog.at_level(logging.WARNING):
            instance = Instance(agents=(Agent(Linear(a=1.0)),), m=2, utilities=np.array([[1.0, 0.0]]))
        assert instance.unvalued_items() == [1]
        assert "valued by no agent" in caplog.text

    def test_welfare(self, budget_instance):
        """Test sum_i v_i(u_i)"""
        assert budget_instance.welfare([1.5, 0.25]) == pytest.approx(1.25)


class TestAllocations:
    """Test the Allocation type"""

    def test_utilities_and_bundles(self, budget_instance):
        """Test per-agent utilities and bundles"""
        allocation = Allocation(owner=(0, 1, None))
        assert allocation.utilities(budget_instance).tolist() == [1.0, 1.0]
        assert allocation.bundles(2) == [[0], [1]]

    def test_from_dict_rejects_bad_owner(self, budget_instance):
        """Test the path of an out-of-range owner"""
        with pytest.raises(InstanceValidationError) as exc:
            allocation_from_dict({"owner": [0, 5, None]}, budget_instance)
        assert exc.value.field_path == "owner[1]"


class TestPersistence:
    """Test JSON load and save"""

    def test_save_then_load(self, budget_instance, tmp_path):
        """Test that a saved instance loads back with the same utilities"""
        path = tmp_path / "instance.json"
        save_instance(budget_instance, path)
        loaded = load_instance(path)
        assert loaded.n == budget_instance.n
        assert np.array_equal(loaded.utilities, budget_instance.utilities)
        assert loaded.agents[0].valuation == BudgetAdditive(cap=1.0)

    def test_missing_file(self, tmp_path):
        """Test FileNotFoundError for a missing instance file"""
        with pytest.raises(FileNotFoundError):
            load_instance(tmp_path / "nope.json")


class TestRandomRoundTrip:
    """Test that generated instances survive a save and load unchanged"""

    @pytest.mark.parametrize("family", ["linear", "budget", "piecewise", "power", "smooth_log"])
    def test_every_family(self, family, tmp_path):
        """Test equal descriptors, weights and utilities after a JSON round trip"""
        for seed in range(5):
            instance = gen_random(3, 4, family, seed=seed, omega=0.5)
            path = tmp_path / f"{family}_{seed}.json"
            save_instance(instance, path)
            loaded = load_instance(path)
            assert loaded.to_dict() == instance.to_dict()
            assert np.array_equal(loaded.utilities, instance.utilities)
            assert loaded.valuations == instance.valuations
            assert np.array_equal(loaded.weights, instance.weights)


class TestRandomInstances:
    """Test seeded generation"""

    @pytest.mark.parametrize("family,cls", [
        ("linear", Linear), ("budget", BudgetAdditive), ("piecewise", PiecewiseLinear),
        ("power", Power), ("smooth_log", SmoothLog),
    ])
    def test_family(self, family, cls):
        """Test that every agent gets the requested family"""
        instance = gen_random(3, 4, family, seed=7)
        assert all(isinstance(v, cls) for v in instance.valuations)
        assert instance.utilities.shape == (3, 4)
        assert np.all((instance.utilities >= 0) & (instance.utilities < 1))

    def test_seed_determinism(self):
        """Test that identical seeds give identical instances"""
        a = gen_random(2, 5, "piecewise", seed=3)
        b = gen_random(2, 5, "piecewise", seed=3)
        assert np.array_equal(a.utilities, b.utilities)
        assert a.valuations == b.valuations

    def test_piecewise_segments_fit_items(self):
        """Test that generated piecewise segments are longer than any utility"""
        instance = gen_random(3, 6, "piecewise", seed=11)
        for i, v in enumerate(instance.valuations):
            assert v.min_segment_length() >= instance.row_max(i)

    def test_unknown_family(self):
        """Test DomainError for an unknown family"""
        with pytest.raises(DomainError):
            gen_random(2, 2, "cobb_douglas", seed=0)


class TestGapInstances:
    """Test the integrality-gap generator"""

    def test_budget_full_width(self, gap_pair):
        """Test the c=2, u=2 gap instance: three items, OPT_I = 3, OPT_F = 4"""
        instance, spec = gap_pair
        assert (spec.beta, spec.gamma) == (1, 2)
        assert instance.n == 2 and instance.m == 3
        assert spec.opt_integral() == pytest.approx(3.0)
        assert spec.opt_fractional() == pytest.approx(4.0)
        assert spec.ratio() == pytest.approx(4 / 3)

    def test_budget_half_width(self):
        """Test the c=2, u=1 gap instance with a remainder private item"""
        instance, spec = gen_gap_instance(BudgetAdditive(cap=2.0), 1.0)
        assert spec.z == pytest.approx(1.5)
        assert spec.full_private_items == 1
        assert spec.remainder == pytest.approx(0.5)
        assert instance.m == 5
        assert spec.opt_integral() == pytest.approx(3.5)
        assert spec.ratio() == pytest.approx(8 / 7)

    def test_public_items_first(self, gap_pair):
        """Test the column layout: public items, then private items per agent"""
        instance, spec = gap_pair
        assert instance.utilities[:, 0].tolist() == [2.0, 2.0]
        assert instance.utilities[:, 1].tolist() == [1.0, 0.0]
        assert instance.utilities[:, 2].tolist() == [0.0, 1.0]

    def test_linear_has_no_gap(self):
        """Test GapConstructionError when mu = 1"""
        with pytest.raises(GapConstructionError):
            gen_gap_instance(Linear(a=1.0), 1.0)

    def test_unbounded_mu(self):
        """Test GapConstructionError when mu is infinite"""
        with pytest.raises(GapConstructionError):
            gen_gap_instance(Power(exponent=0.5), 1.0)

    def test_spec_to_dict(self, gap_pair):
        """Test the serialized spec"""
        _, spec = gap_pair
        d = spec.to_dict()
        assert d["items"] == 3
        assert d["valuation"] == {"family": "budget", "cap": 2.0}
