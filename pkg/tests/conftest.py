"""
Pytest configuration and shared fixtures
"""
import json

import numpy as np
import pytest

from src.Instance.gap import gen_gap_instance
from src.Instance.main import Agent, Instance
from src.Valuations.main import BudgetAdditive, Linear, PiecewiseLinear


@pytest.fixture
def budget_instance():
    """Fixture providing two budget-additive agents (cap 1) and three items"""
    agents = (Agent(BudgetAdditive(cap=1.0)), Agent(BudgetAdditive(cap=1.0)))
    utilities = np.array([
        [1.0, 0.5, 0.5],
        [0.5, 1.0, 0.25],
    ])
    return Instance(agents=agents, m=3, utilities=utilities)


@pytest.fixture
def single_budget_instance():
    """Fixture providing one budget-additive agent (cap 1) that receives more than its cap"""
    return Instance(agents=(Agent(BudgetAdditive(cap=1.0)),), m=2, utilities=np.array([[0.6, 0.6]]))


@pytest.fixture
def linear_instance():
    """Fixture providing two linear agents whose optimum is 1.6"""
    agents = (Agent(Linear(a=1.0)), Agent(Linear(a=2.0)))
    return Instance(agents=agents, m=2, utilities=np.array([[1.0, 0.2], [0.4, 0.3]]))


@pytest.fixture
def wbb_single_instance():
    """Fixture providing the n=1, m=1 linear instance (product objective 2 at omega=1)"""
    return Instance(agents=(Agent(Linear(a=1.0)),), m=1, utilities=np.array([[1.0]]))


@pytest.fixture
def piecewise_valuation():
    """Fixture providing a three-piece concave function with kinks at 1 and 3"""
    return PiecewiseLinear(points=(0.0, 1.0, 3.0), slopes=(2.0, 1.0, 0.5))


@pytest.fixture
def gap_pair():
    """Fixture providing the budget (c=2) integrality-gap instance at width 2 and its spec"""
    return gen_gap_instance(BudgetAdditive(cap=2.0), 2.0)


@pytest.fixture
def write_json(tmp_path):
    """Fixture writing a JSON-serializable object to a temp file and returning its path"""
    def _write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return str(path)
    return _write
