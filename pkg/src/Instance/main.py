"""
Instance Module - Problem Instances and Allocations

This module handles:
1. The Instance (agents x items utility matrix) and Allocation types
2. Validation with field paths for every malformed entry
3. JSON load/save
4. Seeded random instance generation per valuation family
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import family_list
from src.errors import DomainError, InstanceValidationError
from src.Valuations.main import (
    BudgetAdditive,
    ConcaveValuation,
    Linear,
    PiecewiseLinear,
    Power,
    SmoothLog,
    valuation_from_dict,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Agent:
    valuation: ConcaveValuation
    weight: float = 1.0

    def to_dict(self) -> Dict:
        return {"valuation": self.valuation.to_dict(), "weight": self.weight}


def _is_number(x) -> bool:
    return isinstance(x, (int, float, np.floating, np.integer)) and not isinstance(x, bool)


def _validate_utilities(raw, n: int, m: int) -> np.ndarray:
    if isinstance(raw, np.ndarray):
        raw = raw.tolist()
    if not isinstance(raw, (list, tuple)):
        raise InstanceValidationError("utilities", "expected a list of rows")
    if len(raw) != n:
        raise InstanceValidationError("utilities", f"expected {n} rows (one per agent), got {len(raw)}")
    for i, row in enumerate(raw):
        if not isinstance(row, (list, tuple)) or len(row) != m:
            got = len(row) if isinstance(row, (list, tuple)) else type(row).__name__
            raise InstanceValidationError(f"utilities[{i}]", f"expected {m} entries, got {got}")
        for j, x in enumerate(row):
            if not _is_number(x) or math.isnan(x) or math.isinf(x) or x < 0:
                raise InstanceValidationError(f"utilities[{i}][{j}]", f"utility must be finite and >= 0, got {x!r}")
    return np.array(raw, dtype=float).reshape(n, m)


@dataclass(frozen=True, eq=False)
class Instance:
    """n agents (valuation + weight) and m items with utilities[i][j] >= 0."""
    agents: Tuple[Agent, ...]
    m: int
    utilities: np.ndarray

    def __post_init__(self):
        agents = tuple(self.agents)
        if len(agents) == 0:
            raise InstanceValidationError("agents", "at least one agent is required")
        for i, agent in enumerate(agents):
            if not isinstance(agent.valuation, ConcaveValuation):
                raise InstanceValidationError(f"agents[{i}].valuation", "not a valuation")
            if not _is_number(agent.weight) or not (agent.weight > 0) or math.isinf(agent.weight):
                raise InstanceValidationError(f"agents[{i}].weight", f"weight must be finite and > 0, got {agent.weight!r}")
        if not _is_number(self.m) or int(self.m) != self.m or self.m < 0:
            raise InstanceValidationError("m", f"item count must be a non-negative integer, got {self.m!r}")
        utilities = _validate_utilities(self.utilities, len(agents), int(self.m))
        utilities.setflags(write=False)
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "utilities", utilities)
        self._warn_preconditions()

    def _warn_preconditions(self) -> None:
        unvalued = self.unvalued_items()
        if unvalued:
            logger.warning(f"items valued by no agent: {unvalued}")
        for i, agent in enumerate(self.agents):
            v = agent.valuation
            if isinstance(v, PiecewiseLinear) and self.row_max(i) > v.min_segment_length():
                logger.warning(
                    f"agent {i}: max utility {self.row_max(i):g} exceeds the shortest segment "
                    f"{v.min_segment_length():g}; the 4/3 bound does not apply"
                )

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def weights(self) -> np.ndarray:
        return np.array([a.weight for a in self.agents], dtype=float)

    @property
    def valuations(self) -> List[ConcaveValuation]:
        return [a.valuation for a in self.agents]

    def row_max(self, i: int) -> float:
        return float(self.utilities[i].max()) if self.m else 0.0

    def row_sum(self, i: int) -> float:
        return float(self.utilities[i].sum())

    def unvalued_items(self) -> List[int]:
        if self.m == 0:
            return []
        return [int(j) for j in np.flatnonzero(self.utilities.max(axis=0) <= 0)]

    def welfare(self, utilities: Sequence[float]) -> float:
        """Utilitarian objective sum_i v_i(u_i)."""
        return float(sum(a.valuation.value(float(u)) for a, u in zip(self.agents, utilities)))

    def to_dict(self) -> Dict:
        return {
            "agents": [a.to_dict() for a in self.agents],
            "m": self.m,
            "utilities": self.utilities.tolist(),
        }


@dataclass(frozen=True)
class Allocation:
    """owner[j] is the agent holding item j, or None when unassigned."""
    owner: Tuple[Optional[int], ...]

    def __post_init__(self):
        object.__setattr__(self, "owner", tuple(None if o is None else int(o) for o in self.owner))

    def utilities(self, instance: Instance) -> np.ndarray:
        u = np.zeros(instance.n)
        for j, i in enumerate(self.owner):
            if i is not None:
                u[i] += instance.utilities[i, j]
        return u

    def bundles(self, n: int) -> List[List[int]]:
        out = [[] for _ in range(n)]
        for j, i in enumerate(self.owner):
            if i is not None:
                out[i].append(j)
        return out

    def to_dict(self) -> Dict:
        return {"owner": list(self.owner)}


def allocation_from_dict(d: Dict, instance: Instance) -> Allocation:
    owner = d.get("owner") if isinstance(d, dict) else None
    if not isinstance(owner, list) or len(owner) != instance.m:
        raise InstanceValidationError("owner", f"expected a list of {instance.m} agent indices")
    for j, i in enumerate(owner):
        if i is not None and (not isinstance(i, int) or isinstance(i, bool) or not 0 <= i < instance.n):
            raise InstanceValidationError(f"owner[{j}]", f"expected null or an agent index below {instance.n}, got {i!r}")
    return Allocation(owner=tuple(owner))


def instance_from_dict(d: Dict) -> Instance:
    """
    Build and validate an Instance from its JSON form.

    Args:
        d: {"agents": [{"valuation": {...}, "weight": 1.0}], "m": 4, "utilities": [[...]]}

    Returns:
        Validated Instance
    """
    if not isinstance(d, dict):
        raise InstanceValidationError("$", "instance must be a JSON object")
    raw_agents = d.get("agents")
    if not isinstance(raw_agents, list):
        raise InstanceValidationError("agents", "expected a list")
    agents = []
    for i, raw in enumerate(raw_agents):
        if not isinstance(raw, dict):
            raise InstanceValidationError(f"agents[{i}]", "expected an object")
        valuation = valuation_from_dict(raw.get("valuation"), f"agents[{i}].valuation")
        weight = raw.get("weight", 1.0)
        if not _is_number(weight):
            raise InstanceValidationError(f"agents[{i}].weight", f"expected a number, got {weight!r}")
        agents.append(Agent(valuation=valuation, weight=float(weight)))
    if "m" not in d:
        raise InstanceValidationError("m", "missing field")
    if "utilities" not in d:
        raise InstanceValidationError("utilities", "missing field")
    return Instance(agents=tuple(agents), m=d["m"], utilities=d["utilities"])


def load_instance(path: Union[str, Path]) -> Instance:
    with open(path, "r") as f:
        data = json.load(f)
    instance = instance_from_dict(data)
    logger.info(f"loaded instance {path}: n={instance.n}, m={instance.m}")
    return instance


def save_instance(instance: Instance, path: Union[str, Path]) -> None:
    with open(path, "w") as f:
        json.dump(instance.to_dict(), f, indent=2)


def _random_valuation(family: str, rng: np.random.Generator, omega: float) -> Tuple[ConcaveValuation, float]:
    if family == "linear":
        return Linear(a=float(rng.uniform(0.5, 2.0))), 1.0
    if family == "budget":
        return BudgetAdditive(cap=float(rng.uniform(0.5, 2.0))), 1.0
    if family == "piecewise":
        pieces = int(rng.integers(2, 4))
        lengths = rng.uniform(1.0, 2.0, pieces - 1)
        points = np.concatenate(([0.0], np.cumsum(lengths)))
        slopes = np.sort(rng.uniform(0.05, 2.0, pieces))[::-1]
        return PiecewiseLinear(points=tuple(points.tolist()), slopes=tuple(slopes.tolist())), 1.0
    if family == "power":
        return Power(exponent=float(rng.uniform(0.3, 0.9))), 1.0
    eta = float(rng.uniform(0.5, 2.0))
    return SmoothLog(eta=eta, omega=omega), eta


def gen_random(n: int, m: int, family: str, seed: int, omega: float = 1.0) -> Instance:
    """
    Seeded random instance with i.i.d. uniform utilities in [0, 1).

    Piecewise segments are at least 1 long, so every utility fits inside the
    shortest segment. Smooth-log agents get weight eta drawn from [0.5, 2].

    Args:
        n: number of agents (>= 1)
        m: number of items (>= 1)
        family: one of config.family_list
        seed: seed for numpy's default_rng
        omega: smoothing for the smooth_log family

    Returns:
        Instance, identical for identical arguments
    """
    if family not in family_list:
        raise DomainError(f"unknown family {family!r}, expected one of {family_list}")
    if n < 1 or m < 1:
        raise DomainError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    utilities = rng.random((n, m))
    agents = []
    for _ in range(n):
        valuation, weight = _random_valuation(family, rng, omega)
        agents.append(Agent(valuation=valuation, weight=weight))
    return Instance(agents=tuple(agents), m=m, utilities=utilities)
