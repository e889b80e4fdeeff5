"""
SolveReport - the immutable result of one primal-dual run.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from src.Dual.main import DualState
from src.Instance.main import Allocation


def _json_number(x: float):
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass(frozen=True)
class SolveReport:
    mode: str
    epsilon: float
    allocation: Allocation
    state: DualState
    utilities: Tuple[float, ...]
    primal: float
    dual: float
    scaled_dual: float
    certificate: float
    dual_feasible: bool
    reassignments: int
    slope_updates: Tuple[int, ...]
    targets: Tuple[float, ...]
    ceilings: Tuple[float, ...]
    rho_max: float
    termination: str
    clamped: Tuple[int, ...] = ()
    skipped: Tuple[int, ...] = ()
    saturated: Tuple[int, ...] = ()
    unassigned_items: Tuple[int, ...] = ()
    under_allocation_checks: int = 0
    trace: Tuple[Dict, ...] = ()
    extras: Dict = field(default_factory=dict)

    @property
    def certified_dual(self) -> float:
        """Dual objective the certificate was computed from."""
        return self.scaled_dual if self.dual_feasible else self.dual

    def to_dict(self, include_trace: bool = False) -> Dict:
        out = {
            "mode": self.mode,
            "epsilon": self.epsilon,
            "allocation": self.allocation.to_dict(),
            "utilities": list(self.utilities),
            "primal": self.primal,
            "dual": self.dual,
            "scaled_dual": self.scaled_dual,
            "certificate": _json_number(self.certificate),
            "dual_feasible": self.dual_feasible,
            "counters": {
                "reassignments": self.reassignments,
                "slope_updates": list(self.slope_updates),
                "under_allocation_checks": self.under_allocation_checks,
            },
            "targets": [_json_number(t) for t in self.targets],
            "ceilings": [_json_number(c) for c in self.ceilings],
            "rho_max": _json_number(self.rho_max),
            "clamped": list(self.clamped),
            "skipped": list(self.skipped),
            "saturated": list(self.saturated),
            "unassigned_items": list(self.unassigned_items),
            "termination": self.termination,
            "state": self.state.to_dict(),
        }
        for key, val in self.extras.items():
            out[key] = _json_number(val) if isinstance(val, float) else val
        if include_trace:
            out["trace"] = list(self.trace)
        return out


def trace_lines(trace: List[Dict]) -> List[str]:
    """One JSON object per event, as written by the --trace flag."""
    return [json.dumps(event, sort_keys=False) for event in trace]
