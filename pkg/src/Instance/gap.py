"""
Integrality-gap instances.

gamma agents share one valuation v. beta public items are worth u to everyone;
each agent also owns private items (floor(z/u) of utility u plus a remainder)
summing to z. With beta/gamma ~ z*/u the fractional optimum spreads the public
items evenly (everyone reaches t* = z + z*) while any integral allocation leaves
gamma - beta agents at z, so the ratio approaches the curvature mu(v, u).
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

import numpy as np

from config import MAX_DENOMINATOR
from src.Curvature.main import mult_curvature
from src.errors import GapConstructionError
from src.Instance.main import Agent, Instance
from src.Valuations.main import ConcaveValuation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GapInstanceSpec:
    valuation: ConcaveValuation
    u: float
    beta: int
    gamma: int
    z: float
    zstar: float
    zstar_eff: float
    t_star: float
    mu: float

    @property
    def full_private_items(self) -> int:
        return int(math.floor(self.z / self.u))

    @property
    def remainder(self) -> float:
        r = self.z - self.full_private_items * self.u
        return 0.0 if r <= self.u * 1e-12 else r

    @property
    def private_items_per_agent(self) -> int:
        return self.full_private_items + (1 if self.remainder > 0 else 0)

    @property
    def item_count(self) -> int:
        return self.beta + self.gamma * self.private_items_per_agent

    def opt_fractional(self) -> float:
        """gamma * v(t*): every agent spends z privately plus u*beta/gamma on public items."""
        return self.gamma * self.valuation.value(self.t_star)

    def opt_integral(self) -> float:
        """beta agents get one public item each; the rest keep only their private items."""
        v = self.valuation
        return self.beta * v.value(self.z + self.u) + (self.gamma - self.beta) * v.value(self.z)

    def ratio(self) -> float:
        return self.opt_fractional() / self.opt_integral()

    def to_dict(self) -> Dict:
        return {
            "valuation": self.valuation.to_dict(),
            "u": self.u,
            "beta": self.beta,
            "gamma": self.gamma,
            "z": self.z,
            "zstar": self.zstar,
            "zstar_eff": self.zstar_eff,
            "t_star": self.t_star,
            "mu": self.mu,
            "items": self.item_count,
            "opt_fractional": self.opt_fractional(),
            "opt_integral": self.opt_integral(),
            "ratio": self.ratio(),
        }


def _approximate(x: float, max_denominator: int) -> Fraction:
    frac = Fraction(x).limit_denominator(max_denominator)
    # beta must stay in [1, gamma - 1]: a fraction of 0 or 1 has no public/private split
    if frac <= 0:
        frac = Fraction(1, max_denominator)
    elif frac >= 1:
        frac = Fraction(max_denominator - 1, max_denominator)
    return frac


def build_gap_instance(spec: GapInstanceSpec) -> Instance:
    """Materialize the instance described by a GapInstanceSpec: public items first, then each agent's private items."""
    columns = [np.full(spec.gamma, spec.u) for _ in range(spec.beta)]
    private = [spec.u] * spec.full_private_items
    if spec.remainder > 0:
        private.append(spec.remainder)
    for i in range(spec.gamma):
        for utility in private:
            col = np.zeros(spec.gamma)
            col[i] = utility
            columns.append(col)
    utilities = np.column_stack(columns) if columns else np.zeros((spec.gamma, 0))
    agents = tuple(Agent(valuation=spec.valuation, weight=1.0) for _ in range(spec.gamma))
    return Instance(agents=agents, m=len(columns), utilities=utilities)


def gen_gap_instance(v: ConcaveValuation, u: float, max_denominator: int = MAX_DENOMINATOR,
                     tolerance: Optional[float] = None) -> Tuple[Instance, GapInstanceSpec]:
    """
    Build the integrality-gap instance for valuation v and max utility u.

    Args:
        v: valuation shared by every agent
        u: utility of every public item (the instance's max utility)
        max_denominator: bound on gamma when approximating z*/u
        tolerance: allowed |beta/gamma - z*/u| (default 1/max_denominator)

    Returns:
        (instance, spec)
    """
    report = mult_curvature(v, u)
    if report.value <= 1.0:
        raise GapConstructionError(f"mu = 1 for {v.family} at width {u}: the valuation has no integrality gap")
    if math.isinf(report.value):
        raise GapConstructionError(f"mu is unbounded for {v.family} at width {u}: no finite gap instance exists")
    if max_denominator < 2:
        raise GapConstructionError(f"max_denominator must be >= 2, got {max_denominator}")

    target = report.witness_zstar / u
    frac = _approximate(target, max_denominator)
    tolerance = 1.0 / max_denominator if tolerance is None else tolerance
    if abs(float(frac) - target) > tolerance:
        raise GapConstructionError(
            f"best fraction {frac} is {abs(float(frac) - target):.3g} away from z*/u = {target:.6g} (tolerance {tolerance:g})"
        )
    zstar_eff = u * frac.numerator / frac.denominator
    spec = GapInstanceSpec(
        valuation=v,
        u=float(u),
        beta=frac.numerator,
        gamma=frac.denominator,
        z=report.witness_z,
        zstar=report.witness_zstar,
        zstar_eff=zstar_eff,
        t_star=report.witness_z + zstar_eff,
        mu=report.value,
    )
    instance = build_gap_instance(spec)
    logger.info(f"gap instance: gamma={spec.gamma}, beta={spec.beta}, items={instance.m}, mu={spec.mu:.6g}")
    return instance, spec
