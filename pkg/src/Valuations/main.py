"""
Valuations Module - Concave-Additive Valuation Families

This module handles:
1. The ConcaveValuation abstraction (value, right slope, supergradient lines)
2. The concrete families: linear, budget-additive, piecewise-linear, power, smooth-log
3. Inverting slopes into supergradient anchors (SlopePoint)
4. JSON descriptors for every family
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import ClassVar, Dict, List, Optional, Tuple, Union

import numpy as np

from src.errors import DomainError, InstanceValidationError, SlopeRangeError

Number = Union[float, np.ndarray]

# Relative slack when comparing a requested slope against slope(0)
_SLOPE_RTOL = 1e-12


def _as_nonneg_array(u: Number, family: str) -> np.ndarray:
    arr = np.asarray(u, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"{family} valuation is defined on u >= 0, got {u}")
    return arr


def _finish(result: np.ndarray, like: Number) -> Number:
    if np.ndim(like) == 0:
        return float(result)
    return result


@dataclass(frozen=True)
class SlopePoint:
    """A supergradient line y + s*x touching the valuation at x = anchor."""
    slope: float
    anchor: float
    intercept: float

    def line(self, x: Number) -> Number:
        return self.intercept + self.slope * x


class ConcaveValuation(ABC):
    """Monotone concave v: R+ -> R evaluated on the agent's additive utility."""

    family: ClassVar[str] = ""

    def value(self, u: Number) -> Number:
        arr = _as_nonneg_array(u, self.family)
        return _finish(self._value(arr), u)

    def slope(self, u: Number) -> Number:
        """Right derivative; may be inf at 0 for families with unbounded slope."""
        arr = _as_nonneg_array(u, self.family)
        return _finish(self._slope(arr), u)

    def secant_slope(self, z: float, w: float) -> float:
        if w <= 0:
            raise DomainError(f"secant width must be > 0, got {w}")
        return (self.value(z + w) - self.value(z)) / w

    def slope_point_at(self, t: float) -> SlopePoint:
        s = self.slope(t)
        return SlopePoint(slope=s, anchor=float(t), intercept=self.value(t) - t * s)

    def slope_point_from_slope(self, s: float) -> SlopePoint:
        self._check_slope(s)
        t = self._anchor_for_slope(s)
        return SlopePoint(slope=float(s), anchor=float(t), intercept=self.value(t) - t * s)

    def _check_slope(self, s: float) -> None:
        if not (s > 0) or not math.isfinite(s):
            raise SlopeRangeError(f"slope must be a finite positive number, got {s}")
        top = self.slope(0.0)
        if s > top * (1 + _SLOPE_RTOL):
            raise SlopeRangeError(f"slope {s} exceeds the slope at 0 ({top}) of {self.family}")
        if s < self.min_slope():
            raise SlopeRangeError(f"slope {s} is below the asymptotic slope {self.min_slope()} of {self.family}")

    def is_linear(self) -> bool:
        return False

    def breakpoints(self) -> Tuple[float, ...]:
        """Points where the slope jumps (empty for smooth families)."""
        return ()

    def kinks(self) -> Optional[List[Tuple[float, float, float, float]]]:
        """(x, left slope, right slope, v(x)) for piecewise-linear families, else None."""
        return None

    @abstractmethod
    def _value(self, u: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _slope(self, u: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _anchor_for_slope(self, s: float) -> float: ...

    @abstractmethod
    def min_slope(self) -> float: ...

    @abstractmethod
    def to_dict(self) -> Dict: ...


@dataclass(frozen=True)
class Linear(ConcaveValuation):
    family: ClassVar[str] = "linear"
    a: float = 1.0

    def __post_init__(self):
        if not (self.a >= 0) or not math.isfinite(self.a):
            raise DomainError(f"linear slope must be >= 0, got {self.a}")

    def _value(self, u):
        return self.a * u

    def _slope(self, u):
        return np.full_like(u, self.a)

    def _anchor_for_slope(self, s):
        return 0.0

    def min_slope(self):
        return self.a

    def is_linear(self):
        return True

    def to_dict(self):
        return {"family": self.family, "slope": self.a}


@dataclass(frozen=True)
class PiecewiseLinear(ConcaveValuation):
    """
    Concave piecewise-linear function with v(0) = 0.

    points[k] is where segment k starts (points[0] = 0); slopes[k] is its slope.
    The last segment extends to infinity.
    """
    family: ClassVar[str] = "piecewise"
    points: Tuple[float, ...] = (0.0,)
    slopes: Tuple[float, ...] = (1.0,)
    _values: Tuple[float, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        points = tuple(float(x) for x in self.points)
        slopes = tuple(float(s) for s in self.slopes)
        if len(points) == 0 or len(points) != len(slopes):
            raise DomainError(f"piecewise needs one slope per segment start, got {len(points)} points and {len(slopes)} slopes")
        if points[0] != 0.0:
            raise DomainError(f"first transition point must be 0, got {points[0]}")
        if any(b <= a for a, b in zip(points, points[1:])):
            raise DomainError(f"transition points must be strictly increasing: {points}")
        if any(b >= a for a, b in zip(slopes, slopes[1:])):
            raise DomainError(f"segment slopes must be strictly decreasing: {slopes}")
        if slopes[-1] < 0 or not all(math.isfinite(s) for s in slopes):
            raise DomainError(f"segment slopes must be finite and >= 0: {slopes}")
        values = [0.0]
        for k in range(1, len(points)):
            values.append(values[-1] + slopes[k - 1] * (points[k] - points[k - 1]))
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "slopes", slopes)
        object.__setattr__(self, "_values", tuple(values))

    def _segment(self, u):
        return np.searchsorted(np.asarray(self.points), u, side="right") - 1

    def _value(self, u):
        idx = self._segment(u)
        pts, vals, sl = np.asarray(self.points), np.asarray(self._values), np.asarray(self.slopes)
        return vals[idx] + sl[idx] * (u - pts[idx])

    def _slope(self, u):
        return np.asarray(self.slopes)[self._segment(u)]

    def _anchor_for_slope(self, s):
        # a slope equal to a segment slope anchors at that segment's left end,
        # a slope strictly between two segment slopes anchors at their kink
        k = sum(1 for slope in self.slopes if slope > s)
        return self.points[k]

    def min_slope(self):
        return self.slopes[-1]

    def is_linear(self):
        return len(self.slopes) == 1

    def min_segment_length(self) -> float:
        gaps = [b - a for a, b in zip(self.points, self.points[1:])]
        return min(gaps) if gaps else math.inf

    def breakpoints(self):
        return self.points[1:]

    def kinks(self):
        return [
            (self.points[k], self.slopes[k - 1], self.slopes[k], self._values[k])
            for k in range(1, len(self.points))
        ]

    def to_dict(self):
        return {"family": self.family, "points": list(self.points), "slopes": list(self.slopes)}


@dataclass(frozen=True)
class BudgetAdditive(ConcaveValuation):
    family: ClassVar[str] = "budget"
    cap: float = 1.0

    def __post_init__(self):
        if not (self.cap > 0) or not math.isfinite(self.cap):
            raise DomainError(f"budget cap must be > 0, got {self.cap}")

    def _value(self, u):
        return np.minimum(u, self.cap)

    def _slope(self, u):
        return np.where(u < self.cap, 1.0, 0.0)

    def _anchor_for_slope(self, s):
        return 0.0 if s >= 1.0 else self.cap

    def min_slope(self):
        return 0.0

    def breakpoints(self):
        return (self.cap,)

    def kinks(self):
        return [(self.cap, 1.0, 0.0, self.cap)]

    def as_piecewise(self) -> PiecewiseLinear:
        return PiecewiseLinear(points=(0.0, self.cap), slopes=(1.0, 0.0))

    def to_dict(self):
        return {"family": self.family, "cap": self.cap}


@dataclass(frozen=True)
class Power(ConcaveValuation):
    family: ClassVar[str] = "power"
    exponent: float = 0.5

    def __post_init__(self):
        if not (0 < self.exponent <= 1):
            raise DomainError(f"power exponent must lie in (0, 1], got {self.exponent}")

    def _value(self, u):
        return u ** self.exponent

    def _slope(self, u):
        if self.exponent == 1.0:
            return np.ones_like(u)
        with np.errstate(divide="ignore"):
            return self.exponent * u ** (self.exponent - 1.0)

    def _anchor_for_slope(self, s):
        if self.exponent == 1.0:
            return 0.0
        return (s / self.exponent) ** (1.0 / (self.exponent - 1.0))

    def min_slope(self):
        return 1.0 if self.exponent == 1.0 else 0.0

    def is_linear(self):
        return self.exponent == 1.0

    def to_dict(self):
        return {"family": self.family, "exponent": self.exponent}


@dataclass(frozen=True)
class SmoothLog(ConcaveValuation):
    """v(u) = eta * ln(f(u + omega)), f the identity or a nested piecewise-linear function."""
    family: ClassVar[str] = "smooth_log"
    eta: float = 1.0
    omega: float = 1.0
    inner: Optional[PiecewiseLinear] = None

    def __post_init__(self):
        if not (self.eta > 0) or not math.isfinite(self.eta):
            raise DomainError(f"smooth_log weight eta must be > 0, got {self.eta}")
        if not (0 < self.omega <= 1):
            raise DomainError(f"smooth_log omega must lie in (0, 1], got {self.omega}")
        if self.inner is not None and self.inner.slopes[0] <= 0:
            raise DomainError("inner piecewise function must start with a positive slope")

    def _f(self, x):
        return x if self.inner is None else self.inner._value(x)

    def _fprime(self, x):
        return np.ones_like(x) if self.inner is None else self.inner._slope(x)

    def _value(self, u):
        return self.eta * np.log(self._f(u + self.omega))

    def _slope(self, u):
        x = u + self.omega
        return self.eta * self._fprime(x) / self._f(x)

    def _anchor_for_slope(self, s):
        if self.inner is None:
            return max(self.eta / s - self.omega, 0.0)
        return self._inner_anchor(s) - self.omega

    def _inner_anchor(self, s: float) -> float:
        # walk the pieces of f to the right of omega; g'(x) = eta*a_k/f(x) decreases along each piece
        inner = self.inner
        ends = list(inner.points[1:]) + [math.inf]
        for start, end, a in zip(inner.points, ends, inner.slopes):
            if end <= self.omega:
                continue
            lo = max(start, self.omega)
            f_lo = float(inner._value(np.asarray(lo)))
            if s >= self.eta * a / f_lo:
                return lo
            if a == 0:
                continue
            x = lo + self.eta / s - f_lo / a
            if x < end:
                return x
        raise SlopeRangeError(f"slope {s} is not attained by {self.family}")

    def min_slope(self):
        return 0.0

    def breakpoints(self):
        if self.inner is None:
            return ()
        return tuple(x - self.omega for x in self.inner.points[1:] if x > self.omega)

    def to_dict(self):
        out = {"family": self.family, "eta": self.eta, "omega": self.omega}
        if self.inner is not None:
            out["inner"] = self.inner.to_dict()
        return out


def _number(d: dict, key: str, path: str) -> float:
    if key not in d:
        raise InstanceValidationError(f"{path}.{key}", "missing field")
    x = d[key]
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise InstanceValidationError(f"{path}.{key}", f"expected a finite number, got {x!r}")
    return float(x)


def _numbers(d: dict, key: str, path: str) -> Tuple[float, ...]:
    if key not in d or not isinstance(d[key], list):
        raise InstanceValidationError(f"{path}.{key}", "expected a list of numbers")
    out = []
    for k, x in enumerate(d[key]):
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise InstanceValidationError(f"{path}.{key}[{k}]", f"expected a finite number, got {x!r}")
        out.append(float(x))
    return tuple(out)


def valuation_from_dict(d: dict, path: str = "valuation") -> ConcaveValuation:
    """
    Build a valuation from its JSON descriptor.

    Args:
        d: descriptor such as {"family": "budget", "cap": 2}
        path: field path used in error messages

    Returns:
        The matching ConcaveValuation
    """
    if not isinstance(d, dict):
        raise InstanceValidationError(path, f"expected an object, got {type(d).__name__}")
    family = d.get("family")
    try:
        if family == "linear":
            return Linear(a=_number(d, "slope", path))
        if family == "budget":
            return BudgetAdditive(cap=_number(d, "cap", path))
        if family == "piecewise":
            return PiecewiseLinear(points=_numbers(d, "points", path), slopes=_numbers(d, "slopes", path))
        if family == "power":
            return Power(exponent=_number(d, "exponent", path))
        if family == "smooth_log":
            inner = None
            if d.get("inner") is not None:
                inner = valuation_from_dict(d["inner"], f"{path}.inner")
                if not isinstance(inner, PiecewiseLinear):
                    raise InstanceValidationError(f"{path}.inner", "nested function must be piecewise")
            return SmoothLog(eta=_number(d, "eta", path), omega=_number(d, "omega", path), inner=inner)
    except DomainError as e:
        raise InstanceValidationError(path, str(e)) from e
    raise InstanceValidationError(f"{path}.family", f"unknown valuation family {family!r}")


def value(v: ConcaveValuation, u: Number) -> Number:
    return v.value(u)


def slope_point_from_slope(v: ConcaveValuation, s: float) -> SlopePoint:
    return v.slope_point_from_slope(s)


def tangent_line_value(sp: SlopePoint, x: Number) -> Number:
    return sp.line(x)
