"""
Curvature Module - Local Multiplicative and Additive Curvature

This module handles:
1. The secant slope sigma(z, w) of a valuation over a window of width w
2. Local multiplicative curvature mu = sup v(z+z*) / (v(z) + z* sigma(z, w))
3. Local additive curvature alpha = sup v(z+z*) - (v(z) + z* sigma(z, w))
4. Closed forms (linear, piecewise-linear/budget, smooth-log) and a
   grid + bounded-Brent search for everything else

Every report carries the (z, z*) witness it was computed from, so its value
can be re-derived by plugging the witness back into the expression.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from config import CERTIFICATE_TOL, CURVATURE_GRID, REFINE_XATOL, SUPREMUM_NUDGE
from src.errors import DomainError
from src.Valuations.main import ConcaveValuation, SmoothLog

logger = logging.getLogger(__name__)

MULTIPLICATIVE = "multiplicative"
ADDITIVE = "additive"

_KINDS = {
    "mult": MULTIPLICATIVE,
    "multiplicative": MULTIPLICATIVE,
    "add": ADDITIVE,
    "additive": ADDITIVE,
}


def normalize_kind(kind: str) -> str:
    if kind not in _KINDS:
        raise DomainError(f"curvature kind must be one of {sorted(_KINDS)}, got {kind!r}")
    return _KINDS[kind]


@dataclass(frozen=True)
class CurvatureReport:
    kind: str
    value: float
    witness_z: float
    witness_zstar: float
    width: float
    supremum: bool = False
    method: str = "numeric"

    def witness_value(self, v: ConcaveValuation) -> float:
        return curvature_expression(v, self.kind, self.witness_z, self.witness_zstar, self.width)

    def certify(self, v: ConcaveValuation, tol: float = CERTIFICATE_TOL) -> bool:
        """Re-evaluate the expression at the witness and compare it with the reported value."""
        ev = self.witness_value(v)
        if math.isinf(self.value):
            # unbounded: the expression must keep growing toward the reported endpoint
            farther = curvature_expression(v, self.kind, self.witness_z, 10 * self.witness_zstar, self.width)
            return ev > farther
        return abs(ev - self.value) <= tol * max(1.0, abs(self.value))

    def to_dict(self) -> dict:
        return asdict(self)


def _check_width(w: float) -> None:
    if not (w > 0) or not math.isfinite(w):
        raise DomainError(f"width must be a finite positive number, got {w}")


def _ratio(num, den):
    """num/den with the limit convention 0/0 -> 1 and x/0 -> inf for x > 0."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    return np.where(den <= 0, np.where(num <= 0, 1.0, np.inf), out)


def secant_slope(v: ConcaveValuation, z: float, w: float) -> float:
    """
    Slope of the secant of v over [z, z + w].

    Args:
        v: valuation
        z: left end of the window, >= 0
        w: window width, > 0

    Returns:
        (v(z + w) - v(z)) / w
    """
    _check_width(w)
    return v.secant_slope(z, w)


def curvature_expression(v: ConcaveValuation, kind: str, z: float, zstar: float, w: float) -> float:
    """The mu or alpha expression at a single (z, z*) point."""
    kind = normalize_kind(kind)
    vz = v.value(z)
    lower = vz + zstar * (v.value(z + w) - vz) / w
    upper = v.value(z + zstar)
    if kind == ADDITIVE:
        return upper - lower
    return float(_ratio(upper, lower))


def _grid_values(v: ConcaveValuation, kind: str, z_grid: np.ndarray, s_grid: np.ndarray, w: float) -> np.ndarray:
    vz = v.value(z_grid)
    sigma = (v.value(z_grid + w) - vz) / w
    upper = v.value(z_grid[:, None] + s_grid[None, :])
    lower = vz[:, None] + s_grid[None, :] * sigma[:, None]
    if kind == ADDITIVE:
        return upper - lower
    return _ratio(upper, lower)


def _zstar_grid(w: float) -> np.ndarray:
    inner = np.linspace(0.0, w, CURVATURE_GRID + 1)[1:-1]
    return np.concatenate(([w * SUPREMUM_NUDGE], inner, [w * (1 - SUPREMUM_NUDGE)]))


def _maximize(f: Callable[[float], float], lo: float, hi: float, xatol: float) -> float:
    if hi <= lo:
        return lo
    res = minimize_scalar(lambda x: -f(x), bounds=(lo, hi), method="bounded", options={"xatol": xatol})
    return float(res.x)


def _numeric_search(v: ConcaveValuation, w: float, kind: str, z_min: float, z_max_bound: Optional[float]) -> CurvatureReport:
    z_max = z_max_bound if z_max_bound is not None else z_min + 10.0 * w
    z_max = max(z_max, z_min)
    pieces = [np.linspace(z_min, z_max, CURVATURE_GRID + 1)]
    for b in v.breakpoints():
        pieces.append(np.array([b, b - w / 2, b - w]))
    z_grid = np.unique(np.clip(np.concatenate(pieces), z_min, z_max))
    s_grid = _zstar_grid(w)

    values = _grid_values(v, kind, z_grid, s_grid, w)
    iz, js = np.unravel_index(int(np.argmax(values)), values.shape)
    z, zstar = float(z_grid[iz]), float(s_grid[js])
    best = curvature_expression(v, kind, z, zstar, w)
    xatol = REFINE_XATOL * max(w, 1.0)

    def consider(cz: float, cs: float) -> None:
        nonlocal z, zstar, best
        val = curvature_expression(v, kind, cz, cs, w)
        if val > best:
            z, zstar, best = cz, cs, val

    s_lo, s_hi = float(s_grid[0]), float(s_grid[-1])
    # z* maximal at a nudged end of (0, w): the nudged witness is kept as is
    edge = js == 0 or js == len(s_grid) - 1
    if not edge:
        consider(z, _maximize(lambda s: curvature_expression(v, kind, z, s, w),
                              float(s_grid[js - 1]), float(s_grid[js + 1]), xatol))
    for b in v.breakpoints():
        if s_lo < b - z < s_hi:
            consider(z, b - z)
    consider(_maximize(lambda x: curvature_expression(v, kind, x, zstar, w),
                       float(z_grid[max(iz - 1, 0)]), float(z_grid[min(iz + 1, len(z_grid) - 1)]), xatol), zstar)
    step = w / CURVATURE_GRID
    if not edge:
        consider(z, _maximize(lambda s: curvature_expression(v, kind, z, s, w),
                              max(s_lo, zstar - step), min(s_hi, zstar + step), xatol))

    supremum = zstar <= 2 * w * SUPREMUM_NUDGE or zstar >= w * (1 - 2 * SUPREMUM_NUDGE)
    logger.debug(f"numeric {kind} curvature of {v.family} at w={w:g}: {best:.12g} (z={z:g}, z*={zstar:g})")
    return CurvatureReport(kind=kind, value=float(best), witness_z=z, witness_zstar=zstar,
                           width=w, supremum=supremum, method="numeric")


def _piecewise_closed_form(v: ConcaveValuation, w: float, kind: str) -> Optional[CurvatureReport]:
    """
    Exact curvature for piecewise-linear shapes whose kinks are at least w apart.

    A window of width w then straddles at most one kink x with slopes a > b, and
    the gap is largest with the kink p = min(w/2, x) into the window:
    alpha = (a - b) p (w - p) / w and mu = v(x) / (v(x) - alpha), at z = x - p, z* = p.
    """
    kinks = v.kinks()
    if not kinks:
        return None
    xs = [k[0] for k in kinks]
    if any(b - a < w for a, b in zip(xs, xs[1:])):
        return None
    best = None
    for x, left, right, vx in kinks:
        p = min(w / 2, x)
        alpha = (left - right) * p * (w - p) / w
        val = alpha if kind == ADDITIVE else float(_ratio(vx, vx - alpha))
        if best is None or val > best[0]:
            best = (val, x - p, p)
    return CurvatureReport(kind=kind, value=float(best[0]), witness_z=best[1], witness_zstar=best[2],
                           width=w, supremum=False, method="closed_form")


def _linear_report(kind: str, w: float) -> CurvatureReport:
    return CurvatureReport(kind=kind, value=1.0 if kind == MULTIPLICATIVE else 0.0,
                           witness_z=0.0, witness_zstar=w / 2, width=w, supremum=False, method="exact")


def smooth_log_alpha_closed_form(eta: float, omega: float, width: float = 1.0) -> float:
    """
    Additive curvature of eta * ln(u + omega) over windows of the given width.

    The maximum sits at z = 0; with g = omega / width it equals
    eta * [ln(1 / (g ln(1 + 1/g))) + g ln(1 + 1/g) - 1].
    """
    if not (omega > 0):
        raise DomainError(f"omega must be > 0, got {omega}")
    if not (eta > 0):
        raise DomainError(f"eta must be > 0, got {eta}")
    _check_width(width)
    g = omega / width
    lg = g * math.log1p(1.0 / g)
    return eta * (math.log(1.0 / lg) + lg - 1.0)


def _smooth_log_report(v: SmoothLog, w: float) -> CurvatureReport:
    g = v.omega / w
    zstar = w * (1.0 / math.log1p(1.0 / g) - g)
    return CurvatureReport(kind=ADDITIVE, value=smooth_log_alpha_closed_form(v.eta, v.omega, w),
                           witness_z=0.0, witness_zstar=zstar, width=w, supremum=False, method="closed_form")


def _check_method(method: str) -> None:
    if method not in ("auto", "numeric"):
        raise DomainError(f"method must be 'auto' or 'numeric', got {method!r}")


def mult_curvature(v: ConcaveValuation, w: float, z_max_bound: Optional[float] = None,
                   z_min: float = 0.0, method: str = "auto") -> CurvatureReport:
    """
    Local multiplicative curvature of v for item utilities up to w.

    Args:
        v: non-negative concave valuation
        w: largest item utility (window width)
        z_max_bound: upper end of the z sweep (default z_min + 10 w)
        z_min: lower end of the z sweep
        method: "auto" uses closed forms where they exist, "numeric" always searches

    Returns:
        CurvatureReport with mu >= 1
    """
    _check_width(w)
    _check_method(method)
    if z_min < 0:
        raise DomainError(f"z_min must be >= 0, got {z_min}")
    if v.value(z_min) < 0:
        raise DomainError(f"multiplicative curvature needs a non-negative valuation, {v.family} is negative at {z_min}")
    if v.is_linear():
        return _linear_report(MULTIPLICATIVE, w)
    if z_min == 0 and math.isinf(v.slope(0.0)) and v.value(0.0) == 0:
        # v(z*)/(z* sigma) diverges as z* -> 0
        return CurvatureReport(kind=MULTIPLICATIVE, value=math.inf, witness_z=0.0, witness_zstar=w * SUPREMUM_NUDGE,
                               width=w, supremum=True, method="limit")
    if method == "auto" and z_min == 0:
        closed = _piecewise_closed_form(v, w, MULTIPLICATIVE)
        if closed is not None:
            return closed
    return _numeric_search(v, w, MULTIPLICATIVE, z_min, z_max_bound)


def add_curvature(v: ConcaveValuation, w: float, z_max_bound: Optional[float] = None,
                  z_min: float = 0.0, method: str = "auto") -> CurvatureReport:
    """Local additive curvature of v for item utilities up to w (alpha >= 0)."""
    _check_width(w)
    _check_method(method)
    if z_min < 0:
        raise DomainError(f"z_min must be >= 0, got {z_min}")
    if v.is_linear():
        return _linear_report(ADDITIVE, w)
    if method == "auto" and z_min == 0:
        if isinstance(v, SmoothLog) and v.inner is None:
            return _smooth_log_report(v, w)
        closed = _piecewise_closed_form(v, w, ADDITIVE)
        if closed is not None:
            return closed
    return _numeric_search(v, w, ADDITIVE, z_min, z_max_bound)


def curvature(v: ConcaveValuation, w: float, kind: str, **kwargs) -> CurvatureReport:
    if normalize_kind(kind) == MULTIPLICATIVE:
        return mult_curvature(v, w, **kwargs)
    return add_curvature(v, w, **kwargs)
