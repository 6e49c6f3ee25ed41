"""Budget-constrained water-level solvers.

A demand curve maps the water level ``mu`` (the multiplier of the relay's
total power constraint) to the power a user wants at that price. Curves are
continuous and nonincreasing in ``mu`` and vanish for ``mu >= zero_threshold``.
The solver finds the ``mu`` at which total demand meets the budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

MAX_ITER = 200
_BRACKET_SHRINK = 1e-18


@dataclass(frozen=True)
class DemandCurve:
    demand: Callable[[float], float]
    zero_threshold: float
    cap: float = math.inf

    def __call__(self, mu: float) -> float:
        if self.zero_threshold <= 0 or mu >= self.zero_threshold:
            return 0.0
        return min(max(self.demand(mu), 0.0), self.cap)


@dataclass(frozen=True)
class WaterLevelSolution:
    mu: float
    powers: list[float]
    slack: float

    @property
    def water_height(self) -> float:
        return math.inf if self.mu == 0 else 1.0 / self.mu


def _check_budget(budget: float) -> float:
    budget = float(budget)
    if not math.isfinite(budget) or budget < 0:
        raise ValueError(f"budget must be finite and >= 0, got {budget!r}")
    return budget


def _check_monotone(curves: Sequence[DemandCurve], mu_top: float) -> None:
    grid = np.geomspace(mu_top * 1e-8, mu_top, 16)
    for k, curve in enumerate(curves):
        values = [curve(m) for m in grid]
        for lo, hi in zip(values, values[1:]):
            if hi > lo * (1 + 1e-9) + 1e-12:
                raise ValueError(f"demand curve {k} is not nonincreasing in mu")


def solve_water_level(
    curves: Sequence[DemandCurve], budget: float, rel_tol: float = 1e-9
) -> WaterLevelSolution:
    """Find the water level at which total demand equals ``budget``.

    When every curve saturates (reaches its cap) before the budget is spent,
    the budget constraint is inactive: ``mu = 0`` and the remainder is
    reported as ``slack``.
    """
    budget = _check_budget(budget)
    if not curves:
        raise ValueError("no demand curves")
    if not 0 < rel_tol <= 1e-3:
        raise ValueError("rel_tol must lie in (0, 1e-3]")

    n = len(curves)
    live = [c.zero_threshold for c in curves if c.zero_threshold > 0]
    if not live:
        return WaterLevelSolution(0.0, [0.0] * n, budget)
    mu_top = max(live)
    if not math.isfinite(mu_top):
        raise ValueError("zero_threshold must be finite")
    _check_monotone(curves, mu_top)

    if budget == 0:
        return WaterLevelSolution(mu_top, [0.0] * n, 0.0)

    def demand(mu: float) -> np.ndarray:
        return np.array([c(mu) for c in curves])

    saturated = demand(mu_top * 1e-280)
    if saturated.sum() <= budget:
        return WaterLevelSolution(0.0, saturated.tolist(), float(budget - saturated.sum()))

    hi = (1 + 1e-12) * mu_top
    lo = hi * _BRACKET_SHRINK
    p_lo = demand(lo)
    while p_lo.sum() < budget:
        lo *= 0.5
        if lo == 0:
            raise RuntimeError("could not bracket the water level")
        p_lo = demand(lo)
    p_hi = demand(hi)

    for _ in range(MAX_ITER):
        mid = math.sqrt(lo * hi) if hi > 2 * lo else 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        p_mid = demand(mid)
        if p_mid.sum() >= budget:
            lo, p_lo = mid, p_mid
        else:
            hi, p_hi = mid, p_mid

    # Blend the bracket ends so the budget is met exactly; each power stays
    # between its two bracket values.
    t_lo, t_hi = p_lo.sum(), p_hi.sum()
    w = 0.0 if t_lo == t_hi else (budget - t_hi) / (t_lo - t_hi)
    powers = np.clip(w * p_lo + (1 - w) * p_hi, 0.0, None)
    gap = abs(powers.sum() - budget)
    if gap > rel_tol * max(budget, 1.0):
        raise RuntimeError(f"water level did not converge (gap {gap:.3g})")
    mu = hi if w == 0 else lo + (hi - lo) * (1 - w)
    return WaterLevelSolution(float(mu), powers.tolist(), max(float(budget - powers.sum()), 0.0))


def linear_curve(base: float, cap: float = math.inf, gain: float = 1.0) -> DemandCurve:
    """Curve ``min((gain/mu - base)^+, cap)``: a water-fill over a floor."""
    if gain <= 0 or not math.isfinite(base) or cap <= 0:
        return DemandCurve(lambda mu: 0.0, 0.0, 0.0)
    threshold = gain / base if base > 0 else math.inf
    return DemandCurve(lambda mu: gain / mu - base, threshold, cap)


def bounded_waterfill(
    bases: Sequence[float],
    caps: Sequence[float],
    budget: float,
    gains: Sequence[float] | None = None,
) -> WaterLevelSolution:
    """Water-fill with a floor and a ceiling per user, solved exactly.

    User ``i`` receives ``clip(gain_i * h - base_i, 0, cap_i)`` at water
    height ``h = 1/mu``. Total demand is piecewise linear in ``h``, so the
    level is found by scanning the sorted breakpoints.
    """
    budget = _check_budget(budget)
    n = len(bases)
    if n == 0:
        raise ValueError("no users")
    gains = [1.0] * n if gains is None else list(gains)
    if len(caps) != n or len(gains) != n:
        raise ValueError("bases, caps and gains must be aligned")
    b = np.asarray(bases, dtype=float)
    c = np.asarray(caps, dtype=float)
    g = np.asarray(gains, dtype=float)
    if np.any(b < 0) or np.any(c < 0) or np.any(g < 0):
        raise ValueError("bases, caps and gains must be >= 0")

    live = (g > 0) & np.isfinite(b) & (c > 0)
    c = np.where(live, c, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        thresholds = np.where(live, np.where(b > 0, g / np.where(b > 0, b, 1.0), math.inf), 0.0)
    mu_top = float(thresholds.max()) if live.any() else 0.0

    if not live.any():
        return WaterLevelSolution(0.0, [0.0] * n, budget)
    if budget == 0:
        return WaterLevelSolution(mu_top, [0.0] * n, 0.0)
    if c.sum() <= budget:
        return WaterLevelSolution(0.0, c.tolist(), float(budget - c.sum()))

    gl = np.where(live, g, 1.0)
    bl = np.where(live, b, 0.0)

    def alloc(h: float) -> np.ndarray:
        return np.where(live, np.clip(gl * h - bl, 0.0, c), 0.0)

    knots = np.unique(np.concatenate([(bl / gl)[live], ((bl + c) / gl)[live]]))
    totals = np.array([alloc(h).sum() for h in knots])
    # totals[0] == 0 < budget <= totals[-1], so 1 <= k < len(knots).
    k = int(np.searchsorted(totals, budget, side="left"))
    h_prev, t_prev = knots[k - 1], totals[k - 1]
    # Between consecutive knots the active users' demands grow at rate gain.
    mid = 0.5 * (h_prev + knots[k])
    active = live & (gl * mid - bl > 0) & (gl * mid - bl < c)
    slope = gl[active].sum()
    # A flat segment means rounding put the budget just past t_prev.
    h = h_prev + (budget - t_prev) / slope if slope > 0 else h_prev
    powers = alloc(h)
    return WaterLevelSolution(float(1.0 / h), powers.tolist(), max(float(budget - powers.sum()), 0.0))
