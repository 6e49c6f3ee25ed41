"""Brute-force checks for the allocators.

``grid_maximize`` searches the power simplex directly and ``kkt_check``
certifies an allocation from finite-difference marginal rates. Neither uses
the water-level machinery, so they check the optimisation independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np

from .allocators import ZERO_TOL, Allocation, df_cap
from .model import RelayGroup, Strategy, UserId, user_capacity

MAX_GRID_USERS = 4
DEFAULT_RESOLUTION = {1: 1000, 2: 1000, 3: 200, 4: 100}
_EPS = np.finfo(float).eps


@dataclass
class OracleReport:
    best_powers: list[float]
    best_sum_capacity: float
    grid_resolution: int = 0
    refined: bool = False
    kkt_violations: list[tuple[UserId, str]] = field(default_factory=list)
    grid_sum_capacity: float = math.nan

    @property
    def ok(self) -> bool:
        return not self.kkt_violations


@lru_cache(maxsize=16)
def _compositions(n: int, resolution: int) -> np.ndarray:
    """All nonnegative integer ``n``-vectors summing to ``resolution``.

    Capacities never decrease with relay power, so the budget face of the
    simplex holds a maximiser; points strictly inside are dominated.
    """
    if n == 1:
        return np.array([[resolution]])
    axes = np.indices((resolution + 1,) * (n - 1)).reshape(n - 1, -1).T
    head = axes[axes.sum(axis=1) <= resolution]
    last = resolution - head.sum(axis=1, keepdims=True)
    return np.hstack([head, last])


def _objective(group: RelayGroup, strategies, prefactor: float):
    users = [(u.link, Strategy(strategies[u.id])) for u in group.users]

    def total(powers) -> float:
        return float(sum(user_capacity(link, p, s, prefactor) for (link, s), p in zip(users, powers)))

    return users, total


def grid_maximize(
    group: RelayGroup,
    assignment: Mapping[UserId, Strategy],
    budget: float | None = None,
    resolution: int | None = None,
    prefactor: float = 0.5,
) -> OracleReport:
    n = len(group.users)
    if n > MAX_GRID_USERS:
        raise ValueError(f"grid search supports at most {MAX_GRID_USERS} users, got {n}")
    budget = group.total_power if budget is None else float(budget)
    if budget < 0:
        raise ValueError("budget must be >= 0")
    resolution = DEFAULT_RESOLUTION[n] if resolution is None else int(resolution)
    if resolution < 100:
        raise ValueError("resolution must be >= 100")
    users, total = _objective(group, assignment, prefactor)

    if budget == 0:
        zero = [0.0] * n
        value = total(zero)
        return OracleReport(zero, value, resolution, False, grid_sum_capacity=value)

    grid = _compositions(n, resolution) * (budget / resolution)
    values = np.zeros(len(grid))
    for k, (link, s) in enumerate(users):
        values = values + user_capacity(link, grid[:, k], s, prefactor)
    best_idx = int(np.argmax(values))
    powers = grid[best_idx].astype(float).copy()
    grid_value = float(values[best_idx])

    # Pairwise transfers keep the total fixed; halve the step on a dry pass.
    best = total(powers)
    step = budget / resolution
    floor = 1e-10 * budget
    while step >= floor:
        improved = False
        for i in range(n):
            for j in range(n):
                if i == j or powers[j] <= 0:
                    continue
                delta = min(step, powers[j])
                trial = powers.copy()
                trial[i] += delta
                trial[j] -= delta
                value = total(trial)
                if value > best:
                    powers, best, improved = trial, value, True
        if not improved:
            step *= 0.5
    return OracleReport(powers.tolist(), best, resolution, True, grid_sum_capacity=grid_value)


def kkt_check(
    group: RelayGroup,
    allocation: Allocation,
    fd_step: float | None = None,
    rtol: float = 1e-6,
) -> OracleReport:
    """Certify feasibility and first-order optimality of ``allocation``.

    Concavity makes one-sided differences bracket the true marginal rate,
    so the test "no user's right-hand marginal exceeds another user's
    left-hand marginal" holds exactly at an optimum for any step size.
    """
    budget = float(allocation.budget)
    prefactor = allocation.prefactor
    ids = group.user_ids
    p = np.array([allocation.powers[i] for i in ids], dtype=float)
    strategies = {i: Strategy(allocation.user_strategy[i]) for i in ids}
    users, _ = _objective(group, strategies, prefactor)
    report = OracleReport(p.tolist(), allocation.sum_capacity)
    bad = report.kkt_violations

    caps = []
    for (link, s) in users:
        if s is Strategy.DIRECT or (s.is_df and not link.df_eligible):
            caps.append(0.0)
        elif s.is_df:
            caps.append(df_cap(link, s))
        else:
            caps.append(math.inf)
    caps = np.array(caps)

    budget_tol = 1e-9 * max(budget, 1.0)
    if np.any(p < 0):
        bad.append((None, "negative power"))
    if p.sum() > budget + budget_tol:
        bad.append((None, f"total power {p.sum():.12g} exceeds budget {budget:.12g}"))
    for uid, pi, ci in zip(ids, p, caps):
        if pi > ci + 1e-9 * max(ci, 1.0):
            bad.append((uid, f"power {pi:.12g} above ceiling {ci:.12g}"))
    if budget == 0:
        return report

    h = 1e-6 * budget if fd_step is None else float(fd_step)
    if not 0 < h <= 1e-2 * budget:
        raise ValueError("fd_step must lie in (0, 1e-2 * budget]")

    def f(k: int, x: float) -> float:
        link, s = users[k]
        return user_capacity(link, max(x, 0.0), s, prefactor)

    n = len(ids)
    values = np.array([f(k, p[k]) for k in range(n)])
    right = np.array([(f(k, p[k] + h) - values[k]) / h for k in range(n)])
    left = np.full(n, math.inf)
    steps = np.full(n, h)
    for k in range(n):
        if p[k] > ZERO_TOL:
            steps[k] = min(h, p[k])
            left[k] = (values[k] - f(k, p[k] - steps[k])) / steps[k]
    noise = 64 * _EPS * (np.abs(values).max() + prefactor) / steps

    slack = budget - p.sum()
    if slack > budget_tol:
        for k in range(n):
            if right[k] > noise[k]:
                bad.append((ids[k], f"budget slack {slack:.3g} left while marginal rate is {right[k]:.6g}"))
    else:
        for k in range(n):
            others = [j for j in range(n) if j != k and math.isfinite(left[j])]
            if not others:
                continue
            j = min(others, key=lambda m: left[m])
            if right[k] > left[j] * (1 + rtol) + noise[k] + noise[j]:
                state = "zero-power" if p[k] <= ZERO_TOL else "relayed"
                bad.append(
                    (ids[k], f"{state} user marginal {right[k]:.9g} exceeds user {ids[j]!r} marginal {left[j]:.9g}")
                )

    # Equal marginal rates among comfortably interior users (central differences).
    central = {}
    for k in range(n):
        hk = min(h, 0.5 * p[k], 0.5 * (caps[k] - p[k]))
        if hk >= 0.25 * h:
            central[k] = (f(k, p[k] + hk) - f(k, p[k] - hk)) / (2 * hk)
    if len(central) >= 2:
        ref = float(np.median(list(central.values())))
        for k, d in central.items():
            if abs(d - ref) > rtol * abs(ref) + 2 * noise[k]:
                bad.append((ids[k], f"interior marginal {d:.9g} differs from common rate {ref:.9g}"))
    return report
