"""Solve every relay of a scenario and sweep the relay power budget."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .allocators import Allocation, allocate
from .hybrid import HybridResult, exhaustive_hybrid, norss
from .model import Scenario, Strategy

MODES = ("direct", "rdf", "ndf", "af", "cf", "hybrid-norss", "hybrid-exhaustive")
_PURE = {
    "direct": Strategy.DIRECT,
    "rdf": Strategy.RDF,
    "ndf": Strategy.NDF,
    "af": Strategy.AF,
    "cf": Strategy.CF,
}


@dataclass(frozen=True)
class NetworkSolution:
    mode: str
    allocations: dict
    hybrid: dict = field(default_factory=dict)
    budget: float | None = None

    @property
    def sum_capacity(self) -> float:
        return float(sum(a.sum_capacity for a in self.allocations.values()))

    def labels(self) -> dict:
        """``STRATEGY:Class`` per user, across all relays."""
        out = {}
        for alloc in self.allocations.values():
            for uid in alloc.powers:
                out[uid] = f"{Strategy(alloc.user_strategy[uid]).value}:{alloc.classes[uid].value}"
        return out

    def powers(self) -> dict:
        return {uid: p for a in self.allocations.values() for uid, p in a.powers.items()}

    def user_capacities(self) -> dict:
        return {uid: c for a in self.allocations.values() for uid, c in a.user_capacity.items()}


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    return mode


def solve_network(scenario: Scenario, mode: str, budget: float | None = None) -> NetworkSolution:
    """Solve each relay independently; orthogonal channels make the sum separable."""
    check_mode(mode)
    prefactor = scenario.prefactor
    allocations: dict = {}
    hybrid: dict = {}
    for relay in scenario.relays:
        group = relay if budget is None else relay.with_budget(budget)
        if mode in _PURE:
            allocations[relay.id] = allocate(group, _PURE[mode], prefactor)
            continue
        result: HybridResult = (norss if mode == "hybrid-norss" else exhaustive_hybrid)(group, prefactor)
        hybrid[relay.id] = result
        allocations[relay.id] = result.allocation
    return NetworkSolution(mode, allocations, hybrid, budget)


def scenario_fingerprint(scenario: Scenario) -> str:
    payload = {
        "user_count": scenario.user_count,
        "relays": [
            {
                "id": r.id,
                "total_power": repr(r.total_power),
                "users": [
                    [u.id, repr(u.link.direct_snr), repr(u.link.source_relay_snr), repr(u.link.relay_dest_gain)]
                    for u in r.users
                ],
            }
            for r in scenario.relays
        ],
    }
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class SweepResult:
    budgets: list
    modes: list
    series: dict
    fingerprint: str
    spacing: str = "linear"
    scenario_name: str = ""

    def sum_capacity(self, mode: str) -> np.ndarray:
        return np.array([s.sum_capacity for s in self.series[mode]])


def budget_grid(budget_min: float, budget_max: float, points: int, spacing: str = "linear") -> list[float]:
    if spacing not in ("linear", "log"):
        raise ValueError("spacing must be 'linear' or 'log'")
    if points < 1:
        raise ValueError("points must be >= 1")
    if budget_min < 0:
        raise ValueError("budget_min must be >= 0")
    if points == 1:
        return [float(budget_min)]
    if not budget_max > budget_min:
        raise ValueError("budget_max must exceed budget_min when points >= 2")
    if spacing == "log":
        if budget_min <= 0:
            raise ValueError("log spacing needs budget_min > 0")
        return np.geomspace(budget_min, budget_max, points).tolist()
    return np.linspace(budget_min, budget_max, points).tolist()


def sweep(
    scenario: Scenario,
    modes,
    budget_min: float,
    budget_max: float,
    points: int,
    spacing: str = "linear",
) -> SweepResult:
    modes = [check_mode(m) for m in modes]
    if not modes:
        raise ValueError("no modes to sweep")
    budgets = budget_grid(budget_min, budget_max, points, spacing)
    series = {m: [solve_network(scenario, m, b) for b in budgets] for m in modes}
    return SweepResult(budgets, modes, series, scenario_fingerprint(scenario), spacing, scenario.name)
