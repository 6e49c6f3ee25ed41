"""Hybrid NDF/CF relaying: per-user strategy selection with shared power.

For a fixed split of users into NDF and CF sets the problem is concave and
solved with one water level. Choosing the split is combinatorial;
:func:`norss` is the greedy cheapest-switch heuristic and
:func:`exhaustive_hybrid` enumerates every admissible split.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .allocators import (
    CAP_RTOL,
    Allocation,
    build_allocation,
    demand_curve,
)
from .model import LinkBudget, RelayGroup, Strategy, UserId, derive
from .waterfill import solve_water_level

SWITCH_GAIN_TOL = 1e-12
MAX_EXHAUSTIVE_USERS = 20


@dataclass(frozen=True)
class Partition:
    ndf_set: frozenset
    cf_set: frozenset

    @classmethod
    def of(cls, ndf=(), cf=()) -> "Partition":
        return cls(frozenset(ndf), frozenset(cf))

    def validate(self, group: RelayGroup, strict: bool = False) -> None:
        ids = set(group.user_ids)
        if self.ndf_set & self.cf_set:
            raise ValueError("partition sets overlap")
        if (self.ndf_set | self.cf_set) != ids:
            raise ValueError("partition does not cover the relay's users")
        if strict:
            forced = {u.id for u in group.users if not u.link.df_eligible}
            if forced & self.ndf_set:
                raise ValueError("DF-ineligible users must be relayed with CF")

    def strategy_of(self, user_id: UserId) -> Strategy:
        return Strategy.NDF if user_id in self.ndf_set else Strategy.CF


@dataclass(frozen=True)
class NorssStep:
    step: str
    partition: Partition
    sum_capacity: float
    user: UserId | None = None
    accepted: bool | None = None


@dataclass(frozen=True)
class HybridResult:
    partition: Partition
    allocation: Allocation
    trace: tuple = ()
    ndf_strict: frozenset = frozenset()
    cf_strict: frozenset = frozenset()
    initial_allocation: Allocation | None = None
    evaluated: int = 0

    @property
    def sum_capacity(self) -> float:
        return self.allocation.sum_capacity


def _id_key(user_id):
    return (0, user_id, "") if isinstance(user_id, (int, float)) else (1, 0, str(user_id))


def allocate_partition(group: RelayGroup, partition: Partition, prefactor: float) -> Allocation:
    partition.validate(group)
    strategies = {u.id: partition.strategy_of(u.id) for u in group.users}
    curves = [demand_curve(u.link, strategies[u.id]) for u in group.users]
    sol = solve_water_level(curves, group.total_power)
    return build_allocation(group, strategies, sol.powers, sol.mu, sol.slack, prefactor, None)


def switch_cost(link: LinkBudget) -> float:
    """Extra relay power NDF->CF needs to match the DF ceiling."""
    if not link.df_eligible:
        raise ValueError("switch cost is undefined for users CF is forced on")
    d = derive(link)
    if math.isinf(d.thre2):
        return math.inf
    return d.thre2 - d.ndf_cap


def _constraint_inactive(link: LinkBudget, power: float) -> bool:
    cap = derive(link).ndf_cap
    return power < cap - CAP_RTOL * max(cap, 1.0)


def norss(group: RelayGroup, prefactor: float) -> HybridResult:
    """Greedy NDF->CF switching, cheapest switch first."""
    links = {u.id: u.link for u in group.users}
    cf_strict = frozenset(u.id for u in group.users if not u.link.df_eligible)
    ndf = {u.id for u in group.users} - cf_strict
    cf = set(cf_strict)
    partition = Partition.of(ndf, cf)
    trace = [NorssStep("cf_strict", partition, math.nan)]

    initial = allocate_partition(group, partition, prefactor)
    best = initial
    trace.append(NorssStep("initial", partition, initial.sum_capacity))
    ndf_strict = {i for i in ndf if _constraint_inactive(links[i], initial.powers[i])}

    while ndf - ndf_strict:
        j = min(ndf - ndf_strict, key=lambda i: (switch_cost(links[i]), _id_key(i)))
        candidate = Partition.of(ndf - {j}, cf | {j})
        alloc = allocate_partition(group, candidate, prefactor)
        accepted = alloc.sum_capacity > best.sum_capacity + SWITCH_GAIN_TOL
        trace.append(NorssStep("switch", candidate, alloc.sum_capacity, j, accepted))
        if accepted:
            ndf.discard(j)
            cf.add(j)
            partition, best = candidate, alloc
        else:
            ndf_strict.add(j)

    return HybridResult(
        partition=partition,
        allocation=best,
        trace=tuple(trace),
        ndf_strict=frozenset(ndf_strict),
        cf_strict=cf_strict,
        initial_allocation=initial,
    )


def exhaustive_hybrid(group: RelayGroup, prefactor: float) -> HybridResult:
    """Best NDF/CF split over all splits that keep DF-ineligible users on CF.

    Ties within ``SWITCH_GAIN_TOL`` go to the larger CF set, then to the
    lexicographically smaller one.
    """
    cf_strict = frozenset(u.id for u in group.users if not u.link.df_eligible)
    free = sorted((u.id for u in group.users if u.id not in cf_strict), key=_id_key)
    if len(free) > MAX_EXHAUSTIVE_USERS:
        raise ValueError(f"{len(free)} switchable users is too many to enumerate")
    everyone = frozenset(group.user_ids)

    best: Allocation | None = None
    best_partition = None
    evaluated = 0
    for size in range(len(free), -1, -1):
        for chosen in itertools.combinations(free, size):
            cf = cf_strict | frozenset(chosen)
            partition = Partition(everyone - cf, cf)
            alloc = allocate_partition(group, partition, prefactor)
            evaluated += 1
            if best is None or alloc.sum_capacity > best.sum_capacity + SWITCH_GAIN_TOL:
                best, best_partition = alloc, partition
    return HybridResult(
        partition=best_partition,
        allocation=best,
        cf_strict=cf_strict,
        evaluated=evaluated,
    )
