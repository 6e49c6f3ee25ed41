"""Optimal relay power allocation under a single relaying strategy.

RDF and NDF are water-fills with a per-user floor and ceiling (the ceiling
comes from the relay having to decode the source). AF and CF have no
ceiling; their per-user demand at water level ``mu`` has a closed form
that is inverted numerically for the shared level.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping

from .model import (
    LinkBudget,
    RelayGroup,
    Strategy,
    UserId,
    derive,
    user_capacity,
)
from .waterfill import DemandCurve, bounded_waterfill, linear_curve, solve_water_level

ZERO_TOL = 1e-12
CAP_RTOL = 1e-9


class UserClass(str, enum.Enum):
    HIGH = "HighPotential"
    LOW = "LowPotential"
    NONRELAYED = "Nonrelayed"


@dataclass(frozen=True)
class Allocation:
    """One relay group's power split and the capacities it yields.

    ``strategy`` is ``None`` for hybrid allocations; ``user_strategy`` always
    carries the per-user relaying strategy.
    """

    strategy: Strategy | None
    relay_id: UserId
    budget: float
    powers: dict
    water_level: float
    classes: dict
    user_capacity: dict
    user_strategy: dict
    slack: float
    prefactor: float
    sum_capacity: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "sum_capacity", float(sum(self.user_capacity.values())))

    @property
    def user_ids(self) -> list[UserId]:
        return list(self.powers)


def df_cap(link: LinkBudget, strategy: Strategy) -> float:
    d = derive(link)
    return d.rdf_cap if strategy is Strategy.RDF else d.ndf_cap


def classify_user(
    link: LinkBudget, power: float, water_level: float, strategy: Strategy
) -> UserClass:
    """Three-way split of users by how their relay power sits.

    ``water_level`` is accepted for symmetry with the allocators; the class
    follows from the power alone once the ceiling is known.
    """
    strategy = Strategy(strategy)
    if power <= ZERO_TOL or strategy is Strategy.DIRECT:
        return UserClass.NONRELAYED
    if strategy.is_df:
        if not link.df_eligible:
            return UserClass.NONRELAYED
        cap = df_cap(link, strategy)
        if abs(power - cap) <= CAP_RTOL * max(cap, 1.0) or power > cap:
            return UserClass.LOW
    return UserClass.HIGH


def nonlinear_demand(a: float, b: float) -> DemandCurve:
    """AF/CF demand curve, nonzero only for ``mu < a``.

    The textbook root ``(-(r+2) + sqrt(r^2 + 4a(1+r)/mu)) / (2(a+b))`` with
    ``r = a/b`` is rationalised to avoid cancellation near ``mu = a`` and
    the ``b -> 0`` singularity; at ``b = 0`` it reduces to ``1/mu - 1/a``.
    """
    if a <= 0:
        return DemandCurve(lambda mu: 0.0, 0.0)
    return DemandCurve(
        lambda mu: 2.0 * (a / mu - 1.0) / (math.sqrt(a * a + 4.0 * a * b * (a + b) / mu) + a + 2.0 * b),
        a,
    )


def demand_curve(link: LinkBudget, strategy: Strategy) -> DemandCurve:
    d = derive(link)
    strategy = Strategy(strategy)
    if strategy is Strategy.DIRECT:
        return DemandCurve(lambda mu: 0.0, 0.0)
    if strategy.is_df:
        if not link.df_eligible or link.relay_dest_gain == 0:
            return DemandCurve(lambda mu: 0.0, 0.0, 0.0)
        if strategy is Strategy.RDF:
            return linear_curve(d.rdf_base, d.rdf_cap)
        return linear_curve(d.ndf_base, d.ndf_cap)
    if strategy is Strategy.AF:
        return nonlinear_demand(d.af_a, d.af_b)
    return nonlinear_demand(d.cf_x, d.cf_y)


def build_allocation(
    group: RelayGroup,
    strategies: Mapping[UserId, Strategy],
    powers,
    water_level: float,
    slack: float,
    prefactor: float,
    tag: Strategy | None,
) -> Allocation:
    power_map, classes, caps = {}, {}, {}
    for user, p in zip(group.users, powers):
        s = strategies[user.id]
        p = float(p) if p > ZERO_TOL else 0.0
        power_map[user.id] = p
        classes[user.id] = classify_user(user.link, p, water_level, s)
        caps[user.id] = float(user_capacity(user.link, p, s, prefactor))
    return Allocation(
        strategy=tag,
        relay_id=group.id,
        budget=group.total_power,
        powers=power_map,
        water_level=float(water_level),
        classes=classes,
        user_capacity=caps,
        user_strategy=dict(strategies),
        slack=float(slack),
        prefactor=prefactor,
    )


def _allocate_df(group: RelayGroup, prefactor: float, strategy: Strategy) -> Allocation:
    bases, caps = [], []
    for user in group.users:
        link = user.link
        if not link.df_eligible or link.relay_dest_gain == 0:
            bases.append(math.inf)
            caps.append(0.0)
            continue
        d = derive(link)
        if strategy is Strategy.RDF:
            bases.append(d.rdf_base)
            caps.append(d.rdf_cap)
        else:
            bases.append(d.ndf_base)
            caps.append(d.ndf_cap)
    sol = bounded_waterfill(bases, caps, group.total_power)
    strategies = {u.id: strategy for u in group.users}
    return build_allocation(group, strategies, sol.powers, sol.mu, sol.slack, prefactor, strategy)


def _allocate_curves(group: RelayGroup, prefactor: float, strategy: Strategy) -> Allocation:
    curves = [demand_curve(u.link, strategy) for u in group.users]
    sol = solve_water_level(curves, group.total_power)
    strategies = {u.id: strategy for u in group.users}
    return build_allocation(group, strategies, sol.powers, sol.mu, sol.slack, prefactor, strategy)


def allocate_rdf(group: RelayGroup, prefactor: float) -> Allocation:
    return _allocate_df(group, prefactor, Strategy.RDF)


def allocate_ndf(group: RelayGroup, prefactor: float) -> Allocation:
    return _allocate_df(group, prefactor, Strategy.NDF)


def allocate_af(group: RelayGroup, prefactor: float) -> Allocation:
    return _allocate_curves(group, prefactor, Strategy.AF)


def allocate_cf(group: RelayGroup, prefactor: float) -> Allocation:
    return _allocate_curves(group, prefactor, Strategy.CF)


def allocate_direct(group: RelayGroup, prefactor: float) -> Allocation:
    strategies = {u.id: Strategy.DIRECT for u in group.users}
    zeros = [0.0] * len(group.users)
    return build_allocation(group, strategies, zeros, 0.0, group.total_power, prefactor, Strategy.DIRECT)


ALLOCATORS = {
    Strategy.DIRECT: allocate_direct,
    Strategy.RDF: allocate_rdf,
    Strategy.NDF: allocate_ndf,
    Strategy.AF: allocate_af,
    Strategy.CF: allocate_cf,
}


def allocate(group: RelayGroup, strategy: Strategy, prefactor: float) -> Allocation:
    return ALLOCATORS[Strategy(strategy)](group, prefactor)
