"""Domain types and per-user capacity formulas.

Links are described by the SNR triple ``(direct_snr, source_relay_snr,
relay_dest_gain)``. Capacities are in bits per channel use, scaled by the
network prefactor ``1/(2K)``. Every capacity function accepts scalar or
array relay powers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

UserId = Hashable


class Strategy(str, enum.Enum):
    DIRECT = "Direct"
    RDF = "RDF"
    NDF = "NDF"
    AF = "AF"
    CF = "CF"

    @property
    def is_df(self) -> bool:
        return self in (Strategy.RDF, Strategy.NDF)


@dataclass(frozen=True)
class LinkBudget:
    """Linear SNRs of one source node's three links."""

    direct_snr: float
    source_relay_snr: float
    relay_dest_gain: float

    def __post_init__(self):
        for name in ("direct_snr", "source_relay_snr", "relay_dest_gain"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_db(cls, direct_db: float, source_relay_db: float, relay_dest_db: float) -> "LinkBudget":
        return cls(to_linear(direct_db), to_linear(source_relay_db), to_linear(relay_dest_db))

    @property
    def df_eligible(self) -> bool:
        """True when the relay link beats the direct link, so DF can help."""
        return self.source_relay_snr > self.direct_snr


@dataclass(frozen=True)
class LinkDerived:
    df_upper: float
    rdf_base: float
    rdf_cap: float
    ndf_base: float
    ndf_cap: float
    af_a: float
    af_b: float
    cf_x: float
    cf_y: float
    thre2: float


@dataclass(frozen=True)
class SourceNode:
    id: UserId
    link: LinkBudget


@dataclass(frozen=True)
class RelayGroup:
    id: UserId
    total_power: float
    users: tuple[SourceNode, ...]

    def __post_init__(self):
        users = tuple(self.users)
        object.__setattr__(self, "users", users)
        power = float(self.total_power)
        if not math.isfinite(power) or power < 0:
            raise ValueError(f"relay {self.id!r}: total_power must be finite and >= 0")
        object.__setattr__(self, "total_power", power)
        if not users:
            raise ValueError(f"relay {self.id!r} has no users")
        ids = [u.id for u in users]
        if len(set(ids)) != len(ids):
            raise ValueError(f"relay {self.id!r} has duplicate user ids")

    @property
    def user_ids(self) -> list[UserId]:
        return [u.id for u in self.users]

    def with_budget(self, budget: float) -> "RelayGroup":
        return RelayGroup(self.id, budget, self.users)


@dataclass(frozen=True)
class Scenario:
    relays: tuple[RelayGroup, ...]
    user_count: int = 0
    name: str = ""
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        relays = tuple(self.relays)
        object.__setattr__(self, "relays", relays)
        if not relays:
            raise ValueError("scenario has no relays")
        ids = [u.id for r in relays for u in r.users]
        if len(set(ids)) != len(ids):
            raise ValueError("user ids must be unique across the scenario")
        rids = [r.id for r in relays]
        if len(set(rids)) != len(rids):
            raise ValueError("relay ids must be unique")
        count = int(self.user_count) if self.user_count else len(ids)
        if count <= 0:
            raise ValueError("user_count must be positive")
        object.__setattr__(self, "user_count", count)

    @property
    def prefactor(self) -> float:
        return 1.0 / (2 * self.user_count)


def to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def to_db(value: float) -> float:
    return 10.0 * math.log10(value)


def _power(relay_power):
    p = np.asarray(relay_power, dtype=float)
    if np.any(p < 0) or np.any(np.isnan(p)):
        raise ValueError("relay power must be >= 0")
    return p


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def capacity_direct(link: LinkBudget, prefactor: float) -> float:
    return prefactor * math.log2(1.0 + link.direct_snr)


def df_upper_bound(link: LinkBudget, prefactor: float) -> float:
    return prefactor * math.log2(1.0 + link.source_relay_snr)


def capacity_rdf(link: LinkBudget, relay_power, prefactor: float):
    p = _power(relay_power)
    c = prefactor * np.log2(1.0 + link.direct_snr + p * link.relay_dest_gain)
    return _out(np.minimum(c, df_upper_bound(link, prefactor)))


def capacity_ndf(link: LinkBudget, relay_power, prefactor: float):
    p = _power(relay_power)
    c = prefactor * (np.log2(1.0 + link.direct_snr) + np.log2(1.0 + p * link.relay_dest_gain))
    return _out(np.minimum(c, df_upper_bound(link, prefactor)))


def capacity_af(link: LinkBudget, relay_power, prefactor: float):
    p = _power(relay_power)
    s = link.source_relay_snr
    t = p * link.relay_dest_gain
    return _out(prefactor * np.log2(1.0 + link.direct_snr + s * t / (s + t + 1.0)))


def cf_compression_noise(link: LinkBudget, relay_power: float) -> float:
    """Wyner-Ziv compression noise variance; ``inf`` when the relay is silent."""
    if relay_power < 0:
        raise ValueError("relay power must be >= 0")
    t = relay_power * link.relay_dest_gain
    if t == 0:
        return math.inf
    s, d = link.source_relay_snr, link.direct_snr
    return (s + d + 1.0) / (t * (d + 1.0))


def capacity_cf(link: LinkBudget, relay_power, prefactor: float):
    # s/(1 + sigma^2) rewritten as s*t*d1/(t*d1 + s + d1): finite at t = 0.
    p = _power(relay_power)
    s, d1 = link.source_relay_snr, 1.0 + link.direct_snr
    t = p * link.relay_dest_gain
    return _out(prefactor * np.log2(d1 + s * t * d1 / (t * d1 + s + d1)))


_FORMULAS = {
    Strategy.RDF: capacity_rdf,
    Strategy.NDF: capacity_ndf,
    Strategy.AF: capacity_af,
    Strategy.CF: capacity_cf,
}


def user_capacity(link: LinkBudget, relay_power, strategy: Strategy, prefactor: float):
    """Capacity a user actually gets under ``strategy``.

    DF-ineligible users are served over the direct link alone (the relay
    cannot decode them), so their DF capacity is the direct capacity rather
    than the clamped formula value.
    """
    strategy = Strategy(strategy)
    if strategy is Strategy.DIRECT or (strategy.is_df and not link.df_eligible):
        p = _power(relay_power)
        return _out(np.full(p.shape, capacity_direct(link, prefactor)))
    return _FORMULAS[strategy](link, relay_power, prefactor)


def derive(link: LinkBudget, prefactor: float = 0.5) -> LinkDerived:
    s_d, s_r, g = link.direct_snr, link.source_relay_snr, link.relay_dest_gain
    gap = max(s_r - s_d, 0.0)
    if g > 0:
        rdf_base = (1.0 + s_d) / g
        ndf_base = 1.0 / g
        rdf_cap = gap / g
        ndf_cap = gap / (g * (1.0 + s_d))
    else:
        rdf_base = ndf_base = math.inf
        rdf_cap = ndf_cap = 0.0
    total = s_r + s_d + 1.0
    af_a = s_r * g / ((s_r + 1.0) * (1.0 + s_d))
    af_b = g / (s_r + 1.0)
    cf_x = s_r * g / total
    cf_y = g * (1.0 + s_d) / total
    if s_d > 0 and g > 0:
        thre2 = total * gap / (g * s_d * (1.0 + s_d))
    else:
        thre2 = math.inf if gap > 0 else 0.0
    return LinkDerived(
        df_upper=df_upper_bound(link, prefactor),
        rdf_base=rdf_base,
        rdf_cap=rdf_cap,
        ndf_base=ndf_base,
        ndf_cap=ndf_cap,
        af_a=af_a,
        af_b=af_b,
        cf_x=cf_x,
        cf_y=cf_y,
        thre2=thre2,
    )


def sum_direct(users: Sequence[SourceNode], prefactor: float) -> float:
    return sum(capacity_direct(u.link, prefactor) for u in users)
