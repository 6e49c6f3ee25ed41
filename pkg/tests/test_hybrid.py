import itertools
import math

import numpy as np
import pytest

from relaywise.allocators import allocate_cf, allocate_ndf
from relaywise.hybrid import (
    Partition,
    allocate_partition,
    exhaustive_hybrid,
    norss,
    switch_cost,
)
from relaywise.model import LinkBudget, RelayGroup, SourceNode, Strategy, derive
from relaywise.oracle import grid_maximize
from relaywise.scenario import bundled, load_scenario

from conftest import random_group


def single(link, budget):
    return RelayGroup("R", budget, [SourceNode(1, link)])


@pytest.fixture(scope="module")
def sec6():
    return load_scenario(bundled("paper_sec6"))


class TestPartition:
    def test_validate(self, two_user_group):
        Partition.of([1], [2]).validate(two_user_group)
        with pytest.raises(ValueError, match="overlap"):
            Partition.of([1, 2], [2]).validate(two_user_group)
        with pytest.raises(ValueError, match="cover"):
            Partition.of([1], []).validate(two_user_group)
        group = RelayGroup("R", 1.0, [SourceNode(1, LinkBudget(3, 1, 1))])
        Partition.of([1], []).validate(group)
        with pytest.raises(ValueError):
            Partition.of([1], []).validate(group, strict=True)

    def test_all_cf_is_pure_cf(self):
        for seed in range(10):
            group = random_group(seed)
            a = allocate_partition(group, Partition.of([], group.user_ids), 0.5)
            b = allocate_cf(group, 0.5)
            assert a.powers == pytest.approx(b.powers, abs=1e-12)

    def test_all_ndf_is_pure_ndf(self):
        for seed in range(10):
            group = random_group(seed)
            a = allocate_partition(group, Partition.of(group.user_ids, []), 0.5)
            assert a.sum_capacity == pytest.approx(allocate_ndf(group, 0.5).sum_capacity, abs=1e-9)

    def test_single_ndf_user(self, ref_link):
        alloc = allocate_partition(single(ref_link, 0.5), Partition.of([1], []), 0.5)
        assert alloc.powers[1] == pytest.approx(0.5)
        assert alloc.sum_capacity == pytest.approx(0.5 * (1 + math.log2(1.5)), rel=1e-12)
        assert alloc.sum_capacity == pytest.approx(0.79248, abs=1e-5)

    def test_sec6_grid(self, sec6):
        group = sec6.relays[0].with_budget(0.05)
        eligible = [u.id for u in group.users if u.link.df_eligible]
        part = Partition.of(eligible, set(group.user_ids) - set(eligible))
        alloc = allocate_partition(group, part, sec6.prefactor)
        grid = grid_maximize(group, alloc.user_strategy, prefactor=sec6.prefactor)
        assert abs(alloc.sum_capacity - grid.best_sum_capacity) <= 1e-4


class TestSwitchCost:
    def test_values(self, ref_link, sec6):
        assert switch_cost(ref_link) == pytest.approx(4.0, rel=1e-14)
        assert switch_cost(LinkBudget(0.0, 3.0, 1.0)) == math.inf
        user3 = next(u for u in sec6.relays[0].users if u.id == 3)
        d = derive(user3.link)
        assert 0 < switch_cost(user3.link) < math.inf
        assert switch_cost(user3.link) == pytest.approx(d.thre2 - d.ndf_cap)

    def test_strict_cf_rejected(self):
        with pytest.raises(ValueError):
            switch_cost(LinkBudget(3.0, 1.0, 1.0))


class TestNorss:
    def test_ref_small_budget(self, ref_link):
        res = norss(single(ref_link, 0.8), 0.5)
        assert res.partition.ndf_set == {1}
        assert res.allocation.powers[1] == pytest.approx(0.8)

    def test_ref_large_budget(self, ref_link):
        res = norss(single(ref_link, 10.0), 0.5)
        assert res.partition.cf_set == {1}
        assert res.sum_capacity == pytest.approx(0.5 * math.log2(4.4), rel=1e-9)
        assert res.sum_capacity > 1.0
        assert res.trace[-1].accepted is True

    def test_strict_cf_user(self):
        res = norss(single(LinkBudget(3.0, 1.0, 1.0), 2.0), 0.5)
        assert res.partition.cf_set == {1} and res.cf_strict == {1}
        assert not [s for s in res.trace if s.step == "switch"]

    def test_tie_break_lowest_id(self, ref_link):
        users = [SourceNode(i, ref_link) for i in (2, 1)]
        res = norss(RelayGroup("R", 30.0, users), 0.5)
        switches = [s for s in res.trace if s.step == "switch"]
        assert switches[0].user == 1

    def test_trace_integrity(self):
        for seed in range(80):
            group = random_group(seed)
            res = norss(group, 0.5)
            assert res.trace and res.trace[0].step == "cf_strict"
            assert res.trace[1].step == "initial"
            best = res.trace[1].sum_capacity
            for step in res.trace[2:]:
                if step.accepted:
                    assert step.sum_capacity > best
                    best = step.sum_capacity
                else:
                    assert step.user in res.ndf_strict
            assert res.sum_capacity == pytest.approx(best, abs=0)
            assert res.cf_strict <= res.partition.cf_set


class TestExhaustive:
    def test_partition_count(self, ref_link):
        assert exhaustive_hybrid(single(ref_link, 1.0), 0.5).evaluated == 2
        users = [SourceNode(1, ref_link), SourceNode(2, LinkBudget(3, 1, 1)), SourceNode(3, ref_link)]
        assert exhaustive_hybrid(RelayGroup("R", 1.0, users), 0.5).evaluated == 4

    def test_ref_budget_one(self, ref_link):
        res = exhaustive_hybrid(single(ref_link, 1.0), 0.5)
        assert res.partition.ndf_set == {1}
        assert res.sum_capacity == pytest.approx(1.0, rel=1e-12)
        cf = allocate_cf(single(ref_link, 1.0), 0.5).sum_capacity
        assert cf == pytest.approx(0.5 * math.log2(1 + 1 + 3 / (1 + 2.5)), rel=1e-12)
        assert cf == pytest.approx(0.75729, abs=1e-5)

    def test_matches_brute_force(self):
        for seed in range(30):
            group = random_group(seed)
            ids = group.user_ids
            forced = {u.id for u in group.users if not u.link.df_eligible}
            free = [i for i in ids if i not in forced]
            best = max(
                allocate_partition(group, Partition.of(set(ids) - forced - set(c), forced | set(c)), 0.5).sum_capacity
                for n in range(len(free) + 1)
                for c in itertools.combinations(free, n)
            )
            assert exhaustive_hybrid(group, 0.5).sum_capacity == pytest.approx(best, abs=1e-12)

    def test_guard(self):
        users = [SourceNode(i, LinkBudget(1, 3, 1)) for i in range(21)]
        with pytest.raises(ValueError):
            exhaustive_hybrid(RelayGroup("R", 1.0, users), 0.5)

    def test_sec6_sweep(self, sec6):
        relay = sec6.relays[0]
        for budget in np.geomspace(1e-3, 1e4, 15):
            group = relay.with_budget(budget)
            ex = exhaustive_hybrid(group, sec6.prefactor).sum_capacity
            nr = norss(group, sec6.prefactor).sum_capacity
            pure = max(allocate_ndf(group, sec6.prefactor).sum_capacity, allocate_cf(group, sec6.prefactor).sum_capacity)
            assert ex >= nr - 1e-9
            assert nr >= pure - 1e-9


class TestProperties:
    def test_sandwich_and_dominance(self):
        for seed in range(100):
            group = random_group(seed)
            res = norss(group, 0.5)
            ex = exhaustive_hybrid(group, 0.5)
            assert res.initial_allocation.sum_capacity <= res.sum_capacity + 1e-9
            assert res.sum_capacity <= ex.sum_capacity + 1e-9
            pure = max(allocate_ndf(group, 0.5).sum_capacity, allocate_cf(group, 0.5).sum_capacity)
            assert ex.sum_capacity >= pure - 1e-9

    def test_relaxation_certificate(self):
        hits = 0
        for seed in range(200):
            group = random_group(seed)
            res = norss(group, 0.5)
            initial_ndf = res.trace[1].partition.ndf_set
            if initial_ndf and initial_ndf <= res.ndf_strict and all(
                s.step != "switch" for s in res.trace
            ):
                hits += 1
                assert res.sum_capacity == pytest.approx(exhaustive_hybrid(group, 0.5).sum_capacity, abs=1e-9)
        assert hits > 10

    def test_crossover_at_thre2(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            s_d, s_r, g = sorted(10 ** (rng.uniform(0, 20, 2) / 10)) + [10 ** (rng.uniform(0, 20) / 10)]
            link = LinkBudget(s_d, s_r, g)
            thre2 = derive(link).thre2
            chooses_cf = lambda b: exhaustive_hybrid(single(link, b), 0.5).partition.cf_set == {1}
            lo, hi = 1e-6, 1e3 * thre2
            assert not chooses_cf(lo) and chooses_cf(hi)
            for _ in range(60):
                mid = math.sqrt(lo * hi)
                lo, hi = (lo, mid) if chooses_cf(mid) else (mid, hi)
            assert hi == pytest.approx(thre2, rel=1e-6)
            assert norss(single(link, 0.5 * thre2), 0.5).partition.ndf_set == {1}
            assert norss(single(link, 2.0 * thre2), 0.5).partition.cf_set == {1}

    def test_exhaustive_monotone(self):
        for seed in range(10):
            group = random_group(seed)
            values = [exhaustive_hybrid(group.with_budget(b), 0.5).sum_capacity for b in np.geomspace(0.01, 1e3, 20)]
            assert np.all(np.diff(values) >= -1e-12)
