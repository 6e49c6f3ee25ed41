"""End-to-end acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that the terminal summary prints.
"""

import json
import math
import time

import numpy as np
import pytest

from relaywise import cli
from relaywise.allocators import allocate, allocate_cf, allocate_ndf, allocate_rdf
from relaywise.emit import read_csv
from relaywise.hybrid import Partition, allocate_partition, exhaustive_hybrid, norss
from relaywise.model import (
    LinkBudget,
    RelayGroup,
    SourceNode,
    Strategy,
    capacity_cf,
    capacity_ndf,
    derive,
    df_upper_bound,
)
from relaywise.network import sweep
from relaywise.oracle import grid_maximize, kkt_check
from relaywise.scenario import bundled, load_scenario

from conftest import ACCEPTANCE_LINES, random_group

PURE = (Strategy.RDF, Strategy.NDF, Strategy.AF, Strategy.CF)
SEC6 = "paper_sec6"


class Criterion:
    """Time a criterion body and record its verdict."""

    def __init__(self, name: str, limit: float):
        self.name, self.limit, self.detail = name, limit, ""

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        ok = exc_type is None and elapsed < self.limit
        note = f" ({self.detail})" if self.detail else ""
        if exc_type is None and not ok:
            note += f" over time limit {self.limit:g} s"
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {self.name}: {elapsed:.2f} s{note}")
        print(ACCEPTANCE_LINES[-1])
        if exc_type is None:
            assert elapsed < self.limit, f"{self.name} took {elapsed:.1f} s (limit {self.limit} s)"
        return False


def mixed_partition(group, seed):
    rng = np.random.default_rng(10_000 + seed)
    ids = group.user_ids
    forced = {u.id for u in group.users if not u.link.df_eligible}
    cf = forced | {i for i in ids if rng.random() < 0.5}
    return Partition.of(set(ids) - cf, cf)


def test_oracle_equivalence():
    with Criterion("oracle equivalence (100 groups x 5 allocators)", 60) as c:
        worst = 0.0
        for seed in range(100):
            group = random_group(seed)
            allocations = [allocate(group, s, 0.5) for s in PURE]
            allocations.append(allocate_partition(group, mixed_partition(group, seed), 0.5))
            for alloc in allocations:
                grid = grid_maximize(group, alloc.user_strategy, prefactor=0.5)
                gap = abs(alloc.sum_capacity - grid.best_sum_capacity)
                worst = max(worst, gap)
                assert gap <= 1e-4, (seed, alloc.strategy, gap)
                assert alloc.sum_capacity >= grid.best_sum_capacity - 1e-9
                report = kkt_check(group, alloc)
                assert not report.kkt_violations, (seed, alloc.strategy, report.kkt_violations)
        c.detail = f"max |allocator - grid| = {worst:.2e} bits"


def test_dominance_suite():
    with Criterion("dominance suite (100 groups x 10 budgets)", 60) as c:
        checked = 0
        for seed in range(100):
            base = random_group(seed)
            for budget in np.geomspace(0.1, 100, 10):
                group = base.with_budget(float(budget))
                rdf, ndf, af, cf = (allocate(group, s, 0.5).sum_capacity for s in PURE)
                best_pure = max(ndf, cf)
                hybrid = exhaustive_hybrid(group, 0.5).sum_capacity
                assert ndf >= rdf - 1e-9
                assert cf >= af - 1e-9
                assert hybrid >= best_pure - 1e-9
                assert best_pure >= max(rdf, af) - 1e-9
                checked += 1
        c.detail = f"{checked} cases"


def test_hand_waterfill_cases():
    with Criterion("hand-derived water-fill cases", 1):
        users = [SourceNode(1, LinkBudget(0.0, 3.0, 1.0)), SourceNode(2, LinkBudget(1.0, 7.0, 1.0))]
        group = RelayGroup("R", 4.0, users)
        rdf4 = allocate_rdf(group, 0.25)
        rdf8 = allocate_rdf(group.with_budget(8.0), 0.25)
        ndf4 = allocate_ndf(group, 0.25)
        ndf8 = allocate_ndf(group.with_budget(8.0), 0.25)
        for alloc, expected in ((rdf4, (2.5, 1.5)), (rdf8, (3, 5)), (ndf4, (2, 2)), (ndf8, (3, 3))):
            assert list(alloc.powers.values()) == pytest.approx(expected, abs=1e-9)
        assert ndf8.slack == pytest.approx(2.0, abs=1e-9)
        assert rdf4.slack == pytest.approx(0.0, abs=1e-9) and rdf8.slack == pytest.approx(0.0, abs=1e-9)


def test_threshold_identities():
    with Criterion("threshold identities (1000 DF-eligible links)", 1) as c:
        rng = np.random.default_rng(2024)
        worst_ndf = worst_cf = 0.0
        count = 0
        while count < 1000:
            s_d, s_r, g = 10 ** (rng.uniform(0, 20, 3) / 10)
            link = LinkBudget(s_d, s_r, g)
            if not link.df_eligible:
                continue
            d = derive(link)
            bound = df_upper_bound(link, 0.5)
            rel_ndf = abs(capacity_ndf(link, d.ndf_cap, 0.5) - bound) / bound
            rel_cf = abs(capacity_cf(link, d.thre2, 0.5) - bound) / bound
            assert rel_ndf <= 1e-12
            assert rel_cf <= 1e-9
            worst_ndf, worst_cf = max(worst_ndf, rel_ndf), max(worst_cf, rel_cf)
            count += 1
        c.detail = f"max rel err ndf {worst_ndf:.1e}, cf {worst_cf:.1e}"


def test_reference_scenario_reproduction():
    with Criterion("bundled four-user scenario, checks (a)-(e)", 30) as c:
        scenario = load_scenario(bundled(SEC6))
        plan = scenario.metadata["sweep"]
        modes = ["rdf", "ndf", "af", "cf", "hybrid-norss", "hybrid-exhaustive"]
        res = sweep(scenario, modes, plan["min"], plan["max"], plan["points"], plan["spacing"])
        s = {m: res.sum_capacity(m) for m in modes}
        tol = 1e-9

        hybrid = s["hybrid-norss"]
        assert np.all(hybrid >= s["cf"] - tol) and np.all(s["cf"] >= s["af"] - tol)  # (a)
        assert np.all(hybrid >= s["ndf"] - tol) and np.all(s["ndf"] >= s["rdf"] - tol)

        ndf_wins = np.flatnonzero(s["ndf"] > s["cf"] + tol)  # (b)
        cf_wins = np.flatnonzero(s["cf"] > s["ndf"] + tol)
        assert ndf_wins.size and cf_wins.size and cf_wins.max() > ndf_wins.min()

        small = [k for k, b in enumerate(res.budgets) if b <= 1e-2]  # (c)
        assert small
        both = False
        for k in small:
            sol = res.series["hybrid-norss"][k]
            powers, labels = sol.powers(), sol.labels()
            assigned = {u for u, p in powers.items() if p > 0}
            assert assigned <= {3, 4} and assigned
            assert all(labels[u].startswith("NDF:") for u in assigned)
            both |= assigned == {3, 4}
        assert both

        large = [k for k, b in enumerate(res.budgets) if b >= 1e3]  # (d)
        assert large
        for k in large:
            sol = res.series["hybrid-norss"][k]
            powers, labels = sol.powers(), sol.labels()
            assisted = [u for u, p in powers.items() if p > 0]
            assert len(assisted) == 4
            assert all(labels[u].startswith("CF:") for u in assisted)

        assert np.all(np.abs(hybrid - s["hybrid-exhaustive"]) <= tol)  # (e)
        crossover = res.budgets[int(cf_wins.min())]
        c.detail = f"{len(res.budgets)} budgets, CF overtakes NDF by {crossover:.3g}"


def test_norss_sandwich_and_gap_report():
    with Criterion("NORSS sandwich (500 groups) + gap report", 120) as c:
        gaps = []
        for seed in range(500):
            group = random_group(20_000 + seed)
            res = norss(group, 0.5)
            best = exhaustive_hybrid(group, 0.5).sum_capacity
            assert res.initial_allocation.sum_capacity <= res.sum_capacity + 1e-9
            assert res.sum_capacity <= best + 1e-9
            gaps.append(best - res.sum_capacity)
        gaps = np.maximum(np.array(gaps), 0.0)
        nonzero = gaps > 1e-9
        q = np.quantile(gaps, [0.5, 0.9, 0.99, 1.0])
        c.detail = (
            f"gap>1e-9 in {nonzero.sum()}/500 groups; "
            f"median {q[0]:.2e}, p90 {q[1]:.2e}, p99 {q[2]:.2e}, max {q[3]:.2e} bits"
        )


def test_saturation():
    with Criterion("saturation at budget 1e6", 1) as c:
        scenario = load_scenario(bundled(SEC6))
        group = scenario.relays[0].with_budget(1e6)
        k = scenario.prefactor
        assert all(u.link.df_eligible for u in group.users)
        target = sum(df_upper_bound(u.link, k) for u in group.users)
        rdf = allocate_rdf(group, k).sum_capacity
        ndf = allocate_ndf(group, k).sum_capacity
        cf = allocate_cf(group, k).sum_capacity
        assert abs(rdf - target) <= 1e-6 and abs(ndf - target) <= 1e-6
        assert cf > target
        c.detail = f"DF ceiling {target:.6f} bits, CF {cf:.6f} bits"


def test_cli_contract(tmp_path):
    with Criterion("CLI contract", 60):
        run = lambda *argv: cli.main([str(a) for a in argv])
        alloc = tmp_path / "alloc.json"
        assert run("allocate", "--scenario", SEC6, "--mode", "hybrid-norss", "--budget", 5, "--format", "json", "--out", alloc) == 0
        assert run("verify", "--scenario", SEC6, "--allocation", alloc) == 0

        data = json.loads(alloc.read_text())
        users = data["relays"][0]["users"]
        k = max(range(len(users)), key=lambda i: users[i]["power"])
        delta = 0.05 * users[k]["power"]
        users[k]["power"] -= delta
        for i, u in enumerate(users):
            if i != k:
                u["power"] += delta / (len(users) - 1)
        bad = tmp_path / "perturbed.json"
        bad.write_text(json.dumps(data))
        assert run("verify", "--scenario", SEC6, "--allocation", bad) == 4

        outputs = []
        for tag in ("a", "b"):
            csv_path, json_path = tmp_path / f"{tag}.csv", tmp_path / f"{tag}.json"
            args = ("sweep", "--scenario", SEC6, "--modes", "ndf,cf,hybrid-norss", "--min", 0.01, "--max", 100, "--points", 9, "--log")
            assert run(*args, "--out", csv_path) == 0
            assert run(*args, "--out", json_path) == 0
            outputs.append((csv_path.read_bytes(), json_path.read_bytes()))
        assert outputs[0] == outputs[1]

        rows = read_csv(tmp_path / "a.csv")
        series = json.loads((tmp_path / "a.json").read_text())["series"]
        for mode, solutions in series.items():
            for sol in solutions:
                got = {
                    int(r["user_id"]): r
                    for r in rows
                    if r["mode"] == mode and math.isclose(r["budget"], sol["budget"], rel_tol=1e-11)
                }
                for u in sol["relays"][0]["users"]:
                    row = got[u["id"]]
                    assert math.isclose(row["power"], u["power"], rel_tol=1e-9, abs_tol=1e-300)
                    assert math.isclose(row["user_capacity_bits"], u["user_capacity_bits"], rel_tol=1e-9)
                assert math.isclose(next(iter(got.values()))["sum_capacity_bits"], sol["sum_capacity_bits"], rel_tol=1e-9)
