"""
Checking an allocation without trusting the solver
==================================================

A grid search over the power simplex and a finite-difference optimality
check confirm what the water-level solvers return, and flag an allocation
that was nudged off the optimum.
"""

import numpy as np

from relaywise import LinkBudget, RelayGroup, SourceNode, Strategy, allocate, grid_maximize, kkt_check
from relaywise.allocators import build_allocation

rng = np.random.default_rng(1)
users = [SourceNode(i + 1, LinkBudget(*(10 ** (rng.uniform(0, 20, 3) / 10)))) for i in range(3)]
group = RelayGroup("R", 20.0, users)

for strategy in (Strategy.RDF, Strategy.NDF, Strategy.AF, Strategy.CF):
    alloc = allocate(group, strategy, 1 / 6)
    grid = grid_maximize(group, alloc.user_strategy, prefactor=1 / 6)
    kkt = kkt_check(group, alloc)
    print(
        f"{strategy.value:>3}: solver {alloc.sum_capacity:.9f}  grid {grid.best_sum_capacity:.9f}  "
        f"KKT {'ok' if kkt.ok else kkt.kkt_violations}"
    )

# Shift 5% of the largest share to the others and check again.
alloc = allocate(group, Strategy.CF, 1 / 6)
p = np.array(list(alloc.powers.values()))
top = int(np.argmax(p))
p[top] *= 0.95
p[np.arange(len(p)) != top] += 0.05 * alloc.powers[group.user_ids[top]] / (len(p) - 1)
nudged = build_allocation(group, alloc.user_strategy, p, alloc.water_level, 0.0, 1 / 6, Strategy.CF)
print("\nnudged CF allocation:")
for uid, text in kkt_check(group, nudged).kkt_violations:
    print(f"  user {uid}: {text}")
