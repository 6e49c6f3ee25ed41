"""
Pure strategies on the bundled four-user network
================================================

Every user is relayed with the same strategy; only the power split is
optimised. The five-column table mirrors a sum-capacity-vs-power plot.
"""

import numpy as np

from relaywise import load_scenario, solve_network
from relaywise.scenario import bundled

scenario = load_scenario(bundled("paper_sec6"))
modes = ["rdf", "ndf", "af", "cf", "hybrid-norss"]

print(f"{'budget':>9} " + " ".join(f"{m:>12}" for m in modes))
for budget in np.geomspace(1e-3, 1e4, 15):
    row = [solve_network(scenario, m, budget).sum_capacity for m in modes]
    print(f"{budget:9.3g} " + " ".join(f"{c:12.6f}" for c in row))

# Small budgets favour NDF; once NDF saturates CF overtakes it. The hybrid
# column tracks whichever is better and beats both in between.
sol = solve_network(scenario, "ndf", 2.0)
print("\nNDF at budget 2:")
for uid, label in sol.labels().items():
    print(f"  user {uid}: power {sol.powers()[uid]:.4f}  class {label}")
