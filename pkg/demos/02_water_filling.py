"""
Water-filling with a floor and a ceiling
========================================

DF allocations pour power over a per-user floor (the base) and stop each
user at a ceiling set by what the relay can decode.
"""

from relaywise import bounded_waterfill

bases, caps = [1.0, 2.0], [3.0, 6.0]

for budget in (0.5, 1.0, 4.0, 8.0, 12.0):
    sol = bounded_waterfill(bases, caps, budget)
    powers = ", ".join(f"{p:.3f}" for p in sol.powers)
    height = sol.water_height if sol.mu > 0 else float("inf")
    print(f"budget {budget:5.1f}: powers ({powers})  water height {height:.3f}  slack {sol.slack:.3f}")

# Below budget 1 only the user with the lower floor gets power. At budget 8
# user 1 sits at its ceiling and user 2 takes the rest. Past budget 9 both
# are capped and the remainder is left unspent.
