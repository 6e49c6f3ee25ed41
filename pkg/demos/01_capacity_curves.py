"""
Per-user capacity against relay power
=====================================

One source, one relay, one destination. The same link is evaluated under
each relaying strategy as the relay power grows.
"""

import numpy as np

from relaywise import LinkBudget, derive
from relaywise.model import capacity_af, capacity_cf, capacity_ndf, capacity_rdf, df_upper_bound

# Linear SNRs: direct 1, source-to-relay 3, relay-to-destination gain 1.
link = LinkBudget(1.0, 3.0, 1.0)
k = 0.5  # 1/(2K) with a single user

powers = np.array([0.0, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0, 1e4])
print(f"{'power':>8} {'RDF':>8} {'NDF':>8} {'AF':>8} {'CF':>8}")
for p in powers:
    row = [f(link, p, k) for f in (capacity_rdf, capacity_ndf, capacity_af, capacity_cf)]
    print(f"{p:8.3g} " + " ".join(f"{c:8.5f}" for c in row))

# Both DF variants stop at the source-to-relay capacity. NDF gets there at
# ndf_cap, and CF only matches it at thre2; past that CF keeps growing.
d = derive(link, k)
print(f"\nDF ceiling {df_upper_bound(link, k):.5f} bits")
print(f"NDF reaches it at P = {d.ndf_cap:g}, CF at P = {d.thre2:g}")
print(f"CF limit as P grows: {0.5 * np.log2(1 + link.direct_snr + link.source_relay_snr):.5f} bits")
