"""How much is lost when the star's central party measures only z and x.

With k classical sources among n, arbitrary qubit observables still reach
2^((n-k)/2n) > 1, while the z/x-restricted centre is capped at 1. The
colored-noise sweep below shows the gap opening as tau1 shrinks.
"""

import numpy as np

from nlocality import closedform as cf
from nlocality.networks import strategy_score
from nlocality.observables import mub_star_strategy, theorem1_star_strategy
from nlocality.states import bell_state, classical_gamma
from nlocality.sweeps import SweepConfig, sweep_rows

for n in (2, 3, 4):
    for k in range(1, n):
        ens = [classical_gamma()] * k + [bell_state()] * (n - k)
        s_local = strategy_score(ens, theorem1_star_strategy(ens))
        s_mub = strategy_score(ens, mub_star_strategy(ens))
        print(f"n={n} k={k}: S*={s_local:.6f} (2^((n-k)/2n)={2 ** ((n - k) / (2 * n)):.6f})  S^*={s_mub:.6f}")

print("\nfull-network-nonlocality thresholds:", [round(cf.full_nonlocality_threshold(n), 4) for n in range(2, 7)])

name, rows = sweep_rows(SweepConfig("star_colored", n=12, k=6, grid_points=6))
print(f"\n{name:>6} {'S*':>9} {'S^*':>9}")
for p, s_local, s_mub in rows:
    print(f"{p:6.2f} {s_local:9.5f} {s_mub:9.5f}")
