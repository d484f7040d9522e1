"""
Which chained test discriminates best?
======================================

A two-photon energy-time experiment that postselects on coincidences
leaves room for local models unless the analysis grants them a bigger
bound.  For a chained test with `terms` correlation terms the usual
local-realist bound terms-2 grows to terms-1 once each detection may
carry a predetermined early/late delay, while quantum mechanics predicts
terms*cos(pi/terms).

The interesting question is experimental: what interference visibility v
does a real setup need before v * quantum > bound?  Four terms can never
get there (the critical visibility exceeds 1); ten terms is the sweet
spot.
"""

from franson import (
    ModelClass,
    bound_for,
    chained_quantum_value,
    critical_visibility,
)

emission_time = ModelClass.emission_time_realism()
plain = ModelClass.plain_local_realism()

print(f"{'terms':>6} {'plain':>7} {'delay-aware':>12} {'quantum':>9} {'crit. vis.':>11}")
rows = []
for terms in (4, 6, 8, 10, 12, 14, 16):
    cv = critical_visibility(terms)
    rows.append((terms, cv))
    print(
        f"{terms:>6} {bound_for(plain, terms):>7.0f} "
        f"{bound_for(emission_time, terms):>12.0f} "
        f"{chained_quantum_value(terms):>9.4f} "
        f"{cv:>10.2%}"
    )

best = min(rows, key=lambda r: r[1])
print()
print(f"four terms need v = {rows[0][1]:.2%}, impossible for any source")
print(f"the minimum requirement is at {best[0]} terms: v > {best[1]:.2%}")
