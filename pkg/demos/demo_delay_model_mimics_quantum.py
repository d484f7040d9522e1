"""
A local model that seems to violate a Bell inequality
=====================================================

The model is embarrassingly simple.  A hidden phase theta and a uniform
r in [0,1) are shared by both photons.  Site 1 outputs the sign of
cos(theta + phi) and arrives Early or Late depending on where r falls
relative to a threshold set by theta and phi; site 2 outputs the sign of
cos(theta - psi) and arrives Early iff r < 1/2, no matter the setting.

Coincident pairs (equal arrival class) then show the full interference
correlation cos(phi + psi) at 50% coincidence rate, so the postselected
CHSH statistic lands on 2*sqrt(2) - the quantum maximum - from a model
with no nonlocality whatsoever.  The "violation" is an artifact of
throwing away half the trials.
"""

import math

from franson import (
    RandomSource,
    aklz_quadrature,
    aklz_strategy,
    monte_carlo_statistics,
    simulate_strategy_pairs,
)

# deterministic integration over (theta, r): conditional correlation
print("settings (phi, psi) -> model correlation vs cos(phi + psi)")
for phi, psi in [(0.0, 0.0), (math.pi / 4, 0.0), (math.pi / 3, math.pi / 6)]:
    st = aklz_quadrature(phi, psi)
    target = math.cos(phi + psi)
    print(
        f"  ({phi:5.3f}, {psi:5.3f})  {st.conditional_correlation:+.9f}"
        f"  vs {target:+.9f}   coincidence {st.coincidence_mass:.6f}"
        f"  EE {st.mass_ee:.6f}  LL {st.mass_ll:.6f}"
    )

# the same numbers from an event-level Monte Carlo run
rs = RandomSource(seed=2024)
strategy = aklz_strategy()
phi, psi = math.pi / 4, 0.0
batch = simulate_strategy_pairs(strategy, phi, psi, 500_000, rs.substream(1))
mc = monte_carlo_statistics(batch)
print()
print(f"Monte Carlo at (pi/4, 0), 500k trials:")
print(f"  conditional correlation {mc.conditional_correlation:+.4f}"
      f"  (exact {math.cos(phi + psi):+.4f})")
print(f"  coincidence fraction    {mc.coincidence_mass:.4f}")

# CHSH from the four standard setting pairs
chsh = 0.0
signs = (1, 1, 1, -1)
pairs = [
    (math.pi / 4, 0.0),
    (math.pi / 4, 3 * math.pi / 2),
    (3 * math.pi / 4, 3 * math.pi / 2),
    (3 * math.pi / 4, 0.0),
]
for k, ((phi, psi), sign) in enumerate(zip(pairs, signs)):
    mc = monte_carlo_statistics(
        simulate_strategy_pairs(strategy, phi, psi, 500_000, rs.substream(10 + k))
    )
    chsh += sign * mc.conditional_correlation
print()
print(f"postselected CHSH = {abs(chsh):.4f}  (quantum maximum 2*sqrt(2) = {2 * math.sqrt(2):.4f})")
print("local bound 2 is apparently broken; the coincidence filter did it")
