"""
Checking the bounds by brute force and by search
================================================

Every bound used in the verdicts is a statement about a finite game:
mixtures over deterministic per-setting response maps.  Small games can
be solved exactly by enumerating the deterministic vertices.  Larger
ones (and the equal-mass-constrained one) get a multi-start projected
gradient search, cross-checked for the constrained game by an exact
linear program.

The local delay model itself appears here as a witness: projected onto
game vertices it is a feasible mixture of the outcomes-only class, and
its in-game value is exactly the quantum CHSH maximum.  That is the
precise sense in which outcome-dependent postselection swallows the
quantum correlation.
"""

import math

from franson import (
    GameSpec,
    ModelClass,
    OptimizerBudget,
    aklz_mixed_strategy,
    chain_settings,
    emission_time_lp_value,
    evaluate_mixed,
    max_statistic,
)

chain4 = chain_settings(4)
chain6 = chain_settings(6)

print("exact enumeration, four-term games")
for model in (ModelClass.plain_local_realism(), ModelClass.path_realism()):
    result = max_statistic(GameSpec(model, chain4))
    print(f"  {model.kind.value:>22}: max = {result.value:.6f} over {result.notes}")

print()
print("multi-start search, equal-mass and outcomes-only games")
budget = OptimizerBudget(restarts=32, seed=0)
for model, chain, bound in (
    (ModelClass.emission_time_realism(), chain4, 3.0),
    (ModelClass.emission_time_realism(), chain6, 5.0),
    (ModelClass.outcomes_only(), chain4, 4.0),
):
    result = max_statistic(GameSpec(model, chain), budget)
    print(
        f"  {model.kind.value:>22}, {chain.terms} terms:"
        f" best found {result.value:.9f}, bound {bound}"
    )

print()
lp = emission_time_lp_value(GameSpec(ModelClass.emission_time_realism(), chain4))
print(f"exact LP value of the equal-mass game, 4 terms: {lp:.9f}")

mixed = aklz_mixed_strategy(chain4)
ev = evaluate_mixed(GameSpec(ModelClass.outcomes_only(), chain4), mixed)
print()
print(f"delay model as a mixture of {len(mixed.vertices)} deterministic vertices:")
print(f"  feasible for outcomes-only selection: {ev.feasible}")
print(f"  in-game statistic {ev.statistic:.9f}  = 2*sqrt(2) = {2 * math.sqrt(2):.9f}")
print(f"  per-pair coincidence masses {[round(m, 6) for m in ev.masses]}")
