"""
When is the late setting genuinely fresh?
=========================================

The delay-aware bound terms-1 rests on one physical premise: a photon
arriving late must face a setting chosen AFTER the setting its early
twin saw was read off.  That is a statement about station geometry, not
statistics.  With path difference dT, modulator-to-detector delay m, and
switch period s (all in nanoseconds), the premise holds exactly when

    dT > m   and   s < dT - m,

leaving margin dT - m - s.  Zero margin is not enough; the inequalities
are strict.

This demo checks a few stations and prints the local timeline of one.
"""

from franson import (
    StationGeometry,
    check_emission_time_premise,
    classify_event_order,
)

stations = [
    ("table-top, fast switching", StationGeometry(100.0, 20.0, 50.0)),
    ("fiber spool, slow modulator", StationGeometry(10.0, 20.0, 1.0)),
    ("exactly marginal", StationGeometry(100.0, 20.0, 80.0)),
    ("static settings", StationGeometry(100.0, 20.0, float("inf"))),
]

for name, geometry in stations:
    premise = check_emission_time_premise(geometry)
    word = "fresh late setting" if premise.satisfied else "PREMISE FAILS"
    print(f"{name:>28}: margin {premise.margin_ns:8.1f} ns  -> {word}")

print()
geometry = stations[0][1]
print(f"timeline at one detector (path difference {geometry.path_difference_ns:.0f} ns):")
for event in classify_event_order(geometry).events:
    print(f"  {event.time_ns:+8.1f} ns  {event.label}")
