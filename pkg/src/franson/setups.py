"""Apparatus variants and what a Bell violation rules out in each.

The plain unbalanced-interferometer source needs postselection on equal
arrival classes, so a violation there only constrains models in which the
emission time is an element of reality.  Three modified sources change that
accounting: a polarization-entangled source and a switched-mirrors source
remove the postselection entirely (every pair is coincident, full local
realism is tested), and a cross-coupled-interferometer source keeps a 50
percent pair yield but makes the chosen path an element of reality, so the
path-realism bound applies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import RandomSource, SettingsChain, draw_uniforms
from .inequalities import CorrelationTable, ModelClass, Verdict, evaluate
from .quantum import _cell_split, _vis, sample_franson_events


class SetupVariant(Enum):
    FRANSON = "franson"
    POLARIZATION_ENTANGLED = "polarization-entangled"
    SWITCHED_MIRRORS = "switched-mirrors"
    CROSS_COUPLED = "cross-coupled"


def model_class_for(variant: SetupVariant) -> ModelClass:
    """The model family a violation in this setup rules out."""
    if variant is SetupVariant.FRANSON:
        return ModelClass.emission_time_realism()
    if variant is SetupVariant.CROSS_COUPLED:
        return ModelClass.path_realism()
    return ModelClass.plain_local_realism()


def path_is_element_of_reality(variant: SetupVariant) -> bool:
    """Whether each photon's path can be assigned before the settings act.

    True for every variant except the plain interferometric setup, where a
    pre-assigned path would destroy the interference being measured.
    """
    return variant is not SetupVariant.FRANSON


def expected_coincidence_fraction(variant: SetupVariant) -> float:
    if variant in (SetupVariant.POLARIZATION_ENTANGLED, SetupVariant.SWITCHED_MIRRORS):
        return 1.0
    return 0.5


@dataclass(frozen=True)
class SetupRun:
    """One simulated correlation scan of a setup."""

    variant: SetupVariant
    table: CorrelationTable
    coincidence_fraction: float
    verdict: Verdict
    trials_per_pair: int

    def to_json_dict(self) -> dict:
        return {
            "variant": self.variant.value,
            "coincidence_fraction": self.coincidence_fraction,
            "trials_per_pair": self.trials_per_pair,
            "table": self.table.to_json_dict(),
            "verdict": self.verdict.to_json_dict(),
        }


def _sample_full_coincidence(phi, psi, visibility, rs, start, count):
    """Sources where both photons always reach opposite sites.

    A shared routing bit replaces the arm lottery (draw 2t); outcomes come
    from the ideal conditional distribution (draw 2t+1).  Every trial is a
    coincidence.
    """
    v = _vis(visibility)
    u = draw_uniforms(rs, 2 * start, 2 * count)
    u_out = u[1::2]
    c = np.full(count, v * math.cos(phi + psi))
    x1, x2 = _cell_split(u_out, c)
    coincident = np.ones(count, dtype=bool)
    return x1, x2, coincident


def _sample_cross_coupled(phi, psi, visibility, rs, start, count):
    """Cross-coupled interferometers: half of the pairs leave through the
    same port and never form a two-site coincidence; the rest carry the
    ideal correlation."""
    v = _vis(visibility)
    u = draw_uniforms(rs, 2 * start, 2 * count)
    u_route, u_out = u[0::2], u[1::2]
    coincident = u_route < 0.5
    c = np.full(count, v * math.cos(phi + psi))
    x1, x2 = _cell_split(u_out, c)
    return x1, x2, coincident


def _sample_franson_coinc(phi, psi, visibility, rs, start, count):
    x1, x2, late1, late2 = sample_franson_events(phi, psi, visibility, rs, start, count)
    return x1, x2, late1 == late2


_SAMPLERS = {
    SetupVariant.FRANSON: _sample_franson_coinc,
    SetupVariant.POLARIZATION_ENTANGLED: _sample_full_coincidence,
    SetupVariant.SWITCHED_MIRRORS: _sample_full_coincidence,
    SetupVariant.CROSS_COUPLED: _sample_cross_coupled,
}


def sample_setup_pairs(
    variant: SetupVariant,
    phi: float,
    psi: float,
    visibility: float,
    rs: RandomSource,
    start_trial: int,
    count: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Outcome arrays (x1, x2) and the coincidence mask for one setting pair."""
    return _SAMPLERS[variant](phi, psi, visibility, rs, int(start_trial), int(count))


def simulate_setup(
    variant: SetupVariant,
    chain: SettingsChain,
    visibility: float,
    trials_per_pair: int,
    rs: RandomSource,
) -> SetupRun:
    """Scan every setting pair of the chain and judge the declared model class.

    Each pair uses an independent substream of ``rs`` (pair index p maps to
    stream offset p+1), so the run is reproducible under any scheduling.
    """
    table = CorrelationTable()
    n = int(trials_per_pair)
    total = 0
    coinc = 0
    for p, (i, j, _) in enumerate(chain.term_order):
        phi = chain.site1_settings[i].phase
        psi = chain.site2_settings[j].phase
        x1, x2, mask = sample_setup_pairs(variant, phi, psi, visibility, rs.substream(p + 1), 0, n)
        prod = (x1.astype(np.int64) * x2.astype(np.int64))[mask]
        table.set_counts(phi, psi, int(prod.sum()), int(mask.sum()))
        total += n
        coinc += int(mask.sum())
    verdict = evaluate(table, chain, model_class_for(variant))
    return SetupRun(
        variant=variant,
        table=table,
        coincidence_fraction=coinc / total,
        verdict=verdict,
        trials_per_pair=n,
    )
