"""Strategy-space verification of the model-class bounds.

Deterministic local strategies with finitely many settings form the
vertices of each model class; mixtures over them span the whole class.
Classes whose statistic is linear in the mixture (plain local realism,
path realism) are maximized exactly by enumeration.  Classes with
strategy-dependent postselection (outcomes-only selection, emission-time
realism) have a ratio-form statistic and are searched by multi-start
projected-gradient ascent over mixture weights with analytic gradients of
the linear-fractional terms; reports carry the best value found and never
claim exactness for the searched classes.  The emission-time game admits
an independent linear-programming cross-check because its equal-mass
constraints pin every cell mass, making the statistic piecewise linear on
the feasible set.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._gauss import panel_nodes
from .core import (
    TWO_PI,
    DelayClass,
    HiddenVariable,
    SettingsChain,
)
from .inequalities import ModelClass, ModelKind, bound_for
from .lhv import LocalResponse, LocalStrategy

PASS_TOLERANCE = 1e-6
CONSTRAINT_TOLERANCE = 1e-9

# emission-time game formalization note, included in reports
EMISSION_TIME_NOTE = (
    "two-phase game: each run draws independent early and late settings per "
    "side; the delay map sees (lambda, early setting); early detections "
    "report the early outcome under the early setting, late detections the "
    "late outcome under the late setting; coincidence means equal delay "
    "classes; early-early and late-late coincidence mass are both pinned to "
    "1/4 per setting pair (other formalizations of emission-time realism "
    "exist; this one keeps late-side correlations local-realist)"
)


class ResourceLimitError(RuntimeError):
    """A game exceeds the configured enumeration or optimization budget."""


@dataclass(frozen=True)
class SiteVertex:
    """One station's deterministic response maps over the chain's settings.

    ``outcomes`` is the reported outcome per setting (the early-arrival
    outcome in the two-phase game), ``late_outcomes`` the late-arrival
    outcome per setting where the game distinguishes them, ``early`` the
    arrival class per setting, ``detected`` the detection flag per setting.
    """

    outcomes: tuple[int, ...]
    early: tuple[bool, ...]
    detected: tuple[bool, ...]
    late_outcomes: tuple[int, ...] | None = None


@dataclass(frozen=True)
class DeterministicVertex:
    site1: SiteVertex
    site2: SiteVertex


@dataclass(frozen=True)
class MixedStrategy:
    """A probability mixture over deterministic vertices."""

    vertices: tuple[DeterministicVertex, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.vertices) != len(self.weights):
            raise ValueError("one weight per vertex required")
        w = np.asarray(self.weights, dtype=float)
        if w.size == 0 or np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be a probability vector")

    def to_json_dict(self) -> dict:
        def side(v: SiteVertex) -> dict:
            return {
                "outcomes": list(v.outcomes),
                "early": list(v.early),
                "detected": list(v.detected),
                "late_outcomes": None if v.late_outcomes is None else list(v.late_outcomes),
            }

        return {
            "weights": list(self.weights),
            "vertices": [
                {"site1": side(v.site1), "site2": side(v.site2)} for v in self.vertices
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "MixedStrategy":
        def side(s: dict) -> SiteVertex:
            late = s.get("late_outcomes")
            return SiteVertex(
                outcomes=tuple(int(x) for x in s["outcomes"]),
                early=tuple(bool(x) for x in s["early"]),
                detected=tuple(bool(x) for x in s["detected"]),
                late_outcomes=None if late is None else tuple(int(x) for x in late),
            )

        vertices = tuple(
            DeterministicVertex(side(v["site1"]), side(v["site2"])) for v in d["vertices"]
        )
        return cls(vertices=vertices, weights=tuple(float(x) for x in d["weights"]))

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


@dataclass(frozen=True)
class GameSpec:
    """A model class played on the settings and term structure of a chain.

    Settings enter the finite game only through their indices; the bounds
    are setting-independent, which is why verifying them on freshly
    randomized chains is a meaningful falsification exercise.
    """

    model: ModelClass
    chain: SettingsChain

    @property
    def n_settings(self) -> int:
        return self.chain.terms // 2

    @property
    def cells(self) -> tuple[tuple[int, int], ...]:
        return tuple((i, j) for i, j, _ in self.chain.term_order)

    @property
    def has_equal_mass_constraint(self) -> bool:
        return self.model.kind is ModelKind.EMISSION_TIME_REALISM


# ---------------------------------------------------------------------------
# vertex enumeration


def _sign_patterns(n: int) -> np.ndarray:
    bits = (np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1
    return (1 - 2 * bits).astype(np.int8)


def _bool_patterns(n: int) -> np.ndarray:
    bits = (np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1
    return bits.astype(bool)


@dataclass
class _SideArrays:
    outcomes: np.ndarray                 # (S, n) int8
    early: np.ndarray                    # (S, n) bool
    detected: np.ndarray                 # (S, n) bool
    late_outcomes: np.ndarray | None     # (S, n) int8 or None
    n_late: np.ndarray                   # (S,)

    @property
    def size(self) -> int:
        return self.outcomes.shape[0]


def _side_arrays(kind: ModelKind, n: int) -> _SideArrays:
    signs = _sign_patterns(n)
    bools = _bool_patterns(n)
    ones_b = np.ones((1, n), dtype=bool)
    if kind is ModelKind.PLAIN_LOCAL_REALISM:
        out = signs
        early = np.repeat(ones_b, out.shape[0], axis=0)
        det = early.copy()
        late = None
    elif kind is ModelKind.PATH_REALISM:
        # outcome map x constant arrival class
        out = np.repeat(signs, 2, axis=0)
        flags = np.tile(np.array([True, False]), signs.shape[0])
        early = np.repeat(flags[:, None], n, axis=1)
        det = np.ones_like(early)
        late = None
    elif kind is ModelKind.INEFFICIENCY:
        # outcome map x detection map; arrivals all early
        oi, di = np.divmod(np.arange(signs.shape[0] * bools.shape[0]), bools.shape[0])
        out = signs[oi]
        det = bools[di]
        early = np.ones_like(det)
        late = None
    elif kind is ModelKind.DELAYS:
        # outcome map x arrival map; always detected
        oi, ei = np.divmod(np.arange(signs.shape[0] * bools.shape[0]), bools.shape[0])
        out = signs[oi]
        early = bools[ei]
        det = np.ones_like(early)
        late = None
    elif kind is ModelKind.OUTCOMES_ONLY:
        # outcome map x arrival map x detection map
        total = signs.shape[0] * bools.shape[0] * bools.shape[0]
        idx = np.arange(total)
        oi, rest = np.divmod(idx, bools.shape[0] * bools.shape[0])
        ei, di = np.divmod(rest, bools.shape[0])
        out = signs[oi]
        early = bools[ei]
        det = bools[di]
        late = None
    elif kind is ModelKind.EMISSION_TIME_REALISM:
        # early-outcome map x late-outcome map x arrival map; always detected
        total = signs.shape[0] * signs.shape[0] * bools.shape[0]
        idx = np.arange(total)
        oi, rest = np.divmod(idx, signs.shape[0] * bools.shape[0])
        li, ei = np.divmod(rest, bools.shape[0])
        out = signs[oi]
        late = signs[li]
        early = bools[ei]
        det = np.ones_like(early)
    else:  # pragma: no cover
        raise ValueError(f"unsupported model kind {kind}")
    return _SideArrays(
        outcomes=out,
        early=early,
        detected=det,
        late_outcomes=late,
        n_late=(~early).sum(axis=1),
    )


def _site_vertex(sides: _SideArrays, k: int) -> SiteVertex:
    late = sides.late_outcomes
    return SiteVertex(
        outcomes=tuple(int(x) for x in sides.outcomes[k]),
        early=tuple(bool(x) for x in sides.early[k]),
        detected=tuple(bool(x) for x in sides.detected[k]),
        late_outcomes=None if late is None else tuple(int(x) for x in late[k]),
    )


DEFAULT_VERTEX_LIMIT = 1 << 21


def enumerate_vertices(game: GameSpec, limit: int = DEFAULT_VERTEX_LIMIT) -> list[DeterministicVertex]:
    """All joint deterministic strategies of the game.

    Raises ResourceLimitError when the joint count exceeds ``limit``.
    """
    n = game.n_settings
    s1 = _side_arrays(game.model.kind, n)
    s2 = _side_arrays(game.model.kind, n)
    total = s1.size * s2.size
    if total > limit:
        raise ResourceLimitError(
            f"{total} joint vertices exceed the limit of {limit}; raise the "
            "limit or use the mixture optimizer"
        )
    v1 = [_site_vertex(s1, k) for k in range(s1.size)]
    v2 = [_site_vertex(s2, k) for k in range(s2.size)]
    return [DeterministicVertex(a, b) for a, b in itertools.product(v1, v2)]


# ---------------------------------------------------------------------------
# mixture evaluation


def _cell_indices(game: GameSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    a_idx = np.array([i for i, _, _ in game.chain.term_order])
    b_idx = np.array([j for _, j, _ in game.chain.term_order])
    signs = np.array([s for _, _, s in game.chain.term_order], dtype=float)
    return a_idx, b_idx, signs


def _support_matrices(
    game: GameSpec, s1: _SideArrays, s2: _SideArrays, idx1: np.ndarray, idx2: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Per-atom cell masses and signed numerators, shapes (K, terms)."""
    a_idx, b_idx, _ = _cell_indices(game)
    n = game.n_settings
    o = (
        s1.outcomes[idx1][:, a_idx].astype(np.float64)
        * s2.outcomes[idx2][:, b_idx].astype(np.float64)
    )
    e1 = s1.early[idx1][:, a_idx]
    e2 = s2.early[idx2][:, b_idx]
    kind = game.model.kind
    if kind is ModelKind.EMISSION_TIME_REALISM:
        ee = (e1 & e2).astype(np.float64)
        llw = (s1.n_late[idx1] * s2.n_late[idx2]).astype(np.float64)[:, None] / n**2
        ol = (
            s1.late_outcomes[idx1][:, a_idx].astype(np.float64)
            * s2.late_outcomes[idx2][:, b_idx].astype(np.float64)
        )
        mass = ee + llw
        num = ee * o + llw * ol
        return mass, num
    det = s1.detected[idx1][:, a_idx] & s2.detected[idx2][:, b_idx]
    if kind is ModelKind.PLAIN_LOCAL_REALISM:
        sel = np.ones_like(o)
    else:
        sel = (det & (e1 == e2)).astype(np.float64)
    return sel, sel * o


def _constraints(game: GameSpec, mass_components) -> tuple[np.ndarray, np.ndarray]:
    """Equality system A w = b for the game (always includes the simplex sum)."""
    ee, llw, K = mass_components
    rows = [np.ones(K)]
    b = [1.0]
    if game.has_equal_mass_constraint:
        rows = [ee[:, t] for t in range(ee.shape[1])] + [llw[:, 0]] + rows
        b = [0.25] * ee.shape[1] + [0.25] + b
    return np.vstack(rows), np.array(b)


def _mass_parts(game: GameSpec, s1, s2, idx1, idx2):
    a_idx, b_idx, _ = _cell_indices(game)
    n = game.n_settings
    e1 = s1.early[idx1][:, a_idx]
    e2 = s2.early[idx2][:, b_idx]
    ee = (e1 & e2).astype(np.float64)
    llw = (s1.n_late[idx1] * s2.n_late[idx2]).astype(np.float64)[:, None] / n**2
    return ee, llw, idx1.size


MIN_CELL_MASS = 1e-12


def _statistic(w, mass, num, signs):
    m = w @ mass
    nu = w @ num
    m_safe = np.maximum(m, MIN_CELL_MASS)
    corr = nu / m_safe
    signed = signs * corr
    groups = signed[0::2] + signed[1::2]
    stat = float(np.abs(groups).sum())
    return stat, corr, m, groups


def _gradient(w, mass, num, signs, corr, m, groups):
    sig = np.where(groups >= 0.0, 1.0, -1.0)
    coef = np.repeat(sig, 2) * signs / np.maximum(m, MIN_CELL_MASS)
    return (num - corr[None, :] * mass) @ coef


@dataclass(frozen=True)
class GameEvaluation:
    """A mixture's statistic with per-cell detail and feasibility checks."""

    statistic: float
    correlations: tuple[float, ...]
    masses: tuple[float, ...]
    constraint_residual: float
    feasible: bool


def _mixture_indices(game: GameSpec, strategy: MixedStrategy, s1: _SideArrays, s2: _SideArrays):
    """Map a MixedStrategy's vertices onto rows of the side arrays."""

    def row_key(v: SiteVertex):
        return (v.outcomes, v.early, v.detected, v.late_outcomes)

    def side_lookup(s: _SideArrays):
        table = {}
        for k in range(s.size):
            table[row_key(_site_vertex(s, k))] = k
        return table

    t1 = side_lookup(s1)
    t2 = side_lookup(s2)
    idx1 = np.empty(len(strategy.vertices), dtype=np.int64)
    idx2 = np.empty(len(strategy.vertices), dtype=np.int64)
    for k, v in enumerate(strategy.vertices):
        k1 = t1.get(row_key(v.site1))
        k2 = t2.get(row_key(v.site2))
        if k1 is None or k2 is None:
            raise ValueError("strategy contains a vertex outside this game's class")
        idx1[k], idx2[k] = k1, k2
    return idx1, idx2


def evaluate_mixed(game: GameSpec, strategy: MixedStrategy) -> GameEvaluation:
    """Re-evaluate a mixture in the game; checks class membership and
    constraint residuals rather than trusting the caller."""
    n = game.n_settings
    s1 = _side_arrays(game.model.kind, n)
    s2 = _side_arrays(game.model.kind, n)
    idx1, idx2 = _mixture_indices(game, strategy, s1, s2)
    w = np.asarray(strategy.weights, dtype=float)
    _, _, signs = _cell_indices(game)
    mass, num = _support_matrices(game, s1, s2, idx1, idx2)
    stat, corr, m, _ = _statistic(w, mass, num, signs)
    residual = abs(float(w.sum()) - 1.0)
    if game.has_equal_mass_constraint:
        ee, llw, _ = _mass_parts(game, s1, s2, idx1, idx2)
        residual = max(
            residual,
            float(np.max(np.abs(w @ ee - 0.25))),
            abs(float(w @ llw[:, 0]) - 0.25),
        )
    feasible = bool(np.all(m > MIN_CELL_MASS)) and residual <= CONSTRAINT_TOLERANCE
    return GameEvaluation(
        statistic=stat,
        correlations=tuple(float(c) for c in corr),
        masses=tuple(float(x) for x in m),
        constraint_residual=residual,
        feasible=feasible,
    )


# ---------------------------------------------------------------------------
# projections


def _project_simplex(y: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u * np.arange(1, y.size + 1) > css)[0][-1]
    tau = css[rho] / (rho + 1.0)
    return np.maximum(y - tau, 0.0)


def _project_affine_nonneg(
    y: np.ndarray, A: np.ndarray, b: np.ndarray, nu0: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray, bool]:
    """Euclidean projection onto {w >= 0, A w = b} by a dual Newton method.

    The dual of the projection is the smooth convex program
    min over nu of f(nu) = 0.5*||max(0, y - A^T nu)||^2 + b^T nu, whose
    gradient is b - A w(nu) with w(nu) = max(0, y - A^T nu); at any nu with
    zero gradient, w(nu) is the exact projection (KKT of a strongly convex
    program).  Three phases: semismooth Newton with Armijo backtracking on
    f (fast and almost always sufficient), then a quasi-Newton pass on the
    dual when the line search stalls, then pure Newton steps judged by the
    constraint residual, which stay informative after differences in f have
    shrunk below float resolution.  A False flag therefore means the
    constraint set itself is infeasible or pathologically conditioned.
    """
    m = A.shape[0]
    nu = np.zeros(m) if nu0 is None or nu0.shape != (m,) else nu0.copy()

    def w_of(v):
        return np.maximum(y - A.T @ v, 0.0)

    def f(v):
        w = w_of(v)
        return 0.5 * float(np.square(w).sum()) + float(b @ v), w

    def newton_step(v, resid):
        active = (y - A.T @ v) > 0.0
        As = A[:, active]
        G = As @ As.T
        # minimum-norm solve: the active set can be smaller than the
        # constraint count, leaving G rank deficient, and any null-space
        # component of the step is useless but unbounded
        try:
            return np.linalg.lstsq(G, resid, rcond=1e-10)[0]
        except np.linalg.LinAlgError:
            return resid.copy()

    fv, w = f(nu)
    for _ in range(80):
        resid = A @ w - b
        if float(np.max(np.abs(resid))) < 5e-12:
            return w, nu, True
        step = newton_step(nu, resid)
        # grad f = -resid, so a descent direction d needs resid @ d > 0
        improved = False
        for direction in (step, resid):
            slope = float(-resid @ direction)
            if -slope < 1e-17 * (1.0 + abs(fv)):
                continue
            alpha = 1.0
            for _ in range(40):
                f_try, w_try = f(nu + alpha * direction)
                if f_try <= fv + 1e-4 * alpha * slope:
                    nu = nu + alpha * direction
                    fv, w = f_try, w_try
                    improved = True
                    break
                alpha *= 0.5
            if improved:
                break
        if not improved:
            break  # f comparisons hit their numerical floor

    def local_polish(v):
        # Undamped Newton accepted only on strict residual decrease.  Near
        # the solution this is superlinear while f-based tests are blind,
        # because |f| can exceed the residual by fifteen orders of magnitude.
        w = w_of(v)
        rn = float(np.max(np.abs(A @ w - b)))
        best = (rn, w, v)
        for _ in range(15):
            if rn < 5e-12:
                break
            step = newton_step(v, A @ w - b)
            v2 = v + step
            w2 = w_of(v2)
            rn2 = float(np.max(np.abs(A @ w2 - b)))
            if rn2 >= rn:
                break
            v, w, rn = v2, w2, rn2
            if rn < best[0]:
                best = (rn, w, v)
        return best

    rn, w, nu = local_polish(nu)
    if rn >= 1e-10:
        # Global rescue for the rare instances where the Newton system is
        # inconsistent with the residual and the Armijo loop cannot tell
        # progress from noise.  BFGS on the smooth dual lands close enough
        # for the polish above to finish the job.
        from scipy.optimize import minimize

        def fg(v):
            wv = w_of(v)
            value = 0.5 * float(np.square(wv).sum()) + float(b @ v)
            return value, b - A @ wv

        res = minimize(
            fg, nu, jac=True, method="BFGS",
            options={"maxiter": 1000, "gtol": 1e-12},
        )
        rn2, w2, nu2 = local_polish(res.x)
        if rn2 < rn:
            rn, w, nu = rn2, w2, nu2
    return w, nu, bool(rn < 1e-10)


# ---------------------------------------------------------------------------
# the optimizer


@dataclass(frozen=True)
class OptimizerBudget:
    """Effort knobs for the mixture search."""

    restarts: int = 64
    iterations: int = 220
    support_size: int = 192
    column_rounds: int = 2
    initial_step: float = 0.25
    seed: int = 0
    vertex_limit: int = DEFAULT_VERTEX_LIMIT


@dataclass(frozen=True)
class MaxStatisticResult:
    value: float
    witness: MixedStrategy
    exact: bool
    restarts_used: int
    notes: str = ""


def _exact_vertex_max(game: GameSpec) -> MaxStatisticResult:
    """Exact maximum for classes whose statistic is linear in the mixture.

    Conditional weights then do not depend on the settings, so the maximum
    over mixtures is attained at a single deterministic vertex.
    """
    n = game.n_settings
    s1 = _side_arrays(game.model.kind, n)
    s2 = _side_arrays(game.model.kind, n)
    a_idx, b_idx, signs = _cell_indices(game)
    f1 = s1.outcomes[:, a_idx].astype(np.float64)
    f2 = s2.outcomes[:, b_idx].astype(np.float64)
    corr = f1[:, None, :] * f2[None, :, :]
    if game.model.kind is ModelKind.PATH_REALISM:
        # only vertices with matching constant arrival classes coincide at all
        c1 = s1.early[:, 0]
        c2 = s2.early[:, 0]
        valid = c1[:, None] == c2[None, :]
    else:
        valid = np.ones((s1.size, s2.size), dtype=bool)
    signed = corr * signs[None, None, :]
    groups = signed[:, :, 0::2] + signed[:, :, 1::2]
    stats = np.abs(groups).sum(axis=2)
    stats = np.where(valid, stats, -np.inf)
    k1, k2 = np.unravel_index(np.argmax(stats), stats.shape)
    witness = MixedStrategy(
        vertices=(DeterministicVertex(_site_vertex(s1, int(k1)), _site_vertex(s2, int(k2))),),
        weights=(1.0,),
    )
    return MaxStatisticResult(
        value=float(stats[k1, k2]),
        witness=witness,
        exact=True,
        restarts_used=0,
        notes="complete vertex enumeration",
    )


def _restart_support(game, s1, s2, budget, rng):
    """Support atoms for one restart: a feasibility core plus random atoms."""
    n = game.n_settings
    S1, S2 = s1.size, s2.size
    picks1: list[int] = []
    picks2: list[int] = []
    if game.has_equal_mass_constraint:
        # the four all-early / all-late arrival patterns with random outcome
        # maps keep the equal-mass system solvable from the first iterate
        def et_index(out_i, late_i, early_i):
            return (out_i * 2**n + late_i) * 2**n + early_i

        all_early = 2**n - 1  # bool pattern index with every bit set
        all_late = 0
        for ep1, ep2 in ((all_early, all_early), (all_early, all_late),
                         (all_late, all_early), (all_late, all_late)):
            picks1.append(et_index(rng.integers(2**n), rng.integers(2**n), ep1))
            picks2.append(et_index(rng.integers(2**n), rng.integers(2**n), ep2))
        # single-early arrival maps let the search place early mass per cell
        for a in range(n):
            for b in range(n):
                for _ in range(2):
                    picks1.append(et_index(rng.integers(2**n), rng.integers(2**n), 1 << a))
                    picks2.append(et_index(rng.integers(2**n), rng.integers(2**n), 1 << b))
    k = len(picks1)
    extra = max(budget.support_size - k, 8)
    picks1.extend(int(x) for x in rng.integers(S1, size=extra))
    picks2.extend(int(x) for x in rng.integers(S2, size=extra))
    idx1 = np.array(picks1, dtype=np.int64)
    idx2 = np.array(picks2, dtype=np.int64)
    w0 = np.zeros(idx1.size)
    if game.has_equal_mass_constraint:
        w0[:4] = 0.25
    else:
        w0[:] = 1.0 / idx1.size
        w0 = 0.5 * w0 + 0.5 * rng.dirichlet(np.ones(idx1.size))
    return idx1, idx2, w0


def _cg_scores(game, s1, s2, coef_over_m, corr_vec):
    """Insertion derivative of the statistic for every joint vertex.

    score(v) = sum_t c_t * (NUM_v[t] - corr_t * MASS_v[t]) with
    c_t = coef_t / m_t; every component factorizes over the sites, so the
    whole (S1, S2) score matrix is a handful of small matrix products.
    """
    a_idx, b_idx, _ = _cell_indices(game)
    n = game.n_settings
    c = coef_over_m
    d = coef_over_m * corr_vec
    kind = game.model.kind

    def prod(f1, f2, coeff):
        return (f1 * coeff[None, :]) @ f2.T

    o1 = s1.outcomes[:, a_idx].astype(np.float64)
    o2 = s2.outcomes[:, b_idx].astype(np.float64)
    e1 = s1.early[:, a_idx].astype(np.float64)
    e2 = s2.early[:, b_idx].astype(np.float64)
    if kind is ModelKind.EMISSION_TIME_REALISM:
        l1 = s1.late_outcomes[:, a_idx].astype(np.float64)
        l2 = s2.late_outcomes[:, b_idx].astype(np.float64)
        nl1 = (s1.n_late / n).astype(np.float64)
        nl2 = (s2.n_late / n).astype(np.float64)
        score = prod(e1 * o1, e2 * o2, c) - prod(e1, e2, d)
        score += (
            prod(nl1[:, None] * l1, nl2[:, None] * l2, c)
            - np.outer(nl1, nl2) * d.sum()
        )
        return score
    det1 = s1.detected[:, a_idx].astype(np.float64)
    det2 = s2.detected[:, b_idx].astype(np.float64)
    # selection = det1*det2*(e1*e2 + (1-e1)(1-e2))
    g1, g2 = det1 * e1, det2 * e2
    h1, h2 = det1 * (1.0 - e1), det2 * (1.0 - e2)
    score = prod(g1 * o1, g2 * o2, c) + prod(h1 * o1, h2 * o2, c)
    score -= prod(g1, g2, d) + prod(h1, h2, d)
    return score


def max_statistic(game: GameSpec, budget: OptimizerBudget | None = None) -> MaxStatisticResult:
    """Largest statistic found within the class, with a witness mixture.

    Exact (enumeration) for plain local realism and path realism; a
    multi-start projected-gradient search for outcomes-only selection and
    emission-time realism.
    """
    kind = game.model.kind
    if kind in (ModelKind.PLAIN_LOCAL_REALISM, ModelKind.PATH_REALISM):
        return _exact_vertex_max(game)
    if kind in (ModelKind.INEFFICIENCY, ModelKind.DELAYS):
        raise ValueError(
            f"{kind.value} has no finite-settings game here; its bound is "
            "analytic in the efficiency (see bound_for)"
        )
    budget = budget or OptimizerBudget()
    n = game.n_settings
    s1 = _side_arrays(kind, n)
    s2 = _side_arrays(kind, n)
    if s1.size * s2.size > budget.vertex_limit:
        raise ResourceLimitError(
            f"{s1.size * s2.size} joint vertices exceed the budget limit "
            f"{budget.vertex_limit}"
        )
    _, _, signs = _cell_indices(game)
    best_value = -math.inf
    best_support = None
    rng_master = np.random.default_rng(budget.seed)
    full_support = kind is ModelKind.OUTCOMES_ONLY and s1.size * s2.size <= 4096
    for restart in range(budget.restarts):
        rng = np.random.default_rng(rng_master.integers(2**63))
        if full_support:
            g1, g2 = np.meshgrid(np.arange(s1.size), np.arange(s2.size), indexing="ij")
            idx1, idx2 = g1.ravel(), g2.ravel()
            w = rng.dirichlet(np.ones(idx1.size)) * 0.5
            w += 0.5 / idx1.size
        else:
            idx1, idx2, w = _restart_support(game, s1, s2, budget, rng)
        mass, num = _support_matrices(game, s1, s2, idx1, idx2)
        A, b = _constraints(game, _mass_parts(game, s1, s2, idx1, idx2))
        nu = None
        simplex_only = A.shape[0] == 1

        def project(vec, nu_state):
            if simplex_only:
                return _project_simplex(vec), nu_state, True
            return _project_affine_nonneg(vec, A, b, nu_state)

        w, nu, ok = project(w, nu)
        if not ok:
            continue
        step = budget.initial_step
        stat, corr, m, groups = _statistic(w, mass, num, signs)
        for round_no in range(budget.column_rounds + 1):
            stale = 0
            for _ in range(budget.iterations):
                grad = _gradient(w, mass, num, signs, corr, m, groups)
                gmax = float(np.max(np.abs(grad)))
                if gmax == 0.0:
                    break
                w_try, nu_try, ok = project(w + step * grad / gmax, nu)
                if not ok:
                    break
                s_try, corr_t, m_t, groups_t = _statistic(w_try, mass, num, signs)
                if s_try >= stat - 1e-12:
                    stale = stale + 1 if s_try - stat < 1e-11 else 0
                    w, stat, corr, m, groups, nu = w_try, s_try, corr_t, m_t, groups_t, nu_try
                    step = min(step * 1.15, 1.0)
                else:
                    step *= 0.5
                    stale += 1
                    if step < 1e-7:
                        break
                if stale >= 25:
                    break
            if full_support or round_no == budget.column_rounds:
                break
            # column generation: pull in the vertices with the largest
            # insertion derivative and keep climbing
            sig = np.where(groups >= 0.0, 1.0, -1.0)
            coef = np.repeat(sig, 2) * signs / np.maximum(m, MIN_CELL_MASS)
            scores = _cg_scores(game, s1, s2, coef, corr)
            taken = set(zip(idx1.tolist(), idx2.tolist()))
            flat_order = np.argsort(scores, axis=None)[::-1]
            added = 0
            new1, new2 = [], []
            for f in flat_order[: 4 * 16]:
                i, j = np.unravel_index(int(f), scores.shape)
                if (int(i), int(j)) in taken:
                    continue
                new1.append(int(i))
                new2.append(int(j))
                added += 1
                if added >= 16:
                    break
            if not added:
                break
            idx1 = np.concatenate([idx1, np.array(new1, dtype=np.int64)])
            idx2 = np.concatenate([idx2, np.array(new2, dtype=np.int64)])
            w = np.concatenate([w, np.zeros(added)])
            mass, num = _support_matrices(game, s1, s2, idx1, idx2)
            A, b = _constraints(game, _mass_parts(game, s1, s2, idx1, idx2))
            nu = None
            stat, corr, m, groups = _statistic(w, mass, num, signs)
        feasible = bool(np.all(m > MIN_CELL_MASS))
        if feasible and stat > best_value:
            best_value = stat
            keep = w > 0.0
            best_support = (idx1[keep], idx2[keep], w[keep])
    if best_support is None:
        raise RuntimeError("optimizer found no feasible mixture; raise the budget")
    idx1, idx2, w = best_support
    vertices = tuple(
        DeterministicVertex(_site_vertex(s1, int(i)), _site_vertex(s2, int(j)))
        for i, j in zip(idx1, idx2)
    )
    witness = MixedStrategy(vertices=vertices, weights=tuple(float(x) for x in w / w.sum()))
    notes = "multi-start projected gradient over mixture weights"
    if game.has_equal_mass_constraint:
        notes += "; " + EMISSION_TIME_NOTE
    return MaxStatisticResult(
        value=float(best_value),
        witness=witness,
        exact=False,
        restarts_used=budget.restarts,
        notes=notes,
    )


# ---------------------------------------------------------------------------
# linear-programming cross-check for the emission-time game


def emission_time_lp_value(game: GameSpec) -> float:
    """Exact in-game maximum of the emission-time statistic, via LPs.

    On the equal-mass manifold every cell mass equals 1/(2 n^2), so each
    absolute-value sign pattern turns the statistic into a linear
    functional of the mixture; the maximum over the 2^(terms/2) patterns of
    the LP optima is the exact game value.  Independent of the
    projected-gradient search path.
    """
    from scipy.optimize import linprog

    if game.model.kind is not ModelKind.EMISSION_TIME_REALISM:
        raise ValueError("the LP cross-check applies to the emission-time game")
    n = game.n_settings
    s1 = _side_arrays(game.model.kind, n)
    s2 = _side_arrays(game.model.kind, n)
    a_idx, b_idx, signs = _cell_indices(game)
    T = len(a_idx)
    S1, S2 = s1.size, s2.size
    e1 = s1.early[:, a_idx].astype(np.float64)
    e2 = s2.early[:, b_idx].astype(np.float64)
    o1 = s1.outcomes[:, a_idx].astype(np.float64)
    o2 = s2.outcomes[:, b_idx].astype(np.float64)
    l1 = s1.late_outcomes[:, a_idx].astype(np.float64)
    l2 = s2.late_outcomes[:, b_idx].astype(np.float64)
    nl1 = s1.n_late.astype(np.float64) / n
    nl2 = s2.n_late.astype(np.float64) / n
    # equality rows: per-cell early-early mass, the late-late mass, total mass
    rows = [np.outer(e1[:, t], e2[:, t]).ravel() for t in range(T)]
    rows.append(np.outer(nl1, nl2).ravel())
    rows.append(np.ones(S1 * S2))
    A_eq = np.vstack(rows)
    b_eq = np.array([0.25] * T + [0.25, 1.0])
    best = -math.inf
    half = T // 2
    for pattern in itertools.product((1.0, -1.0), repeat=half):
        coef = np.repeat(np.array(pattern), 2) * signs
        obj = np.zeros(S1 * S2)
        for t in range(T):
            # corr_t = 2 * (early part + late part) once masses are pinned
            obj += 2.0 * coef[t] * (
                np.outer(e1[:, t] * o1[:, t], e2[:, t] * o2[:, t]).ravel()
                + np.outer(nl1 * l1[:, t], nl2 * l2[:, t]).ravel()
            )
        res = linprog(-obj, A_eq=A_eq, b_eq=b_eq, bounds=(0.0, None), method="highs")
        if not res.success:
            raise RuntimeError(f"LP cross-check failed: {res.message}")
        best = max(best, float(-res.fun))
    return best


# ---------------------------------------------------------------------------
# bound verification reports


@dataclass(frozen=True)
class BoundReport:
    """Outcome of checking a class bound against the strategy search."""

    model: ModelClass
    terms: int
    bound: float
    method: str
    best_value: float
    margin: float
    passed: bool
    exact: bool
    restarts: int
    notes: str
    lp_value: float | None = None
    witness: MixedStrategy | None = field(default=None, compare=False)

    def to_json_dict(self, include_witness: bool = True) -> dict:
        d = {
            "model": self.model.to_json_dict(),
            "terms": self.terms,
            "bound": self.bound,
            "method": self.method,
            "best_value": self.best_value,
            "margin": self.margin,
            "passed": self.passed,
            "exact": self.exact,
            "restarts": self.restarts,
            "notes": self.notes,
            "lp_value": self.lp_value,
        }
        if include_witness and self.witness is not None:
            d["witness"] = self.witness.to_json_dict()
        return d


def verify_bound(
    game: GameSpec, budget: OptimizerBudget | None = None, lp_check: bool = False
) -> BoundReport:
    """Search the class for the bound's worst case and report PASS/FAIL.

    PASS means the best value found does not exceed the closed-form bound
    beyond a 1e-6 numerical allowance.  For searched (non-exact) classes a
    PASS is evidence, not proof; the margin and budget are reported so the
    search can be judged.
    """
    result = max_statistic(game, budget)
    bound = bound_for(game.model, game.chain.terms)
    lp_value = None
    if lp_check and game.model.kind is ModelKind.EMISSION_TIME_REALISM:
        lp_value = emission_time_lp_value(game)
    best = result.value
    return BoundReport(
        model=game.model,
        terms=game.chain.terms,
        bound=bound,
        method="enumeration" if result.exact else "projected-gradient",
        best_value=best,
        margin=bound - best,
        passed=best <= bound + PASS_TOLERANCE,
        exact=result.exact,
        restarts=result.restarts_used,
        notes=result.notes,
        lp_value=lp_value,
        witness=result.witness,
    )


# ---------------------------------------------------------------------------
# the delay-based local model as a finite-game witness


def aklz_mixed_strategy(chain: SettingsChain, n_base: int = 512, order: int = 16) -> MixedStrategy:
    """Project the delay-based local model onto the finite game of a chain.

    For fixed theta the model's response maps over the chain's settings are
    piecewise constant in r with analytically known breakpoints, and the
    maps themselves change only at finitely many theta values; integrating
    panel by panel gives the exact mixture weights over deterministic
    vertices.  The induced mixture is a feasible point of the
    outcomes-only game and reproduces the model's statistic.
    """
    a = [s.phase for s in chain.site1_settings]
    b = [s.phase for s in chain.site2_settings]
    n = len(a)
    breaks: list[float] = []
    for ph in a:
        breaks += [math.pi / 2 - ph, 3 * math.pi / 2 - ph]
    for ps in b:
        breaks += [ps + math.pi / 2, ps + 3 * math.pi / 2]
    for i in range(n):
        for j in range(i + 1, n):
            base = -(a[i] + a[j]) / 2.0
            breaks += [base + k * math.pi / 2.0 for k in range(4)]
    nodes, wts = panel_nodes(breaks, n_base=n_base, order=order)
    # panel boundaries: recover panels from the node layout
    panels = nodes.reshape(-1, order)
    pwts = wts.reshape(-1, order)
    acc: dict[tuple, float] = {}
    for p in range(panels.shape[0]):
        th = panels[p]
        ww = pwts[p]
        mid = float(th[order // 2])
        o1 = tuple(1 if math.cos(mid + ph) >= 0 else -1 for ph in a)
        o2 = tuple(1 if math.cos(mid - ps) >= 0 else -1 for ps in b)
        t = np.stack([(np.pi / 8.0) * np.abs(np.cos(th + ph)) for ph in a])  # (n, order)
        t_mid = t[:, order // 2]
        perm = np.argsort(t_mid, kind="stable")
        t_sorted = t[perm]  # ascending thresholds along each node
        edges = np.vstack([np.zeros(order), t_sorted, np.full(order, 0.5)])
        lengths = np.diff(edges, axis=0)  # (n+1, order)
        for k in range(n + 1):
            weight = float((lengths[k] * ww).sum()) / TWO_PI
            if weight <= 0.0:
                continue
            # in [T_(k-1), T_(k)) the k smallest thresholds have lapsed:
            # first half of r, those settings arrive late; second half
            # mirrors, they arrive early
            lapsed = frozenset(perm[:k].tolist())
            d1_half1 = tuple(i not in lapsed for i in range(n))
            d1_half2 = tuple(i in lapsed for i in range(n))
            key1 = (o1, o2, d1_half1, True)
            key2 = (o1, o2, d1_half2, False)
            acc[key1] = acc.get(key1, 0.0) + weight
            acc[key2] = acc.get(key2, 0.0) + weight
    total = sum(acc.values())
    if abs(total - 1.0) > 1e-9:
        raise RuntimeError(f"vertex measures sum to {total}, expected 1")
    vertices = []
    weights = []
    all_true = tuple(True for _ in range(n))
    for (o1, o2, d1, d2_early), wgt in sorted(acc.items()):
        vertices.append(
            DeterministicVertex(
                site1=SiteVertex(outcomes=o1, early=d1, detected=all_true),
                site2=SiteVertex(
                    outcomes=o2,
                    early=tuple(d2_early for _ in range(n)),
                    detected=all_true,
                ),
            )
        )
        weights.append(wgt / total)
    return MixedStrategy(vertices=tuple(vertices), weights=tuple(weights))


def strategy_from_mixture(mixed: MixedStrategy, chain: SettingsChain) -> LocalStrategy:
    """Run a finite-game mixture through the event-level simulator.

    The hidden variable's angle selects the vertex (its quantile over the
    mixture weights); each station then answers from its own map.  Only
    single-phase vertices translate; the two-phase emission-time vertices
    have no single-setting response to give.
    """
    if any(v.site1.late_outcomes is not None for v in mixed.vertices):
        raise ValueError("two-phase vertices cannot run the single-setting pipeline")
    cum = np.cumsum(np.asarray(mixed.weights))
    lut1 = {s.key: i for i, s in enumerate(chain.site1_settings)}
    lut2 = {s.key: i for i, s in enumerate(chain.site2_settings)}

    def pick(hv: HiddenVariable) -> DeterministicVertex:
        q = hv.theta / TWO_PI
        k = int(np.searchsorted(cum, q, side="right"))
        return mixed.vertices[min(k, len(mixed.vertices) - 1)]

    def respond(site: int, setting: float, hv: HiddenVariable) -> LocalResponse:
        from .core import setting_key

        lut = lut1 if site == 1 else lut2
        idx = lut.get(setting_key(setting))
        if idx is None:
            raise KeyError(f"setting {setting} is not part of the chain")
        v = pick(hv)
        sv = v.site1 if site == 1 else v.site2
        return LocalResponse(
            outcome=sv.outcomes[idx],
            delay=DelayClass.EARLY if sv.early[idx] else DelayClass.LATE,
            detected=sv.detected[idx],
        )

    return LocalStrategy(
        respond_site1=lambda phi, hv: respond(1, phi, hv),
        respond_site2=lambda psi, hv: respond(2, psi, hv),
    )
