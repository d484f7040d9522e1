import json
import math
from dataclasses import replace

import numpy as np
import pytest

from franson import (
    BoundReport,
    DeterministicVertex,
    GameSpec,
    HiddenVariable,
    MixedStrategy,
    ModelClass,
    OptimizerBudget,
    ResourceLimitError,
    SiteVertex,
    aklz_mixed_strategy,
    chain_settings,
    emission_time_lp_value,
    enumerate_vertices,
    evaluate_mixed,
    max_statistic,
    random_settings_chain,
    strategy_from_mixture,
    verify_bound,
)
from franson.core import RandomSource
from franson.strategyopt import (
    _cell_indices,
    _cg_scores,
    _project_affine_nonneg,
    _project_simplex,
    _side_arrays,
    _statistic,
    _support_matrices,
)

SQRT2 = math.sqrt(2.0)


def game(kind_factory, chain):
    return GameSpec(model=kind_factory(), chain=chain)


@pytest.fixture(scope="module")
def chain4m():
    return chain_settings(4)


@pytest.fixture(scope="module")
def chain6m():
    return chain_settings(6)


@pytest.fixture(scope="module")
def et4_result(chain4m):
    g = game(ModelClass.emission_time_realism, chain4m)
    return g, max_statistic(g, OptimizerBudget(restarts=8, seed=0))


class TestMixedStrategy:
    def _vertex(self, late=False):
        sv = SiteVertex(
            outcomes=(1, -1),
            early=(True, True),
            detected=(True, True),
            late_outcomes=(1, 1) if late else None,
        )
        return DeterministicVertex(sv, sv)

    def test_weight_validation(self):
        v = self._vertex()
        with pytest.raises(ValueError):
            MixedStrategy(vertices=(v,), weights=(0.5, 0.5))
        with pytest.raises(ValueError):
            MixedStrategy(vertices=(v, v), weights=(0.7, 0.7))
        with pytest.raises(ValueError):
            MixedStrategy(vertices=(v,), weights=(-0.2,))
        with pytest.raises(ValueError):
            MixedStrategy(vertices=(), weights=())
        assert MixedStrategy(vertices=(v,), weights=(1.0,)).weights == (1.0,)

    @pytest.mark.parametrize("late", [False, True])
    def test_json_roundtrip(self, late):
        strategy = MixedStrategy(
            vertices=(self._vertex(late), self._vertex(late)), weights=(0.25, 0.75)
        )
        again = MixedStrategy.from_json_dict(json.loads(strategy.to_json()))
        assert again == strategy


class TestGameSpec:
    def test_properties(self, chain4m, chain6m):
        g4 = game(ModelClass.emission_time_realism, chain4m)
        assert g4.n_settings == 2
        assert g4.cells == ((0, 0), (0, 1), (1, 1), (1, 0))
        assert g4.has_equal_mass_constraint
        g6 = game(ModelClass.outcomes_only, chain6m)
        assert g6.n_settings == 3
        assert not g6.has_equal_mass_constraint


class TestEnumeration:
    @pytest.mark.parametrize(
        "factory,count",
        [
            (ModelClass.plain_local_realism, 16),
            (ModelClass.path_realism, 64),
            (ModelClass.emission_time_realism, 4096),
            (ModelClass.outcomes_only, 4096),
        ],
    )
    def test_joint_vertex_counts(self, chain4m, factory, count):
        assert len(enumerate_vertices(game(factory, chain4m))) == count

    def test_emission_time_vertices_carry_late_maps(self, chain4m):
        v = enumerate_vertices(game(ModelClass.emission_time_realism, chain4m))[0]
        assert v.site1.late_outcomes is not None
        assert len(v.site1.late_outcomes) == 2

    def test_resource_limit(self, chain4m):
        with pytest.raises(ResourceLimitError):
            enumerate_vertices(game(ModelClass.plain_local_realism, chain4m), limit=8)
        big = game(ModelClass.emission_time_realism, chain_settings(8))
        with pytest.raises(ResourceLimitError):
            enumerate_vertices(big)


class TestExactMaxima:
    def test_plain_four_terms(self, chain4m):
        result = max_statistic(game(ModelClass.plain_local_realism, chain4m))
        assert result.exact
        assert result.value == pytest.approx(2.0, abs=1e-12)
        assert len(result.witness.vertices) == 1

    def test_plain_six_terms(self, chain6m):
        result = max_statistic(game(ModelClass.plain_local_realism, chain6m))
        assert result.value == pytest.approx(4.0, abs=1e-12)

    def test_path_realism_four_terms(self, chain4m):
        result = max_statistic(game(ModelClass.path_realism, chain4m))
        assert result.exact
        assert result.value == pytest.approx(2.0, abs=1e-12)
        # the witness must use one consistent arrival class on both sides
        v = result.witness.vertices[0]
        assert set(v.site1.early) == set(v.site2.early)

    def test_witness_reproduces_value(self, chain4m):
        g = game(ModelClass.plain_local_realism, chain4m)
        result = max_statistic(g)
        ev = evaluate_mixed(g, result.witness)
        assert ev.statistic == pytest.approx(result.value, abs=1e-12)
        assert ev.feasible

    def test_phase_values_do_not_matter(self):
        rs = RandomSource(seed=99)
        for k in range(3):
            chain = random_settings_chain(6, rs.substream(k))
            result = max_statistic(game(ModelClass.plain_local_realism, chain))
            assert result.value == pytest.approx(4.0, abs=1e-12)

    def test_no_finite_game_for_efficiency_classes(self, chain4m):
        for model in (ModelClass.inefficiency(0.9), ModelClass.delays(0.9)):
            with pytest.raises(ValueError, match="analytic"):
                max_statistic(GameSpec(model=model, chain=chain4m))


class TestOptimizer:
    def test_emission_time_four_terms(self, et4_result):
        g, result = et4_result
        assert not result.exact
        assert result.value <= 3.0 + 1e-6
        assert result.value >= 3.0 - 1e-6

    def test_emission_time_witness_is_feasible(self, et4_result):
        g, result = et4_result
        ev = evaluate_mixed(g, result.witness)
        assert ev.feasible
        assert ev.statistic == pytest.approx(result.value, abs=1e-8)
        # equal early-early and late-late mass forces every cell to 1/2
        for m in ev.masses:
            assert m == pytest.approx(0.5, abs=1e-8)

    def test_outcomes_only_reaches_algebraic_max(self, chain4m):
        g = game(ModelClass.outcomes_only, chain4m)
        result = max_statistic(g, OptimizerBudget(restarts=4, seed=1))
        assert result.value == pytest.approx(4.0, abs=1e-6)
        assert result.value <= 4.0 + 1e-6

    def test_class_ordering(self, chain4m, et4_result):
        plain = max_statistic(game(ModelClass.plain_local_realism, chain4m)).value
        et = et4_result[1].value
        oo = max_statistic(
            game(ModelClass.outcomes_only, chain4m), OptimizerBudget(restarts=4, seed=2)
        ).value
        assert plain <= et + 1e-9 <= oo + 1e-9

    def test_resource_limit_in_optimizer(self):
        g = game(ModelClass.emission_time_realism, chain_settings(8))
        with pytest.raises(ResourceLimitError):
            max_statistic(g, OptimizerBudget(restarts=1, vertex_limit=1000))


class TestEvaluateMixed:
    def test_rejects_vertex_outside_class(self, chain4m):
        g = game(ModelClass.plain_local_realism, chain4m)
        sv = SiteVertex(outcomes=(1, 1), early=(True, False), detected=(True, True))
        foreign = MixedStrategy(
            vertices=(DeterministicVertex(sv, sv),), weights=(1.0,)
        )
        with pytest.raises(ValueError, match="outside this game's class"):
            evaluate_mixed(g, foreign)

    def test_constraint_residual_reported(self, chain4m):
        # a single emission-time vertex cannot satisfy the equal-mass rule
        g = game(ModelClass.emission_time_realism, chain4m)
        v = enumerate_vertices(g)[0]
        ev = evaluate_mixed(g, MixedStrategy(vertices=(v,), weights=(1.0,)))
        assert ev.constraint_residual > 1e-3
        assert not ev.feasible


class TestLpCrossCheck:
    def test_exact_value_four_terms(self, chain4m):
        g = game(ModelClass.emission_time_realism, chain4m)
        assert emission_time_lp_value(g) == pytest.approx(3.0, abs=1e-7)

    def test_only_for_emission_time(self, chain4m):
        with pytest.raises(ValueError):
            emission_time_lp_value(game(ModelClass.plain_local_realism, chain4m))


class TestVerifyBound:
    def test_plain_report(self, chain4m):
        report = verify_bound(game(ModelClass.plain_local_realism, chain4m))
        assert report.passed
        assert report.exact
        assert report.method == "enumeration"
        assert report.bound == 2.0
        assert report.margin == pytest.approx(0.0, abs=1e-12)

    def test_emission_time_report_with_lp(self, chain4m):
        g = game(ModelClass.emission_time_realism, chain4m)
        report = verify_bound(g, OptimizerBudget(restarts=6, seed=3), lp_check=True)
        assert report.passed
        assert not report.exact
        assert report.method == "projected-gradient"
        assert report.lp_value == pytest.approx(3.0, abs=1e-7)
        assert report.best_value == pytest.approx(report.lp_value, abs=1e-6)

    def test_json_dict_witness_toggle(self, chain4m):
        report = verify_bound(game(ModelClass.plain_local_realism, chain4m))
        with_witness = report.to_json_dict()
        assert "witness" in with_witness
        without = report.to_json_dict(include_witness=False)
        assert "witness" not in without
        json.dumps(with_witness)


class TestProjections:
    def test_simplex_known_case(self):
        w = _project_simplex(np.array([0.8, 0.8, -1.0]))
        assert w.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(w >= 0)
        assert w[0] == pytest.approx(0.5)
        assert w[2] == 0.0

    def test_simplex_idempotent(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            y = rng.normal(size=10)
            w = _project_simplex(y)
            assert np.allclose(_project_simplex(w), w, atol=1e-12)

    def test_affine_nonneg_matches_slsqp(self):
        from scipy.optimize import minimize

        rng = np.random.default_rng(18)
        for _ in range(10):
            k, m = 25, 4
            A = np.vstack([np.ones(k), rng.random((m - 1, k))])
            x0 = rng.random(k)
            x0 /= x0.sum()
            b = A @ x0
            y = rng.normal(size=k)
            w, _, ok = _project_affine_nonneg(y, A, b)
            assert ok
            assert np.max(np.abs(A @ w - b)) < 1e-10
            assert np.all(w >= -1e-12)
            ref = minimize(
                lambda x: 0.5 * np.sum((x - y) ** 2),
                x0,
                jac=lambda x: x - y,
                constraints=[{"type": "eq", "fun": lambda x: A @ x - b}],
                bounds=[(0.0, None)] * k,
                method="SLSQP",
            )
            assert 0.5 * np.sum((w - y) ** 2) <= ref.fun + 1e-7


class TestInsertionScores:
    @pytest.mark.parametrize(
        "factory", [ModelClass.emission_time_realism, ModelClass.outcomes_only]
    )
    def test_matches_finite_difference(self, chain4m, factory):
        g = game(factory, chain4m)
        n = g.n_settings
        s1 = _side_arrays(g.model.kind, n)
        s2 = _side_arrays(g.model.kind, n)
        rng = np.random.default_rng(19)
        k = 24
        idx1 = rng.integers(0, s1.size, k)
        idx2 = rng.integers(0, s2.size, k)
        w = rng.dirichlet(np.ones(k))
        _, _, signs = _cell_indices(g)
        mass, num = _support_matrices(g, s1, s2, idx1, idx2)
        stat0, corr, m, groups = _statistic(w, mass, num, signs)
        sig = np.where(groups >= 0.0, 1.0, -1.0)
        coef_over_m = np.repeat(sig, 2) * signs / np.maximum(m, 1e-12)
        scores = _cg_scores(g, s1, s2, coef_over_m, corr)
        eps = 1e-6
        for _ in range(6):
            v1 = int(rng.integers(0, s1.size))
            v2 = int(rng.integers(0, s2.size))
            mass_aug, num_aug = _support_matrices(
                g, s1, s2, np.append(idx1, v1), np.append(idx2, v2)
            )
            stat_eps, _, _, _ = _statistic(
                np.append(w, eps), mass_aug, num_aug, signs
            )
            fd = (stat_eps - stat0) / eps
            assert scores[v1, v2] == pytest.approx(fd, abs=2e-4)


class TestModelWitnessBridge:
    def test_aklz_mixture_is_feasible_and_tight(self, chain4m):
        g = game(ModelClass.outcomes_only, chain4m)
        mixed = aklz_mixed_strategy(chain4m)
        ev = evaluate_mixed(g, mixed)
        assert ev.feasible
        assert ev.statistic == pytest.approx(2 * SQRT2, abs=1e-9)
        for m in ev.masses:
            assert m == pytest.approx(0.5, abs=1e-9)

    def test_aklz_mixture_embeds_in_emission_time_game(self, chain4m):
        # the model's outcome never depends on arrival time, so pinning
        # each vertex's late outcomes to its early ones is faithful
        mixed = aklz_mixed_strategy(chain4m)
        lifted = MixedStrategy(
            vertices=tuple(
                DeterministicVertex(
                    site1=replace(v.site1, late_outcomes=v.site1.outcomes),
                    site2=replace(v.site2, late_outcomes=v.site2.outcomes),
                )
                for v in mixed.vertices
            ),
            weights=mixed.weights,
        )
        ev = evaluate_mixed(game(ModelClass.emission_time_realism, chain4m), lifted)
        assert ev.feasible
        assert ev.constraint_residual <= 1e-9
        # half the coincidence mass sits in the late-late channel, which
        # pairs the deterministic outcome maps across re-randomized
        # settings and therefore cannot beat the plain deterministic value
        # of 2; the early-early half carries the model's 2*sqrt(2)
        assert ev.statistic == pytest.approx((2 * SQRT2 + 2) / 2, abs=1e-9)
        assert ev.statistic < 3.0

    def test_single_phase_mixture_runs_as_strategy(self, chain4m):
        g = game(ModelClass.plain_local_realism, chain4m)
        result = max_statistic(g)
        strategy = strategy_from_mixture(result.witness, chain4m)
        v = result.witness.vertices[0]
        hv = HiddenVariable(theta=0.0, r=0.3)
        for idx, setting in enumerate(chain4m.site1_settings):
            resp = strategy.respond_site1(setting.phase, hv)
            assert resp.outcome == v.site1.outcomes[idx]
        for idx, setting in enumerate(chain4m.site2_settings):
            resp = strategy.respond_site2(setting.phase, hv)
            assert resp.outcome == v.site2.outcomes[idx]

    def test_mixture_quantiles_select_vertices(self, chain4m):
        g = game(ModelClass.plain_local_realism, chain4m)
        vertices = tuple(enumerate_vertices(g)[:2])
        mixed = MixedStrategy(vertices=vertices, weights=(0.25, 0.75))
        strategy = strategy_from_mixture(mixed, chain4m)
        phi = chain4m.site1_settings[0].phase
        lo = strategy.respond_site1(phi, HiddenVariable(theta=0.1 * 2 * math.pi, r=0.5))
        hi = strategy.respond_site1(phi, HiddenVariable(theta=0.9 * 2 * math.pi, r=0.5))
        assert lo.outcome == vertices[0].site1.outcomes[0]
        assert hi.outcome == vertices[1].site1.outcomes[0]

    def test_two_phase_vertices_refuse_single_setting_pipeline(self, et4_result):
        g, result = et4_result
        with pytest.raises(ValueError, match="two-phase"):
            strategy_from_mixture(result.witness, g.chain)

    def test_unknown_setting_raises(self, chain4m):
        g = game(ModelClass.plain_local_realism, chain4m)
        strategy = strategy_from_mixture(max_statistic(g).witness, chain4m)
        with pytest.raises(KeyError):
            strategy.respond_site1(1.2345, HiddenVariable(theta=0.0, r=0.0))
