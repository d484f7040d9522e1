"""Command line front end.

Every subcommand prints one JSON document (stdout by default, ``--out`` to
write a file).  Reports contain no wall-clock data, and all randomness is
counter-based from the given seed, so reruns with the same arguments are
byte-identical.

Exit codes: 0 success, 2 invalid arguments or configuration, 3 resource
limit exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .core import RandomSource, SettingsChain, chain_settings
from .inequalities import (
    ModelClass,
    ModelKind,
    bound_for,
    chained_statistic,
    critical_visibility,
    evaluate,
    statistic_stderr,
    threshold_efficiency,
)
from .lhv import TrialBatch, aklz_strategy, simulate_strategy_pairs
from .quantum import chained_quantum_value, sample_franson_events
from .setups import SetupVariant, simulate_setup
from .spacetime import StationGeometry, check_emission_time_premise, classify_event_order
from .strategyopt import (
    GameSpec,
    OptimizerBudget,
    ResourceLimitError,
    verify_bound,
)
from .timing import (
    InterferometerTiming,
    correlation_from_pairs,
    emit_events_from_batch,
    postselect,
    read_events_csv,
    write_events_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3

_TERM_COUNTS = (4, 6, 8, 10, 12)

_SEARCHABLE = (
    "plain-local-realism",
    "path-realism",
    "emission-time-realism",
    "outcomes-only",
)


class ConfigError(ValueError):
    pass


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset options from the JSON config file, if one was given.

    Explicit command line flags win; config keys use the flag names with
    dashes or underscores.
    """
    path = getattr(args, "config", None)
    if not path:
        return args
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    for key, value in raw.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ConfigError(f"unknown config key: {key}")
        if getattr(args, attr) is None or getattr(args, attr) is False:
            setattr(args, attr, value)
    return args


def _fill_defaults(args: argparse.Namespace, defaults: dict) -> None:
    for attr, value in defaults.items():
        if getattr(args, attr) is None:
            setattr(args, attr, value)


def _timing(args) -> InterferometerTiming:
    return InterferometerTiming(
        path_difference_ns=float(args.path_difference_ns),
        window_ns=float(args.window_ns),
        short_arm_ns=float(args.short_arm_ns),
    )


def _model_class(name: str, eta: float | None) -> ModelClass:
    kind = ModelKind(name)
    if kind in (ModelKind.INEFFICIENCY, ModelKind.DELAYS):
        if eta is None:
            raise ConfigError(f"{name} requires --eta")
        return ModelClass(kind=kind, eta=float(eta))
    return ModelClass(kind=kind)


def _verdict_models(terms: int) -> list[ModelClass]:
    models = [
        ModelClass(kind=ModelKind.EMISSION_TIME_REALISM),
        ModelClass(kind=ModelKind.PLAIN_LOCAL_REALISM),
        ModelClass(kind=ModelKind.OUTCOMES_ONLY),
    ]
    if terms == 4:
        models.append(ModelClass(kind=ModelKind.PATH_REALISM))
    return models


# ---------------------------------------------------------------------------
# simulate


def _pipeline_tables(
    batches: list[TrialBatch],
    chain: SettingsChain,
    timing: InterferometerTiming,
    gap_ns: float,
    events_csv: str | None,
):
    """Emit timed events per setting pair, postselect, and accumulate.

    Each pair's block starts far beyond the previous one so a single merged
    event file still pairs correctly.
    """
    from .core import setting_key
    from .inequalities import CorrelationTable

    table = CorrelationTable()
    all_events = []
    coincidences = 0
    total_trials = 0
    pooled: dict[tuple[int, int], list] = {}
    for p, ((i, j, _), batch) in enumerate(zip(chain.term_order, batches)):
        n = len(batch.outcome1)
        phi = chain.site1_settings[i].phase
        psi = chain.site2_settings[j].phase
        start = p * (n + 8) * gap_ns
        emission = start + gap_ns * np.arange(n, dtype=np.float64)
        events = emit_events_from_batch(batch, emission, timing, phi, psi)
        result = postselect(events, timing)
        correlation_from_pairs(result.pairs, table)
        coincidences += result.coincidences
        total_trials += n
        # each setting shows up in two chain terms; pool its counts so the
        # efficiency matches a re-analysis of the merged event file
        for e in result.report.entries:
            slot = pooled.setdefault(
                (e.site, setting_key(e.setting_rad)), [e.setting_rad, 0, 0]
            )
            slot[1] += e.detected
            slot[2] += e.coincident
        all_events.append(events)
    if events_csv:
        write_events_csv(events_csv, np.concatenate(all_events))
    entries = [
        {
            "site": site,
            "setting_rad": rad,
            "detected": det,
            "coincident": coinc,
            "ratio": coinc / det if det else float("nan"),
        }
        for (site, _), (rad, det, coinc) in sorted(pooled.items())
    ]
    eta = min((e["ratio"] for e in entries), default=float("nan"))
    return table, coincidences / total_trials, {"eta": eta, "entries": entries}


def _simulate_quantum(args) -> dict:
    chain = chain_settings(int(args.terms))
    rs = RandomSource(seed=int(args.seed))
    trials = int(args.trials)
    visibility = float(args.visibility)
    use_pipeline = bool(args.events_csv) or bool(args.pipeline)
    if use_pipeline:
        batches = []
        for p, (i, j, _) in enumerate(chain.term_order):
            phi = chain.site1_settings[i].phase
            psi = chain.site2_settings[j].phase
            x1, x2, late1, late2 = sample_franson_events(
                phi, psi, visibility, rs.substream(p + 1), 0, trials
            )
            ones = np.ones(trials, dtype=bool)
            batches.append(TrialBatch(x1, late1, ones, x2, late2, ones.copy()))
        table, coinc_fraction, efficiency = _pipeline_tables(
            batches, chain, _timing(args), float(args.emission_gap_ns), args.events_csv
        )
    else:
        run = simulate_setup(SetupVariant.FRANSON, chain, visibility, trials, rs)
        table, coinc_fraction, efficiency = run.table, run.coincidence_fraction, None
    stat = chained_statistic(table, chain)
    verdicts = [evaluate(table, chain, m) for m in _verdict_models(chain.terms)]
    return {
        "command": "simulate",
        "source": "quantum",
        "variant": "franson",
        "terms": chain.terms,
        "visibility": visibility,
        "trials_per_pair": trials,
        "seed": int(args.seed),
        "statistic": stat,
        "stderr": statistic_stderr(table, chain),
        "quantum_value": chained_quantum_value(chain.terms),
        "coincidence_fraction": coinc_fraction,
        "efficiency": efficiency,
        "table": table.to_json_dict(),
        "verdicts": [v.to_json_dict() for v in verdicts],
        "events_csv": args.events_csv,
    }


def _simulate_aklz(args) -> dict:
    terms = int(args.terms)
    if terms != 4:
        raise ConfigError("the delay-model source is a 4-term demonstration")
    chain = chain_settings(terms)
    rs = RandomSource(seed=int(args.seed))
    trials = int(args.trials)
    strategy = aklz_strategy()
    batches = [
        simulate_strategy_pairs(
            strategy,
            chain.site1_settings[i].phase,
            chain.site2_settings[j].phase,
            trials,
            rs.substream(p + 1),
        )
        for p, (i, j, _) in enumerate(chain.term_order)
    ]
    table, coinc_fraction, efficiency = _pipeline_tables(
        batches, chain, _timing(args), float(args.emission_gap_ns), args.events_csv
    )
    stat = chained_statistic(table, chain)
    models = [
        ModelClass(kind=ModelKind.PLAIN_LOCAL_REALISM),
        ModelClass(kind=ModelKind.OUTCOMES_ONLY),
        ModelClass(kind=ModelKind.PATH_REALISM),
    ]
    verdicts = [evaluate(table, chain, m) for m in models]
    return {
        "command": "simulate",
        "source": "aklz",
        "variant": "franson",
        "terms": terms,
        "visibility": 1.0,
        "trials_per_pair": trials,
        "seed": int(args.seed),
        "statistic": stat,
        "stderr": statistic_stderr(table, chain),
        "quantum_value": chained_quantum_value(terms),
        "coincidence_fraction": coinc_fraction,
        "efficiency": efficiency,
        "table": table.to_json_dict(),
        "verdicts": [v.to_json_dict() for v in verdicts],
        "events_csv": args.events_csv,
    }


def _simulate_variant(args) -> dict:
    variant = SetupVariant(args.variant)
    chain = chain_settings(int(args.terms))
    rs = RandomSource(seed=int(args.seed))
    run = simulate_setup(variant, chain, float(args.visibility), int(args.trials), rs)
    payload = run.to_json_dict()
    payload["command"] = "simulate"
    payload["source"] = "quantum"
    payload["seed"] = int(args.seed)
    payload["statistic"] = chained_statistic(run.table, chain)
    payload["stderr"] = statistic_stderr(run.table, chain)
    return payload


def _scenario_table1() -> dict:
    rows = []
    for terms in _TERM_COUNTS:
        rows.append(
            {
                "terms": terms,
                "quantum_value": chained_quantum_value(terms),
                "emission_time_bound": bound_for(
                    ModelClass(kind=ModelKind.EMISSION_TIME_REALISM), terms
                ),
                "plain_bound": bound_for(
                    ModelClass(kind=ModelKind.PLAIN_LOCAL_REALISM), terms
                ),
                "critical_visibility": critical_visibility(terms),
            }
        )
    best = min(rows, key=lambda r: r["critical_visibility"])
    return {"command": "simulate", "scenario": "table1", "rows": rows, "best_terms": best["terms"]}


def _scenario_chained6(args) -> dict:
    rows = []
    for vis in (1.0, 0.97, 0.95):
        sub = argparse.Namespace(**vars(args))
        sub.terms = 6
        sub.visibility = vis
        sub.events_csv = None
        sub.pipeline = False
        rows.append(_simulate_quantum(sub))
    return {"command": "simulate", "scenario": "chained6", "rows": rows}


def _cmd_simulate(args) -> dict:
    _fill_defaults(
        args,
        {
            "terms": 4,
            "visibility": 1.0,
            "trials": 200_000,
            "seed": 1,
            "source": "quantum",
            "path_difference_ns": 100.0,
            "window_ns": 1.0,
            "short_arm_ns": 10.0,
            "emission_gap_ns": 1000.0,
        },
    )
    if args.scenario == "table1":
        return _scenario_table1()
    if args.scenario == "aklz-demo":
        args.terms = 4
        return _simulate_aklz(args)
    if args.scenario == "chained6":
        return _scenario_chained6(args)
    if args.scenario is not None:
        raise ConfigError(f"unknown scenario: {args.scenario}")
    if args.variant is not None and args.variant != "franson":
        return _simulate_variant(args)
    if args.source == "aklz":
        return _simulate_aklz(args)
    if args.source == "quantum":
        return _simulate_quantum(args)
    raise ConfigError(f"unknown source: {args.source}")


# ---------------------------------------------------------------------------
# the other subcommands


def _cmd_bounds(args) -> dict:
    _fill_defaults(args, {"terms": 4})
    terms = int(args.terms)
    eta = None if args.eta is None else float(args.eta)
    rows = []
    for kind in ModelKind:
        row: dict = {"model": kind.value}
        needs_eta = kind in (ModelKind.INEFFICIENCY, ModelKind.DELAYS)
        applicable = terms == 4 or kind in (
            ModelKind.PLAIN_LOCAL_REALISM,
            ModelKind.EMISSION_TIME_REALISM,
            ModelKind.OUTCOMES_ONLY,
        )
        if needs_eta:
            row["threshold_efficiency"] = threshold_efficiency(kind)
        if not applicable:
            row["bound"] = None
            row["note"] = "defined for 4 terms only"
        elif needs_eta and eta is None:
            row["bound"] = None
            row["note"] = "pass --eta for a numeric bound"
        else:
            model = _model_class(kind.value, eta)
            row["bound"] = bound_for(model, terms)
        rows.append(row)
    return {
        "command": "bounds",
        "terms": terms,
        "eta": eta,
        "quantum_value": chained_quantum_value(terms),
        "critical_visibility": critical_visibility(terms),
        "rows": rows,
    }


def _cmd_visibility(args) -> dict:
    terms_list = args.terms or list(_TERM_COUNTS)
    rows = []
    for terms in terms_list:
        terms = int(terms)
        cv = critical_visibility(terms)
        rows.append(
            {
                "terms": terms,
                "quantum_value": chained_quantum_value(terms),
                "emission_time_bound": terms - 1.0,
                "critical_visibility": cv,
                "discriminates": cv < 1.0,
            }
        )
    best = min(rows, key=lambda r: r["critical_visibility"])
    return {"command": "visibility", "rows": rows, "best_terms": best["terms"]}


def _cmd_verify_bounds(args) -> dict:
    _fill_defaults(
        args,
        {
            "terms": 4,
            "model_class": "emission-time-realism",
            "restarts": 48,
            "iterations": 220,
            "support_size": 192,
            "seed": 0,
        },
    )
    if args.model_class not in _SEARCHABLE:
        raise ConfigError(
            f"--model-class must be one of {', '.join(_SEARCHABLE)}; "
            "efficiency-based bounds are closed-form (see the bounds command)"
        )
    model = _model_class(args.model_class, None)
    chain = chain_settings(int(args.terms))
    game = GameSpec(model=model, chain=chain)
    budget = OptimizerBudget(
        restarts=int(args.restarts),
        iterations=int(args.iterations),
        support_size=int(args.support_size),
        seed=int(args.seed),
    )
    report = verify_bound(game, budget, lp_check=bool(args.lp_check))
    payload = report.to_json_dict(include_witness=bool(args.witness))
    payload["command"] = "verify-bounds"
    return payload


def _cmd_geometry(args) -> dict:
    geometry = StationGeometry(
        path_difference_ns=float(args.path_difference_ns),
        modulator_to_detector_ns=float(args.modulator_to_detector_ns),
        switch_period_ns=float(args.switch_period_ns),
    )
    premise = check_emission_time_premise(geometry)
    order = classify_event_order(geometry)
    return {
        "command": "geometry",
        "geometry": {
            "path_difference_ns": geometry.path_difference_ns,
            "modulator_to_detector_ns": geometry.modulator_to_detector_ns,
            "switch_period_ns": geometry.switch_period_ns,
        },
        "premise": premise.to_json_dict(),
        "timeline": [
            {"label": e.label, "time_ns": e.time_ns} for e in order.events
        ],
    }


def _cmd_report(args) -> dict:
    _fill_defaults(
        args,
        {
            "terms": 4,
            "path_difference_ns": 100.0,
            "window_ns": 1.0,
            "short_arm_ns": 10.0,
        },
    )
    events = read_events_csv(args.events)
    timing = _timing(args)
    result = postselect(events, timing)
    table = correlation_from_pairs(result.pairs)
    chain = chain_settings(int(args.terms))
    for i, j, _ in chain.term_order:
        if not table.has(chain.site1_settings[i], chain.site2_settings[j]):
            raise ConfigError(
                "events do not cover every setting pair of the "
                f"{chain.terms}-term chain; check --terms"
            )
    if args.model_class:
        models = [_model_class(args.model_class, args.eta)]
    else:
        models = _verdict_models(chain.terms)
    verdicts = [evaluate(table, chain, m) for m in models]
    return {
        "command": "report",
        "events": args.events,
        "terms": chain.terms,
        "coincidences": result.coincidences,
        "statistic": chained_statistic(table, chain),
        "stderr": statistic_stderr(table, chain),
        "efficiency": result.report.to_json_dict(),
        "table": table.to_json_dict(),
        "verdicts": [v.to_json_dict() for v in verdicts],
    }


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="franson",
        description="Simulate and analyze energy-time entanglement tests.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON file with default option values")
        p.add_argument("--out", help="write the JSON report to this path")

    p_sim = sub.add_parser("simulate", help="run an event-level simulation")
    p_sim.add_argument("--scenario", choices=("table1", "aklz-demo", "chained6"))
    p_sim.add_argument("--source", choices=("quantum", "aklz"))
    p_sim.add_argument(
        "--variant",
        choices=tuple(v.value for v in SetupVariant),
        help="compare interferometer setups at the distribution level",
    )
    p_sim.add_argument("--terms", type=int)
    p_sim.add_argument("--visibility", type=float)
    p_sim.add_argument("--trials", type=int, help="trials per setting pair")
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--events-csv", help="export raw detection events")
    p_sim.add_argument(
        "--pipeline",
        action="store_true",
        help="force the full timestamp/postselection pipeline",
    )
    p_sim.add_argument("--path-difference-ns", type=float)
    p_sim.add_argument("--window-ns", type=float)
    p_sim.add_argument("--short-arm-ns", type=float)
    p_sim.add_argument("--emission-gap-ns", type=float)
    add_common(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_bounds = sub.add_parser("bounds", help="closed-form bounds per model class")
    p_bounds.add_argument("--terms", type=int)
    p_bounds.add_argument("--eta", type=float, help="detection efficiency")
    add_common(p_bounds)
    p_bounds.set_defaults(func=_cmd_bounds)

    p_vis = sub.add_parser(
        "visibility", help="critical visibility per chained term count"
    )
    p_vis.add_argument("--terms", type=int, nargs="+")
    add_common(p_vis)
    p_vis.set_defaults(func=_cmd_visibility)

    p_verify = sub.add_parser(
        "verify-bounds", help="search a model class for bound violations"
    )
    p_verify.add_argument("--model-class", choices=_SEARCHABLE)
    p_verify.add_argument("--terms", type=int)
    p_verify.add_argument("--restarts", type=int)
    p_verify.add_argument("--iterations", type=int)
    p_verify.add_argument("--support-size", type=int)
    p_verify.add_argument("--seed", type=int)
    p_verify.add_argument(
        "--lp-check",
        action="store_true",
        help="additionally solve the emission-time game exactly by LP",
    )
    p_verify.add_argument(
        "--witness", action="store_true", help="include the witness mixture"
    )
    add_common(p_verify)
    p_verify.set_defaults(func=_cmd_verify_bounds)

    p_geo = sub.add_parser("geometry", help="check the two-setting timing premise")
    p_geo.add_argument("--path-difference-ns", type=float, required=True)
    p_geo.add_argument("--modulator-to-detector-ns", type=float, required=True)
    p_geo.add_argument("--switch-period-ns", type=float, required=True)
    add_common(p_geo)
    p_geo.set_defaults(func=_cmd_geometry)

    p_rep = sub.add_parser("report", help="analyze an exported events file")
    p_rep.add_argument("--events", required=True)
    p_rep.add_argument("--terms", type=int)
    p_rep.add_argument("--model-class", choices=tuple(k.value for k in ModelKind))
    p_rep.add_argument("--eta", type=float)
    p_rep.add_argument("--path-difference-ns", type=float)
    p_rep.add_argument("--window-ns", type=float)
    p_rep.add_argument("--short-arm-ns", type=float)
    add_common(p_rep)
    p_rep.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config(args)
        payload = args.func(args)
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _emit(payload, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
