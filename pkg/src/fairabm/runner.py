"""Experiment grid: scenarios x mitigation variants x pipelines x seeds.

Every (scenario, seed) dataset is generated once and shared by all variants.
Each cell writes to its own directory; a separate aggregation pass reads the
cell files back and builds the result tables, rank tables and figures, so
``report`` can re-aggregate a finished run without retraining anything.

Output layout under the plan's output directory::

    datasets/<scenario>.csv
    results/<scenario>/<pipeline>/<variant>/{metrics,timings,model}.json
    results_tables/*.csv
    figures/*.png
    explain/<scenario>/<pipeline>/...
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import plotting
from .config import ConfigError, ScenarioConfig, _check_schema, load_toml, scenario_from_dict
from .dataset import export_csv, fingerprint, import_csv, to_visible
from .explain import ShapleyExplanation, ValueFunction, build_interaction_graph, graph_export, hub_concentration, shapley_order2
from .learners.gbt import GbtParams
from .learners.pipelines import (
    EG_MOMENTS,
    VARIANTS,
    EgSettings,
    OfflineModel,
    OfflineSettings,
    OnlineModel,
    OnlineSettings,
    fit_offline,
    run_online,
)
from .learners.search import time_split
from .metrics import (
    FairnessReport,
    PerformanceReport,
    composite_scores,
    fairness_metrics,
    group_disaggregate,
    rank_variants,
)
from .sim import run_simulation

logger = logging.getLogger(__name__)

PLAN_SCHEMA = "fairabm.plan/1"
METRICS_SCHEMA = "fairabm.metrics/1"
PIPELINES = ("offline", "online")
DEFAULT_LBL = (0.0, 0.4, 0.5, 0.6)
DEFAULT_REP = (0.5, 0.6, 0.7, 0.8)
DESK_STEPS = 2000
FULL_STEPS = 10000
DEFAULT_SEEDS = (0, 1)

# row labels of the per-group result tables
VARIANT_LABELS = {
    "none": "none",
    "reweight_auto": "reweight_auto",
    "reweight_manual": "reweight_manual_A{A}_B{B}",
    "eg_dp": "mitigator_demographic_parity",
    "eg_eo": "mitigator_equalized_odds",
}


def scenario_key(lbl: float, rep: float, seed: int) -> str:
    return f"lbl{float(lbl)!r}_rep{float(rep)!r}_seed{int(seed)}"


@dataclass(frozen=True)
class ExperimentPlan:
    lbl_values: tuple = DEFAULT_LBL
    rep_values: tuple = DEFAULT_REP
    variants: tuple = VARIANTS
    pipelines: tuple = PIPELINES
    seeds: tuple = DEFAULT_SEEDS
    out_dir: str = "runs"
    n_steps: int = DESK_STEPS
    base: ScenarioConfig = field(default_factory=ScenarioConfig)
    offline: OfflineSettings = OfflineSettings()
    online: OnlineSettings = OnlineSettings()
    workers: int = 1

    def __post_init__(self):
        for name in ("lbl_values", "rep_values", "variants", "pipelines", "seeds"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        self.validate()

    def validate(self) -> None:
        for v in self.variants:
            if v not in VARIANTS:
                raise ConfigError(f"unknown variant {v!r}; expected one of {VARIANTS}")
        for p in self.pipelines:
            if p not in PIPELINES:
                raise ConfigError(f"unknown pipeline {p!r}; expected offline or online")
        for name in ("lbl_values", "rep_values", "variants", "pipelines", "seeds"):
            values = getattr(self, name)
            if not values:
                raise ConfigError(f"plan has no {name}")
            if len(set(values)) != len(values):
                raise ConfigError(f"duplicate entries in {name}")
        if self.n_steps < 1:
            raise ConfigError("n_steps must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for cfg in (self.scenario_config(lbl, rep, 0) for lbl in self.lbl_values for rep in self.rep_values):
            cfg.validate()

    @property
    def out(self) -> Path:
        return Path(self.out_dir)

    def scenario_config(self, lbl: float, rep: float, seed: int) -> ScenarioConfig:
        return self.base.with_(lbl_beta=float(lbl), rep_alpha=float(rep), n_steps=int(self.n_steps), rng_seed=int(seed))

    def scenarios(self) -> list[tuple[float, float, int]]:
        return [(lbl, rep, seed) for lbl in self.lbl_values for rep in self.rep_values for seed in self.seeds]

    def cells(self) -> list[tuple]:
        return [
            (lbl, rep, seed, pipeline, variant)
            for lbl, rep, seed in self.scenarios()
            for pipeline in self.pipelines
            for variant in self.variants
        ]

    def with_(self, **changes) -> "ExperimentPlan":
        return replace(self, **changes)


def _settings_table(cls, table: dict, **nested):
    known = set(cls.__dataclass_fields__)
    unknown = set(table) - known - set(nested)
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    return cls(**{k: v for k, v in table.items() if k not in nested}, **nested)


def plan_from_dict(data: dict) -> ExperimentPlan:
    """Plan from a parsed config: ``[plan]``, ``[scenario]``, ``[offline]``, ``[online]``,
    ``[online.gbt]``, ``[eg]`` and ``[reweight_manual]`` tables, all optional."""
    _check_schema(data, PLAN_SCHEMA)
    unknown = set(data) - {"schema", "plan", "scenario", "offline", "online", "eg", "reweight_manual"}
    if unknown:
        raise ConfigError(f"unknown plan sections: {sorted(unknown)}")
    p = dict(data.get("plan", {}))
    kwargs = {}
    if "mitigation" in p:
        if "variants" in p:
            raise ConfigError("give either mitigation or variants, not both")
        p["variants"] = [p.pop("mitigation")]
    if "out" in p:
        p["out_dir"] = p.pop("out")
    allowed = {"lbl_values", "rep_values", "variants", "pipelines", "seeds", "out_dir", "n_steps", "workers"}
    bad = set(p) - allowed
    if bad:
        raise ConfigError(f"unknown [plan] keys: {sorted(bad)}")
    kwargs.update(p)
    if "scenario" in data:
        kwargs["base"] = scenario_from_dict(data["scenario"])
    eg = _settings_table(EgSettings, data.get("eg", {}))
    manual = data.get("reweight_manual", {"A": 0.5, "B": 1.5})
    kwargs["offline"] = _settings_table(OfflineSettings, data.get("offline", {}), eg=eg, manual=manual)
    online = dict(data.get("online", {}))
    gbt = _settings_table(GbtParams, online.pop("gbt", {}))
    kwargs["online"] = _settings_table(OnlineSettings, online, eg=eg, manual=manual, gbt=gbt)
    try:
        return ExperimentPlan(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_plan(path) -> ExperimentPlan:
    return plan_from_dict(load_toml(path))


@dataclass
class RunRecord:
    scenario: str
    lbl: float
    rep: float
    seed: int
    pipeline: str
    variant: str
    fingerprint: str | None
    status: str  # "ok" or "failed"
    error: str | None = None
    performance: dict | None = None
    fairness: dict | None = None
    converged: bool | None = None
    n_eval: int = 0
    params: dict | None = None
    timings: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def cell(self) -> tuple:
        return (self.scenario, self.pipeline, self.variant)

    def metrics_dict(self) -> dict:
        """Everything except wall-clock timings, so reruns compare equal."""
        return {
            "schema": METRICS_SCHEMA,
            "scenario": self.scenario,
            "lbl": self.lbl,
            "rep": self.rep,
            "seed": self.seed,
            "pipeline": self.pipeline,
            "variant": self.variant,
            "fingerprint": self.fingerprint,
            "status": self.status,
            "error": self.error,
            "performance": self.performance,
            "fairness": self.fairness,
            "converged": self.converged,
            "n_eval": self.n_eval,
            "params": self.params,
        }

    @classmethod
    def from_metrics(cls, d: dict, timings: dict | None = None) -> "RunRecord":
        _check_schema(d, METRICS_SCHEMA)
        fields_ = {k: d.get(k) for k in cls.__dataclass_fields__ if k != "timings"}
        return cls(**fields_, timings=timings or {})


def cell_dir(out: Path, scenario: str, pipeline: str, variant: str) -> Path:
    return Path(out) / "results" / scenario / pipeline / variant


def dataset_path(out: Path, scenario: str) -> Path:
    return Path(out) / "datasets" / f"{scenario}.csv"


def _dump_json(obj, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1, sort_keys=True, allow_nan=True) + "\n", encoding="utf-8")


def evaluate_predictions(probs, labels, groups) -> tuple[PerformanceReport, FairnessReport]:
    probs = np.asarray(probs, dtype=float)
    perf = group_disaggregate(probs, labels, groups)
    fair = fairness_metrics((probs >= 0.5).astype(float), labels, groups)
    return perf, fair


def offline_split(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Time-ordered 80/20 train/test split."""
    return time_split(n, 0.2)


def generate_dataset(plan: ExperimentPlan, lbl: float, rep: float, seed: int) -> tuple[list, str]:
    rows = run_simulation(plan.scenario_config(lbl, rep, seed))
    path = dataset_path(plan.out, scenario_key(lbl, rep, seed))
    path.parent.mkdir(parents=True, exist_ok=True)
    export_csv(rows, path)
    return rows, fingerprint(rows)


def _offline_cell(data, variant, settings, tuned_cache):
    train_idx, test_idx = offline_split(len(data))
    train, test = data.subset(train_idx), data.subset(test_idx)
    tuned = tuned_cache.get("params") if variant in EG_MOMENTS else None
    model = fit_offline(train, variant, settings, tuned)
    if variant == "none" or (variant in EG_MOMENTS and tuned is None):
        tuned_cache["params"] = dict(model.params)
    probs = model.predict_proba(test.X)
    converged = getattr(model.model, "converged", None)
    return model, probs, test.y, test.groups, converged


def _online_cell(data, variant, settings):
    run = run_online(data, variant, settings)
    start = settings.warmup
    if len(data) <= start:
        raise ValueError(f"stream of {len(data)} rows has nothing after the {start}-row warm-up")
    ens = getattr(run.model.model, "ensemble", None)
    converged = ens.converged if ens is not None else None
    return run.model, run.probs[start:], data.y[start:], data.groups[start:], converged


def run_scenario(plan: ExperimentPlan, lbl: float, rep: float, seed: int) -> list[RunRecord]:
    """Generate one dataset and run every (pipeline, variant) cell on it; never raises."""
    key = scenario_key(lbl, rep, seed)
    t0 = time.perf_counter()
    try:
        rows, fp = generate_dataset(plan, lbl, rep, seed)
        data = to_visible(rows)
        gen_error = None
    except Exception as exc:  # noqa: BLE001 - fail-soft
        logger.exception("dataset generation failed for %s", key)
        rows, fp, data, gen_error = None, None, None, f"{type(exc).__name__}: {exc}"
    gen_time = time.perf_counter() - t0

    records = []
    tuned_cache: dict = {}
    offline = replace(plan.offline, search_seed=int(seed))
    online = replace(plan.online, search_seed=int(seed))
    # the unconstrained search result is shared by the EG variants
    order = sorted(plan.variants, key=lambda v: v in EG_MOMENTS)
    for pipeline in plan.pipelines:
        for variant in order:
            rec = RunRecord(key, float(lbl), float(rep), int(seed), pipeline, variant, fp, "failed")
            rec.timings["generate_s"] = gen_time
            t1 = time.perf_counter()
            if gen_error is not None:
                rec.error = f"dataset generation failed: {gen_error}"
            else:
                try:
                    if pipeline == "offline":
                        model, probs, y, g, conv = _offline_cell(data, variant, offline, tuned_cache)
                    else:
                        model, probs, y, g, conv = _online_cell(data, variant, online)
                    perf, fair = evaluate_predictions(probs, y, g)
                    rec.performance, rec.fairness = perf.to_dict(), fair.to_dict()
                    rec.converged, rec.n_eval, rec.params = conv, len(y), model.params
                    rec.status = "ok"
                    _dump_json(model.to_dict(), cell_dir(plan.out, key, pipeline, variant) / "model.json")
                except Exception as exc:  # noqa: BLE001 - fail-soft
                    logger.error("cell %s/%s/%s failed: %s", key, pipeline, variant, exc)
                    logger.debug("%s", traceback.format_exc())
                    rec.error = f"{type(exc).__name__}: {exc}"
            rec.timings["fit_eval_s"] = time.perf_counter() - t1
            d = cell_dir(plan.out, key, pipeline, variant)
            _dump_json(rec.metrics_dict(), d / "metrics.json")
            _dump_json(rec.timings, d / "timings.json")
            records.append(rec)
    # keep the plan's variant order in the returned records
    rank = {v: i for i, v in enumerate(plan.variants)}
    records.sort(key=lambda r: (plan.pipelines.index(r.pipeline), rank[r.variant]))
    return records


def _scenario_job(args):
    return run_scenario(*args)


@dataclass
class PlanResult:
    records: list
    ranks: dict  # pipeline -> RankTable
    tables: list  # written table paths

    @property
    def n_failed(self) -> int:
        return sum(not r.ok for r in self.records)


def run_plan(plan: ExperimentPlan) -> PlanResult:
    plan.out.mkdir(parents=True, exist_ok=True)
    _dump_json(plan_summary(plan), plan.out / "plan.json")
    jobs = [(plan, lbl, rep, seed) for lbl, rep, seed in plan.scenarios()]
    records = []
    if plan.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            for recs in pool.map(_scenario_job, jobs):
                records.extend(recs)
    else:
        for job in jobs:
            logger.info("scenario %s", scenario_key(*job[1:]))
            records.extend(_scenario_job(job))
    ranks, tables = aggregate(plan.out, records)
    return PlanResult(records, ranks, tables)


def plan_summary(plan: ExperimentPlan) -> dict:
    return {
        "schema": PLAN_SCHEMA,
        "lbl_values": list(plan.lbl_values),
        "rep_values": list(plan.rep_values),
        "variants": list(plan.variants),
        "pipelines": list(plan.pipelines),
        "seeds": list(plan.seeds),
        "n_steps": plan.n_steps,
        "n_cells": len(plan.cells()),
    }


def load_records(out) -> list[RunRecord]:
    out = Path(out)
    records = []
    for path in sorted((out / "results").glob("*/*/*/metrics.json")):
        timings_path = path.with_name("timings.json")
        timings = json.loads(timings_path.read_text()) if timings_path.exists() else {}
        records.append(RunRecord.from_metrics(json.loads(path.read_text()), timings))
    return records


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path: Path, header: list, rows: list[dict]) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r.get(h)) for h in header])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def _group_metric(rec: RunRecord, group: str, key: str):
    g = (rec.performance or {}).get("groups", {}).get(group)
    return g.get(key) if g else None


def _variant_label(variant: str, plan_manual: dict | None = None) -> str:
    manual = plan_manual or {"A": 0.5, "B": 1.5}
    return VARIANT_LABELS[variant].format(**manual)


RESULT_HEADER = [
    "scenario", "rep", "lbl", "seed", "variant", "status", "n_eval",
    "roc_auc", "accuracy", "precision", "recall", "log_loss",
    "spd", "eod", "approval_A", "approval_B", "converged", "fingerprint", "error",
]  # fmt: skip
PERGROUP_HEADER = [
    "scenario", "rep", "lbl", "seed", "variant", "label", "A_support", "B_support",
    "A_acc", "B_acc", "A_rec", "B_rec", "A_prec", "B_prec", "A_apprate", "B_apprate",
]  # fmt: skip
RANK_HEADER = ["pipeline", "variant", "perf_1st", "perf_2nd", "fair_1st", "fair_2nd", "n_scenarios"]


def _result_row(rec: RunRecord) -> dict:
    perf, fair = rec.performance or {}, rec.fairness or {}
    approval = fair.get("approval_rate", {})
    return {
        "scenario": rec.scenario, "rep": rec.rep, "lbl": rec.lbl, "seed": rec.seed, "variant": rec.variant,
        "status": rec.status, "n_eval": rec.n_eval, "roc_auc": perf.get("roc_auc"),
        "accuracy": perf.get("accuracy"), "precision": perf.get("precision"), "recall": perf.get("recall"),
        "log_loss": perf.get("log_loss"), "spd": fair.get("spd"), "eod": fair.get("eod"),
        "approval_A": approval.get("A"), "approval_B": approval.get("B"), "converged": rec.converged,
        "fingerprint": rec.fingerprint, "error": rec.error,
    }  # fmt: skip


def _pergroup_row(rec: RunRecord) -> dict:
    row = {k: getattr(rec, k) for k in ("scenario", "rep", "lbl", "seed", "variant")}
    row["label"] = _variant_label(rec.variant)
    for g in ("A", "B"):
        row[f"{g}_support"] = _group_metric(rec, g, "n")
        row[f"{g}_acc"] = _group_metric(rec, g, "accuracy")
        row[f"{g}_rec"] = _group_metric(rec, g, "recall")
        row[f"{g}_prec"] = _group_metric(rec, g, "precision")
        row[f"{g}_apprate"] = _group_metric(rec, g, "approval_rate")
    return row


def _reports(rec: RunRecord) -> tuple[PerformanceReport, FairnessReport]:
    p = {k: v for k, v in rec.performance.items() if k != "groups"}
    return PerformanceReport(**p), FairnessReport(**rec.fairness)


def rank_records(records: list[RunRecord], pipeline: str):
    """Rank variants within every (scenario, seed) of one pipeline; failed cells are left out."""
    per_scenario = {}
    by_scen: dict = {}
    for r in records:
        if r.pipeline == pipeline and r.ok:
            by_scen.setdefault(r.scenario, {})[r.variant] = _reports(r)
    for scen, reps in by_scen.items():
        if len(reps) < 2:
            continue
        perf = {v: pr for v, (pr, _) in reps.items()}
        fair = {v: fr for v, (_, fr) in reps.items()}
        per_scenario[scen] = composite_scores(perf, fair)
    if not per_scenario:
        return None
    return rank_variants(per_scenario)


def aggregate(out, records: list[RunRecord] | None = None) -> tuple[dict, list]:
    """Write result tables, rank tables and figures from cell records."""
    out = Path(out)
    records = load_records(out) if records is None else records
    tables_dir, fig_dir = out / "results_tables", out / "figures"
    written = []
    ranks = {}
    rank_rows = []
    cells = sorted(records, key=lambda r: (r.pipeline, r.scenario, r.variant))
    written.append(
        _write_csv(
            tables_dir / "cells.csv",
            ["scenario", "pipeline", "variant", "status", "error"],
            [{"scenario": r.scenario, "pipeline": r.pipeline, "variant": r.variant, "status": r.status, "error": r.error} for r in cells],
        )
    )
    for pipeline in PIPELINES:
        recs = [r for r in records if r.pipeline == pipeline]
        if not recs:
            continue
        written.append(_write_csv(tables_dir / f"{pipeline}_results.csv", RESULT_HEADER, [_result_row(r) for r in recs]))
        ok = [r for r in recs if r.ok]
        written.append(_write_csv(tables_dir / f"{pipeline}_pergroup.csv", PERGROUP_HEADER, [_pergroup_row(r) for r in ok]))
        table = rank_records(recs, pipeline)
        if table is not None:
            ranks[pipeline] = table
            n_scen = len(table.perf_ranks)
            for v, c in table.counts.items():
                rank_rows.append({"pipeline": pipeline, "variant": v, **c, "n_scenarios": n_scen})
        if ok:
            fig_dir.mkdir(parents=True, exist_ok=True)
            points = [
                {"variant": r.variant, "abs_spd": abs(r.fairness["spd"]), "accuracy": r.performance["accuracy"]}
                for r in ok
            ]
            written.append(plotting.tradeoff_figure(points, fig_dir / f"tradeoff_{pipeline}.png", f"{pipeline} pipeline"))
            rows = [_result_row(r) for r in ok]
            written.append(plotting.approval_figure(rows, fig_dir / f"approval_{pipeline}.png", f"{pipeline} pipeline"))
    written.append(_write_csv(tables_dir / "rank_summary.csv", RANK_HEADER, rank_rows))
    return ranks, written


# --- explanations -------------------------------------------------------------------------------


def load_cell_model(out, scenario: str, pipeline: str, variant: str):
    path = cell_dir(out, scenario, pipeline, variant) / "model.json"
    if not path.exists():
        raise FileNotFoundError(f"no persisted model for cell {scenario}/{pipeline}/{variant} (expected {path})")
    d = json.loads(path.read_text(encoding="utf-8"))
    return OfflineModel.from_dict(d) if d["pipeline"] == "offline" else OnlineModel.from_dict(d)


@dataclass
class CellExplanation:
    scenario: str
    pipeline: str
    instance_row: int
    entity_id: int
    explanations: dict  # variant -> ShapleyExplanation
    hubs: dict  # variant -> hub concentration
    paths: list


def select_instance(rows, candidates: np.ndarray, seed: int = 0, entity_id: int | None = None) -> int:
    """Row index of an explicit entity, or a seeded draw from ``candidates``."""
    if entity_id is not None:
        for i, r in enumerate(rows):
            if r.entity_id == entity_id:
                return i
        raise KeyError(f"entity {entity_id} not in the dataset")
    return int(np.random.default_rng(seed).choice(candidates))


def explain_cell(
    out,
    scenario: str,
    pipeline: str = "offline",
    mitigated: str = "eg_dp",
    entity_id: int | None = None,
    seed: int = 0,
    n_background: int = 100,
    top_k_edges: int | None = None,
    figure: bool = True,
    warmup: int = 500,
) -> CellExplanation:
    """Explain one instance under the baseline and one mitigated model of a finished cell."""
    out = Path(out)
    models = {v: load_cell_model(out, scenario, pipeline, v) for v in ("none", mitigated)}
    path = dataset_path(out, scenario)
    if not path.exists():
        raise FileNotFoundError(f"no dataset for {scenario} (expected {path})")
    rows = import_csv(path)
    data = to_visible(rows)
    if pipeline == "offline":
        train_idx, test_idx = offline_split(len(data))
    else:
        cut = min(warmup, len(data) - 1)
        train_idx, test_idx = np.arange(cut), np.arange(cut, len(data))
    idx = select_instance(rows, test_idx, seed, entity_id)
    rng = np.random.default_rng(seed)
    bg_idx = rng.choice(train_idx, size=min(n_background, len(train_idx)), replace=False)
    background, instance = data.X[np.sort(bg_idx)], data.X[idx]

    target = out / "explain" / scenario / pipeline
    target.mkdir(parents=True, exist_ok=True)
    explanations, hubs, graphs, paths = {}, {}, {}, []
    for variant, model in models.items():
        vf = ValueFunction(model.predict_proba, background, instance)
        expl = shapley_order2(vf, data.feature_names)
        g = build_interaction_graph(expl, top_k_edges)
        explanations[variant], hubs[variant], graphs[variant] = expl, hub_concentration(expl), g
        stem = target / f"{variant}_entity{rows[idx].entity_id}"
        _dump_json(expl.to_dict(), stem.with_suffix(".explanation.json"))
        graph_export(g, stem.with_suffix(".dot"), "dot")
        graph_export(g, stem.with_suffix(".graph.json"), "json")
        paths += [stem.with_suffix(s) for s in (".explanation.json", ".dot", ".graph.json")]
    if figure:
        fig_path = target / f"network_entity{rows[idx].entity_id}.png"
        paths.append(plotting.network_pair_figure(graphs, fig_path, f"{scenario} ({pipeline}), entity {rows[idx].entity_id}"))
    return CellExplanation(scenario, pipeline, idx, rows[idx].entity_id, explanations, hubs, paths)


def load_explanation(path) -> ShapleyExplanation:
    return ShapleyExplanation.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
