import json

import pytest

from fairabm.cli import main
from fairabm.config import ConfigError
from fairabm.runner import (
    ExperimentPlan,
    cell_dir,
    dataset_path,
    explain_cell,
    load_plan,
    load_records,
    plan_from_dict,
    run_plan,
    scenario_key,
)

TINY_TOML = """\
schema = "fairabm.plan/1"

[plan]
lbl_values = [0.4]
rep_values = [0.5]
variants = ["none", "reweight_auto"]
seeds = [0]
n_steps = 800

[offline]
n_candidates = 1

[online]
warmup = 100
calibrate_interval = 100
n_candidates = 1
"""


@pytest.fixture(scope="module")
def tiny_plan(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "plan.toml"
    path.write_text(TINY_TOML)
    return load_plan(path), path


@pytest.fixture(scope="module")
def tiny_run(tiny_plan, tmp_path_factory):
    plan, _ = tiny_plan
    out = tmp_path_factory.mktemp("run")
    plan = plan.with_(out_dir=str(out))
    return plan, run_plan(plan)


# --- plans ----------------------------------------------------------------------------------------


def test_default_plan_covers_the_full_grid():
    plan = ExperimentPlan()
    assert len(plan.scenarios()) == 16 * 2
    assert len(plan.cells()) == 16 * 2 * 2 * 5


def test_plan_file_parsing(tiny_plan):
    plan, _ = tiny_plan
    assert plan.lbl_values == (0.4,) and plan.variants == ("none", "reweight_auto")
    assert plan.online.warmup == 100 and plan.offline.n_candidates == 1
    assert len(plan.cells()) == 4


def test_mitigation_shorthand():
    plan = plan_from_dict({"plan": {"mitigation": "eg_dp", "lbl_values": [0.2], "rep_values": [0.3], "seeds": [1]}})
    assert plan.variants == ("eg_dp",)
    assert len(plan.cells()) == 2


@pytest.mark.parametrize(
    "data",
    [
        {"schema": "fairabm.plan/9"},
        {"plan": {"variants": ["magic"]}},
        {"plan": {"pipelines": ["batch"]}},
        {"plan": {"seeds": []}},
        {"plan": {"seeds": [1, 1]}},
        {"plan": {"lbl_values": [1.5]}},
        {"plan": {"colour": "red"}},
        {"plan": {"mitigation": "eg_dp", "variants": ["none"]}},
        {"offline": {"n_trees": 3}},
        {"extras": {}},
    ],
)
def test_invalid_plans_are_config_errors(data):
    with pytest.raises(ConfigError):
        plan_from_dict(data)


def test_scenario_key_names_every_axis():
    assert scenario_key(0.4, 0.5, 1) == "lbl0.4_rep0.5_seed1"
    assert scenario_key(0.0, 0.1, 0) != scenario_key(0.0, 0.1, 1)


# --- runs -----------------------------------------------------------------------------------------


def test_tiny_run_produces_every_cell(tiny_run):
    plan, result = tiny_run
    assert result.n_failed == 0 and len(result.records) == 4
    key = scenario_key(0.4, 0.5, 0)
    assert dataset_path(plan.out, key).exists()
    for rec in result.records:
        d = cell_dir(plan.out, key, rec.pipeline, rec.variant)
        assert (d / "metrics.json").exists() and (d / "model.json").exists()
        assert "generate_s" not in (d / "metrics.json").read_text()
    assert len({r.fingerprint for r in result.records}) == 1
    tables = plan.out / "results_tables"
    for name in ("offline_results.csv", "online_results.csv", "offline_pergroup.csv", "rank_summary.csv"):
        assert (tables / name).exists()
    assert (plan.out / "figures" / "tradeoff_offline.png").stat().st_size > 0


def test_online_cell_evaluates_after_warmup(tiny_run):
    plan, result = tiny_run
    rec = next(r for r in result.records if r.pipeline == "online")
    n_rows = sum(1 for line in dataset_path(plan.out, rec.scenario).read_text().splitlines()[2:] if line)
    assert rec.n_eval == n_rows - plan.online.warmup


def test_records_reload_from_disk(tiny_run):
    plan, result = tiny_run
    back = {r.cell: r.metrics_dict() for r in load_records(plan.out)}
    assert back == {r.cell: r.metrics_dict() for r in result.records}


def test_rerun_is_deterministic(tiny_run, tmp_path):
    plan, result = tiny_run
    again = run_plan(plan.with_(out_dir=str(tmp_path)))
    key = scenario_key(0.4, 0.5, 0)
    assert dataset_path(tmp_path, key).read_bytes() == dataset_path(plan.out, key).read_bytes()
    assert [r.metrics_dict() for r in again.records] == [r.metrics_dict() for r in result.records]


def test_failing_cell_does_not_stop_the_run(tiny_plan, tmp_path):
    plan, _ = tiny_plan
    # stream shorter than the online warm-up: online cells fail, offline cells still run
    plan = plan.with_(out_dir=str(tmp_path), n_steps=100, variants=("none",))
    result = run_plan(plan)
    status = {r.pipeline: r.status for r in result.records}
    assert status == {"offline": "ok", "online": "failed"}
    rec = next(r for r in result.records if r.pipeline == "online")
    assert "warm-up" in rec.error or "warmup" in rec.error
    saved = json.loads((cell_dir(tmp_path, rec.scenario, "online", "none") / "metrics.json").read_text())
    assert saved["status"] == "failed"


def test_explain_cell_outputs(tiny_run):
    plan, _ = tiny_run
    key = scenario_key(0.4, 0.5, 0)
    a = explain_cell(plan.out, key, "offline", "reweight_auto", seed=3, figure=False)
    b = explain_cell(plan.out, key, "offline", "reweight_auto", seed=3, figure=True)
    assert a.entity_id == b.entity_id
    assert a.explanations == b.explanations
    for expl in a.explanations.values():
        assert abs(expl.total() - (expl.prediction - expl.baseline)) <= 1e-9
    assert b.paths[-1].suffix == ".png" and b.paths[-1].exists()
    chosen = explain_cell(plan.out, key, "online", "reweight_auto", entity_id=a.entity_id, figure=False, warmup=100)
    assert chosen.entity_id == a.entity_id


def test_explain_missing_model_names_the_cell(tiny_run):
    plan, _ = tiny_run
    with pytest.raises(FileNotFoundError, match="eg_dp"):
        explain_cell(plan.out, scenario_key(0.4, 0.5, 0), "offline", "eg_dp")


# --- command line ---------------------------------------------------------------------------------


def test_cli_verbs(tiny_plan, tmp_path, capsys):
    _, cfg = tiny_plan
    out = str(tmp_path / "cli")
    assert main(["generate", "--config", str(cfg), "--out", out]) == 0
    assert "lbl0.4_rep0.5_seed0" in capsys.readouterr().out
    assert main(["run", "--config", str(cfg), "--out", out, "--pipeline", "offline"]) == 0
    assert main(["report", "--config", str(cfg), "--out", out]) == 0
    assert "perf_1st" in capsys.readouterr().out
    code = main(["explain", "--config", str(cfg), "--out", out, "--pipeline", "offline", "--lbl", "0.4", "--rep", "0.5", "--variant", "reweight_auto"])
    assert code == 0
    assert "hub[none]" in capsys.readouterr().out


def test_cli_errors(tmp_path, capsys):
    assert main(["report", "--out", str(tmp_path / "nothing")]) == 1
    assert main(["run", "--config", str(tmp_path / "missing.toml")]) == 2
    code = main(["explain", "--out", str(tmp_path), "--lbl", "0.4", "--rep", "0.5", "--pipeline", "offline"])
    assert code == 2
    assert "error:" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["run", "--variant", "magic"])
