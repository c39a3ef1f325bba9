"""End-to-end acceptance checks, one test per criterion.

Each test prints a PASS/FAIL line with its measurement (collected again in the
terminal summary). The grid-scale tests share one desk-scale run.
"""

import itertools
import math
import time
import warnings

import numpy as np
import pytest

from fairabm.config import ScenarioConfig
from fairabm.explain import ValueFunction, shapley_order2
from fairabm.learners.gbt import GbtParams, gbt_fit
from fairabm.learners.isotonic import CalibrationBuffer, isotonic_fit, pav
from fairabm.metrics import fairness_from_rates, log_loss
from fairabm.mitigation.expgrad import ConstraintMoment, MomentKind, constraint_violation, eg_fit, gbt_member_builder
from fairabm.mitigation.reweigh import EmaReweigherState, kamiran_calders_weights
from fairabm.runner import ExperimentPlan, dataset_path, explain_cell, run_plan, run_scenario, scenario_key
from fairabm.sim import assign_label

from test_explain import permutation_oracle, random_model
from test_learners import brute_force_monotone_fit

# --- shared desk-scale grid -----------------------------------------------------------------------

GRID_PLAN = dict(variants=("none", "eg_dp"), pipelines=("offline",), seeds=(0, 1))
HIGH_BIAS = (0.6, 0.8)


@pytest.fixture(scope="module")
def grid(tmp_path_factory):
    out = tmp_path_factory.mktemp("grid")
    plan = ExperimentPlan(out_dir=str(out), **GRID_PLAN)
    t0 = time.perf_counter()
    result = run_plan(plan)
    elapsed = time.perf_counter() - t0
    by_cell = {(r.lbl, r.rep, r.seed, r.variant): r for r in result.records}
    return plan, result, by_cell, elapsed


def _abs_spd(rec):
    return abs(rec.fairness["spd"])


# --- closed-form checks ---------------------------------------------------------------------------


def test_c01_streaming_reweighing_matches_batch(report_criterion):
    groups = np.array([0] * 60 + [1] * 40)
    labels = np.array([1] * 30 + [0] * 30 + [1] * 10 + [0] * 30)
    target = kamiran_calders_weights(groups, labels)
    cells = [(0, 1), (0, 0), (1, 1), (1, 0)]
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    state = EmaReweigherState(decay=0.01)
    seen = {c: [] for c in cells}
    n = 0
    while n < 10_000:
        # stationary stream: shuffled passes over the exact table
        for i in rng.permutation(100):
            state.update(int(groups[i]), int(labels[i]))
            n += 1
            if n > 1_000:
                table = state.table()
                for c in cells:
                    seen[c].append(table[c])
            if n == 10_000:
                break
    elapsed = time.perf_counter() - t0
    means = {c: float(np.mean(seen[c])) for c in cells}
    worst = max(abs(means[c] - target[c]) for c in cells)
    passed = worst <= 0.02 and elapsed < 1.0
    report_criterion(
        1,
        passed,
        "EMA weights (A1,A0,B1,B0) = " + ", ".join(f"{means[c]:.3f}" for c in cells) + f" vs 0.8,1.2,1.6,0.8; max dev {worst:.4f}; {elapsed:.2f}s",
    )
    assert passed


def test_c02_fairness_arithmetic(report_criterion):
    f = fairness_from_rates(0.718, 0.055, 0.948, 0.568)
    passed = abs(f.spd - (-0.663)) <= 1e-12 and abs(f.eod - (-0.380)) <= 1e-12
    report_criterion(2, passed, f"SPD {f.spd:.15f}, EOD {f.eod:.15f}")
    assert passed


def test_c06_shapley_exactness(report_criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    d = 6
    f = random_model(d, 60)
    background = rng.normal(size=(25, d))
    eff = 0.0
    for _ in range(100):
        expl = shapley_order2(ValueFunction(f, background, rng.normal(size=d)))
        eff = max(eff, abs(expl.total() - (expl.prediction - expl.baseline)))
    # additive model on integer data, so every discrete derivative cancels exactly;
    # x2 never enters the model
    w = np.array([3.0, -1.0, 2.0])
    bg_int = rng.integers(-5, 6, size=(16, 4)).astype(float)
    x = rng.integers(-5, 6, size=4).astype(float)
    add = shapley_order2(ValueFunction(lambda X: X[:, [0, 1, 3]] @ w, bg_int, x))
    additive_ok = all(v == 0.0 for v in add.phi_pair.values())
    additive_ok &= all(add.phi[f"x{k}"] == wk * (x[k] - bg_int[:, k].mean()) for k, wk in zip((0, 1, 3), w))
    null_ok = add.phi["x2"] == 0.0 and all(add.pair("x2", o) == 0.0 for o in ("x0", "x1", "x3"))
    oracle = 0.0
    for d_small, seed in itertools.product((1, 2, 3, 4), range(3)):
        vf = ValueFunction(random_model(d_small, seed), rng.normal(size=(6, d_small)), rng.normal(size=d_small))
        expl = shapley_order2(vf)
        phi, pair = permutation_oracle(vf, d_small)
        oracle = max([oracle] + [abs(expl.phi[f"x{i}"] - phi[i]) for i in range(d_small)])
        oracle = max([oracle] + [abs(expl.pair(f"x{i}", f"x{j}") - v) for (i, j), v in pair.items()])
    elapsed = time.perf_counter() - t0
    passed = eff <= 1e-9 and additive_ok and null_ok and oracle <= 1e-12 and elapsed < 30
    report_criterion(
        6,
        passed,
        f"efficiency err {eff:.1e}; additive {additive_ok}; null {null_ok}; oracle err {oracle:.1e}; {elapsed:.1f}s",
    )
    assert passed


def test_c07_calibration(report_criterion):
    # every binary labelling of 1..6 distinct scores
    hand_ok, n_sets = True, 0
    for n in range(1, 7):
        scores = np.linspace(0.1, 0.9, n)
        for labels in itertools.product((0, 1), repeat=n):
            y = np.array(labels, dtype=float)
            expected = brute_force_monotone_fit(y, np.ones(n))
            hand_ok &= np.allclose(pav(y, np.ones(n)), expected, atol=1e-12)
            if n >= 2:  # a single point leaves the calibrator at identity
                hand_ok &= np.allclose(isotonic_fit(scores, y).predict(scores), expected, atol=1e-12)
            n_sets += 1
    rng = np.random.default_rng(7)
    worst_gap, n_buffers = -math.inf, 0
    for interval in (50, 200, 500):
        buf = CalibrationBuffer(interval)
        for _ in range(5_000):
            s = rng.random()
            y = int(rng.random() < 0.1 + 0.8 * s**2)
            if buf.add(s, y):
                raw, lab = np.array(buf.scores), np.array(buf.labels)
                worst_gap = max(worst_gap, log_loss(lab, buf.predict(raw)) - log_loss(lab, raw))
                n_buffers += 1
    passed = hand_ok and worst_gap <= 1e-12
    report_criterion(
        7, passed, f"{n_sets} hand sets match brute force: {hand_ok}; worst calibrated-minus-raw log loss over {n_buffers} buffers {worst_gap:.4f}"
    )
    assert passed


def test_c08_label_noise(report_criterion):
    cfg = ScenarioConfig()
    rng = np.random.default_rng(8)
    scores = rng.random(100_000)
    flips = sum(assign_label(s, cfg, rng)[1] != (s >= cfg.qualify_threshold) for s in scores)
    rate = flips / 100_000
    passed = abs(rate - 0.05) <= 0.005
    report_criterion(8, passed, f"flip rate {rate:.4f}")
    assert passed


def test_c09_determinism(tmp_path, report_criterion):
    plan = ExperimentPlan(
        lbl_values=(0.4,), rep_values=(0.6,), variants=("none", "reweight_auto"), seeds=(3,), n_steps=1000
    )
    a = run_plan(plan.with_(out_dir=str(tmp_path / "a")))
    b = run_plan(plan.with_(out_dir=str(tmp_path / "b")))
    key = scenario_key(0.4, 0.6, 3)
    same_data = dataset_path(tmp_path / "a", key).read_bytes() == dataset_path(tmp_path / "b", key).read_bytes()
    files_a = sorted((tmp_path / "a" / "results").rglob("metrics.json"))
    same_metrics = len(files_a) == 4 and all(
        p.read_bytes() == (tmp_path / "b" / p.relative_to(tmp_path / "a")).read_bytes() for p in files_a
    )
    same_records = [r.metrics_dict() for r in a.records] == [r.metrics_dict() for r in b.records]
    passed = same_data and same_metrics and same_records and a.n_failed == 0
    report_criterion(9, passed, f"dataset bytes equal {same_data}; {len(files_a)} metric files equal {same_metrics}")
    assert passed


def test_c10_tradeoff_on_label_equals_group(report_criterion):
    rng = np.random.default_rng(0)
    n = 200
    g = np.repeat([0, 1], n // 2)
    y = 1 - g
    X = np.column_stack([g + rng.normal(0, 0.3, n), rng.normal(size=n)])
    params = GbtParams(n_trees=50)
    base_acc = float(np.mean(gbt_fit(X, y, None, params).predict(X) == y))
    eps = 0.02
    ens = eg_fit(gbt_member_builder(params), X, y, g, ConstraintMoment(MomentKind.DP, eps))
    # the reduction's output is a randomized classifier: score its expected decisions
    approve = ens.expected_positive(X)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        gap = constraint_violation(ConstraintMoment(MomentKind.DP, eps), approve, g, y).max_abs
    acc = float(np.mean(np.where(y == 1, approve, 1 - approve)))
    passed = gap < eps + 0.05 and acc <= base_acc
    report_criterion(10, passed, f"max DP gap {gap:.3f} (< {eps + 0.05:.2f}); accuracy {acc:.3f} vs baseline {base_acc:.3f}")
    assert passed


# --- desk-scale grid ------------------------------------------------------------------------------


def test_c03_structural_bias_emerges(grid, report_criterion):
    plan, _, by_cell, _ = grid
    recalls, times = [], []
    for seed in (0, 1, 2):
        if (0.0, 0.5, seed, "none") in by_cell:
            rec = by_cell[(0.0, 0.5, seed, "none")]
        else:
            t0 = time.perf_counter()
            rec = run_scenario(plan.with_(variants=("none",)), 0.0, 0.5, seed)[0]
            times.append(time.perf_counter() - t0)
        groups = rec.performance["groups"]
        recalls.append((groups["A"]["recall"], groups["B"]["recall"]))
    wins = sum(a > b for a, b in recalls)
    passed = wins >= 2 and all(t < 120 for t in times)
    detail = "; ".join(f"seed {s}: A {a:.3f} / B {b:.3f}" for s, (a, b) in enumerate(recalls))
    report_criterion(3, passed, f"recall(A) > recall(B) in {wins}/3 seeds ({detail})")
    assert passed


def test_c04_dp_reduces_parity_gap(grid, report_criterion):
    plan, result, by_cell, elapsed = grid
    wins, lines = 0, []
    for lbl, rep in itertools.product(plan.lbl_values, plan.rep_values):
        base = np.mean([_abs_spd(by_cell[(lbl, rep, s, "none")]) for s in plan.seeds])
        dp = np.mean([_abs_spd(by_cell[(lbl, rep, s, "eg_dp")]) for s in plan.seeds])
        wins += dp < base
        lines.append(f"({lbl},{rep}) {base:.3f}->{dp:.3f}")
    passed = result.n_failed == 0 and wins >= 12 and elapsed < 30 * 60
    report_criterion(4, passed, f"|SPD| lower with DP in {wins}/16 scenarios; grid {elapsed / 60:.1f} min")
    print("  " + "; ".join(lines))
    assert passed


def test_c05_high_bias_approval_gap(grid, report_criterion):
    plan, _, by_cell, _ = grid
    ratios = []
    for s in plan.seeds:
        groups = by_cell[(*HIGH_BIAS, s, "none")].performance["groups"]
        a, b = groups["A"]["approval_rate"], groups["B"]["approval_rate"]
        ratios.append(a / b if b > 0 else math.inf)
    passed = all(r > 3 for r in ratios)
    report_criterion(5, passed, "approval A/B ratio per seed " + ", ".join(f"{r:.2f}" for r in ratios))
    assert passed


def test_c11_dp_model_dilutes_hubs(grid, report_criterion):
    plan, _, _, _ = grid
    lbl, rep = HIGH_BIAS
    hubs = []
    for seed in range(5):
        if seed not in plan.seeds:
            run_scenario(plan.with_(seeds=(seed,)), lbl, rep, seed)
        res = explain_cell(plan.out, scenario_key(lbl, rep, seed), "offline", "eg_dp", seed=seed, figure=seed == 0)
        hubs.append((res.hubs["none"], res.hubs["eg_dp"]))
    wins = sum(dp < base for base, dp in hubs)
    passed = wins >= 3
    detail = "; ".join(f"seed {s}: {b:.3f}->{d:.3f}" for s, (b, d) in enumerate(hubs))
    report_criterion(11, passed, f"DP hub concentration lower in {wins}/5 seeds ({detail})")
    assert passed
