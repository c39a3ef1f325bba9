import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairabm.config import (
    ConfigError,
    Group,
    ScenarioConfig,
    dumps_scenario,
    load_scenario,
    loads_scenario,
    save_scenario,
)
from fairabm.dataset import (
    DATASET_SCHEMA,
    FEATURES,
    SchemaError,
    VisibilityMask,
    VisibleData,
    dumps_csv,
    export_csv,
    export_json,
    fingerprint,
    import_csv,
    import_json,
    loads_csv,
    mask_features,
    stream_batches,
    to_visible,
)
from fairabm.sim import DatasetRow, run_simulation


def fixture_rows(n=10):
    rng = np.random.default_rng(0)
    rows = []
    for i in range(n):
        rows.append(
            DatasetRow(
                entity_id=i,
                timestep=3 * i,
                group=Group.A if i % 3 else Group.B,
                wealth=float(rng.uniform(30, 89)),
                education=int(i % 5),
                trust=float(rng.random()),
                fin_lit=float(rng.random()),
                credit_score=float(rng.random()),
                loan_hist=int(i % 4),
                loan_amount=float(rng.uniform(10, 300)),
                has_job=bool(i % 2),
                has_car=bool(i % 3 == 0),
                has_house=False,
                qualified=bool(i % 2),
                loan_approved=bool(i % 2),
                raw_score=1 / (i + 3),
                biased_score=0.1 * i,
            )
        )
    return rows


# --- scenario files -------------------------------------------------------------------------------


def test_scenario_round_trip(tmp_path):
    cfg = ScenarioConfig(lbl_beta=0.4, rep_alpha=0.7, n_steps=123, rng_seed=2**40 + 3)
    path = tmp_path / "s.toml"
    save_scenario(cfg, path)
    assert load_scenario(path) == cfg
    assert dumps_scenario(load_scenario(path)) == path.read_text()


def test_scenario_partial_file_uses_defaults():
    cfg = loads_scenario('lbl_beta = 0.5\n[group_params.B]\np_job = 0.75\n')
    assert cfg.lbl_beta == 0.5 and cfg.rep_alpha == 0.5
    assert cfg.group_params[Group.B].p_job == 0.75
    assert cfg.group_params[Group.A].p_job == 0.9


@pytest.mark.parametrize(
    "text",
    [
        'schema = "fairabm.scenario/99"\n',
        "lbl_beta = 1.0\n",
        "n_steps = -1\n",
        "no_such_key = 1\n",
        "[group_params.C]\np_job = 0.5\n",
        "[group_params.A]\np_job = 1.5\n",
    ],
)
def test_invalid_scenarios_are_rejected(text):
    with pytest.raises(ConfigError):
        loads_scenario(text)


# --- masking --------------------------------------------------------------------------------------


def test_default_mask_hides_leaky_features():
    row = fixture_rows(1)[0]
    mask = VisibilityMask()
    assert mask.visible == ("fin_lit", "loan_hist", "loan_amount", "has_job", "has_car", "has_house")
    vec = mask_features(row, mask)
    assert vec.tolist() == [row.fin_lit, row.loan_hist, row.loan_amount, 1.0 * row.has_job, 1.0 * row.has_car, 0.0]


def test_empty_mask_shows_all_features_in_schema_order():
    row = fixture_rows(2)[1]
    vec = mask_features(row, VisibilityMask(frozenset()))
    assert len(vec) == len(FEATURES)
    assert vec[0] == row.wealth


def test_unknown_and_total_masks_are_errors():
    with pytest.raises(SchemaError):
        VisibilityMask(frozenset({"shoe_size"}))
    with pytest.raises(SchemaError):
        VisibilityMask(frozenset(FEATURES))


def test_visible_data_never_carries_hidden_columns():
    rows = fixture_rows()
    data = to_visible(rows)
    assert isinstance(data, VisibleData)
    assert not {"wealth", "credit_score", "education", "trust", "raw_score"} & set(data.feature_names)
    assert data.X.shape == (10, 6)
    assert data.groups.tolist() == [1 if r.group is Group.B else 0 for r in rows]
    assert data.y.tolist() == [r.label for r in rows]


# --- export / import ------------------------------------------------------------------------------


def test_csv_fixture_round_trip(tmp_path):
    rows = fixture_rows()
    path = tmp_path / "d.csv"
    export_csv(rows, path)
    back = import_csv(path)
    assert back == rows
    export_csv(back, tmp_path / "d2.csv")
    assert (tmp_path / "d2.csv").read_bytes() == path.read_bytes()


def test_csv_dialect():
    text = dumps_csv(fixture_rows(3))
    lines = text.split("\n")
    assert lines[0] == f"# schema: {DATASET_SCHEMA}"
    assert "\r" not in text
    header = lines[1].split(",")
    assert header[:3] == ["entity_id", "timestep", "group"]
    first = dict(zip(header, lines[2].split(",")))
    assert first["has_job"] in ("0", "1") and first["group"] in ("A", "B")


def test_empty_dataset_is_header_only():
    text = dumps_csv([])
    assert text.count("\n") == 2
    assert loads_csv(text) == []


def test_csv_without_diagnostics_reimports_with_nan_diagnostics():
    rows = fixture_rows(2)
    back = loads_csv(dumps_csv(rows, include_diagnostics=False))
    assert math.isnan(back[0].raw_score)
    assert back[0].fin_lit == rows[0].fin_lit


def test_csv_schema_mismatch_is_rejected():
    text = dumps_csv(fixture_rows(2)).replace(DATASET_SCHEMA, "fairabm.dataset/0")
    with pytest.raises(SchemaError):
        loads_csv(text)
    text = dumps_csv(fixture_rows(2)).replace("loan_hist", "loan_history")
    with pytest.raises(SchemaError):
        loads_csv(text)


def test_json_round_trip(tmp_path):
    rows = fixture_rows()
    export_json(rows, tmp_path / "d.json")
    assert import_json(tmp_path / "d.json") == rows


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=5))
def test_float_fields_round_trip_exactly(values):
    base = fixture_rows(1)[0]
    rows = [DatasetRow(**{**{f: getattr(base, f) for f in base.__slots__}, "loan_amount": v}) for v in values]
    assert [r.loan_amount for r in loads_csv(dumps_csv(rows))] == values


def test_simulated_export_is_byte_stable(tmp_path):
    cfg = ScenarioConfig(n_steps=500, rng_seed=9)
    export_csv(run_simulation(cfg), tmp_path / "a.csv")
    export_csv(run_simulation(cfg), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert fingerprint(run_simulation(cfg)) == fingerprint(import_csv(tmp_path / "a.csv"))


# --- streaming ------------------------------------------------------------------------------------


def test_batches_250_by_100():
    assert [b.size for b in stream_batches(list(range(250)), 100)] == [100, 100, 50]
    assert [b.size for b in stream_batches([0], 100)] == [1]


def test_batches_preserve_order_on_10k_rows():
    rows = list(range(10_000))
    batches = list(stream_batches(rows, 100))
    assert len(batches) == 100
    assert [x for b in batches for x in b.rows] == rows
    assert [b.start for b in batches] == list(range(0, 10_000, 100))


@given(st.integers(0, 500), st.integers(1, 120))
def test_batch_count_is_ceiling(n, size):
    batches = list(stream_batches(list(range(n)), size))
    assert len(batches) == math.ceil(n / size)
    assert sum(b.size for b in batches) == n


def test_zero_batch_size_is_config_error():
    with pytest.raises(ConfigError):
        list(stream_batches([1, 2], 0))
