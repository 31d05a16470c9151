import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from _oracles import js_distance_definition
from nashpoly.harness import (
    ExperimentReport,
    LstsqExperimentConfig,
    jensen_shannon,
    macaulay_growth_table,
    match_profiles,
    profile_js,
    run_lstsq_experiment,
    run_recovery_experiment,
)
from nashpoly.stochastic import preset
from strategies import simplex


def test_js_extremes():
    assert jensen_shannon([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert jensen_shannon([1, 0], [0, 1]) == pytest.approx(math.sqrt(math.log(2)))
    with pytest.raises(ValueError):
        jensen_shannon([1, 0], [1, 0, 0])


@given(st.integers(2, 6).flatmap(lambda n: st.tuples(simplex(n), simplex(n))))
def test_js_properties(pq):
    p, q = pq
    d = jensen_shannon(p, q)
    assert d == pytest.approx(jensen_shannon(q, p), abs=1e-12)
    assert -1e-12 <= d <= math.sqrt(math.log(2)) + 1e-12
    assert d == pytest.approx(js_distance_definition(p, q), abs=1e-7)


def test_profile_js_is_player_mean():
    p = [np.array([1.0, 0.0]), np.array([0.5, 0.5])]
    q = [np.array([0.0, 1.0]), np.array([0.5, 0.5])]
    assert profile_js(p, q) == pytest.approx(0.5 * math.sqrt(math.log(2)))


def test_greedy_matching():
    a = [np.array([0.9, 0.1])]
    b = [np.array([0.1, 0.9])]
    truth = [[np.array([0.1, 0.9])], [np.array([0.88, 0.12])]]
    pairs = match_profiles([a, b], truth)
    assert sorted((i, j) for i, j, _ in pairs) == [(0, 1), (1, 0)]
    # far candidates stay unmatched
    assert match_profiles([[np.array([0.5, 0.5])]], [[np.array([1.0, 0.0])]]) == []


def test_empty_recovery_report():
    rep = run_recovery_experiment("chicken", preset("bs_1000"), num_trials=0)
    assert rep.records == [] and rep.aggregates["undefined"]
    again = ExperimentReport.from_json(rep.to_json())
    assert again.aggregates == rep.aggregates


def test_recovery_single_trial(tmp_path):
    rep = run_recovery_experiment("chicken", preset("bs_1000"), seeds=[1])
    assert rep.records[0]["success"]
    assert rep.aggregates["success_rate"] == 1.0
    assert rep.aggregates["mean_js"] < 0.05
    path = rep.write(tmp_path)
    loaded = ExperimentReport.from_json(path.read_text())
    assert loaded.aggregates == rep.aggregates
    assert (tmp_path / "recovery_chicken.csv").exists()


def test_report_rejects_tampered_aggregates():
    rep = run_lstsq_experiment(LstsqExperimentConfig((2,), (1.0,), 50, 0))
    data = json.loads(rep.to_json())
    data["aggregates"]["2x2@1.0"]["success_rate"] = 0.5
    with pytest.raises(ValueError):
        ExperimentReport.from_json(json.dumps(data))


def test_lstsq_experiment_round_trip(tmp_path):
    rep = run_lstsq_experiment(LstsqExperimentConfig((2, 3), (1.0, 0.25), 100, 3))
    assert set(rep.aggregates) == {"2x2@1.0", "2x2@0.25", "3x3@1.0", "3x3@0.25"}
    assert rep.aggregates["2x2@1.0"]["success_rate"] == 1.0
    rep.write(tmp_path)
    header = (tmp_path / "lstsq.csv").read_text().splitlines()[0]
    assert "eps_ls" in header and "eps_uniform" in header
    assert ExperimentReport.from_json((tmp_path / "lstsq.json").read_text()).aggregates == rep.aggregates


def test_growth_table():
    rows = macaulay_growth_table([(2, 2)], [1, 3])
    assert [(r["n_rows"], r["n_cols"]) for r in rows] == [(4, 5), (840, 715)]
    fit = macaulay_growth_table([(2, 2)], [3, 5, 7, 9])
    assert abs(fit[0]["col_slope"] - 4) <= 0.5
    assert abs(fit[0]["row_slope"] - 4) <= 0.5
    single = macaulay_growth_table([(2, 3)], [2])
    assert math.isnan(single[0]["row_slope"])
