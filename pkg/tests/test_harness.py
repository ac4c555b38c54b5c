"""Monte Carlo harness: Wilson intervals, rate fits, experiments, determinism."""

import csv
import io
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from singlab import (
    CheckBoundsConfig,
    ConfigError,
    DiscreteDist,
    ExperimentConfig,
    GraphScheme,
    IIDScheme,
    InsufficientDataError,
    SeedSpec,
    TableScheme,
    check_bounds,
    config_from_json,
    enumerate_singularity,
    exact_rank_process,
    fit_rate,
    graph_experiment,
    mc_singularity,
    rank,
    run_rank_process,
    sample_ginibre,
    wilson_interval,
)
from singlab.ensembles import DensityRule, SparseBernoulliScheme
from singlab.harness import CSV_COLUMNS, Z95, Z99, check_bounds_config_from_json

F = Fraction

BERN = DiscreteDist.bernoulli(F(1, 2))
RAD = DiscreteDist.rademacher()


# -- Wilson intervals --------------------------------------------------------------


@given(st.integers(1, 2000), st.data())
def test_wilson_contains_p_hat_and_stays_in_unit_interval(trials, data):
    count = data.draw(st.integers(0, trials))
    for z in (Z95, Z99):
        lo, hi = wilson_interval(count, trials, z)
        assert 0.0 <= lo <= count / trials <= hi <= 1.0


def test_wilson_endpoints():
    lo, hi = wilson_interval(0, 100, Z95)
    assert lo == 0.0 and 0.0 < hi < 0.06
    lo, hi = wilson_interval(100, 100, Z95)
    assert 0.94 < lo < 1.0 and hi == 1.0


def test_wilson_against_independent_formula():
    # transliterated directly from the score-interval definition
    count, trials, z = 37, 250, Z99
    p = count / trials
    lo, hi = wilson_interval(count, trials, z)
    mid = (p + z * z / (2 * trials)) / (1 + z * z / trials)
    rad = (
        z
        * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
        / (1 + z * z / trials)
    )
    assert lo == pytest.approx(mid - rad)
    assert hi == pytest.approx(mid + rad)


def test_wilson_width_shrinks_with_quadrupled_trials():
    lo1, hi1 = wilson_interval(300, 1000, Z95)
    lo4, hi4 = wilson_interval(1200, 4000, Z95)
    ratio = (hi1 - lo1) / (hi4 - lo4)
    assert 1.6 <= ratio <= 2.4


def test_wilson_validation():
    with pytest.raises(ConfigError):
        wilson_interval(1, 0, Z95)
    with pytest.raises(ConfigError):
        wilson_interval(5, 4, Z95)
    with pytest.raises(ConfigError):
        wilson_interval(-1, 4, Z95)


# -- rate fitting -----------------------------------------------------------------


def test_fit_rate_exact_power_law():
    points = [(float(n), n ** -0.5) for n in (4, 8, 16, 32, 64)]
    fit = fit_rate(points)
    assert abs(fit.exponent - (-0.5)) < 1e-12
    assert abs(fit.intercept) < 1e-12
    assert fit.stderr < 1e-12
    assert fit.points == 5


def test_fit_rate_scaled_power_law():
    points = [(float(n), 3.0 / n) for n in (5, 10, 20, 40)]
    fit = fit_rate(points)
    assert abs(fit.exponent - (-1.0)) < 1e-12
    assert fit.intercept == pytest.approx(math.log(3.0))


def test_fit_rate_multiplicative_noise():
    factors = [0.95, 1.08, 0.92, 1.10, 0.90, 1.05]
    points = [
        (float(n), n ** -0.5 * f) for n, f in zip((4, 8, 16, 32, 64, 128), factors)
    ]
    fit = fit_rate(points)
    assert abs(fit.exponent - (-0.5)) < 0.15
    assert fit.stderr > 0.0


def test_fit_rate_insufficient_data():
    with pytest.raises(InsufficientDataError):
        fit_rate([(4.0, 0.5), (8.0, 0.25)])
    with pytest.raises(InsufficientDataError):
        fit_rate([(4.0, 0.5), (8.0, 0.0), (16.0, 0.1)])
    with pytest.raises(InsufficientDataError):
        fit_rate([(0.0, 0.5), (8.0, 0.2), (16.0, 0.1)])
    with pytest.raises(InsufficientDataError):
        fit_rate([(4.0, 0.5), (4.0, 0.25), (4.0, 0.125)])


# -- configuration parsing -----------------------------------------------------------


def _base_config(**kw):
    defaults = dict(scheme=IIDScheme(BERN), kind="ginibre", ns=(2, 4), trials=50, seed=1)
    defaults.update(kw)
    return ExperimentConfig(**defaults)


def test_config_json_round_trip():
    cfg = _base_config(classify=True, workers=2, eps=0.4, experiment_id="demo")
    assert config_from_json(cfg.to_json()) == cfg


def test_config_validation():
    with pytest.raises(ConfigError):
        _base_config(kind="hermite")
    with pytest.raises(ConfigError):
        _base_config(ns=())
    with pytest.raises(ConfigError):
        _base_config(ns=(4, 2))
    with pytest.raises(ConfigError):
        _base_config(ns=(2, 2))
    with pytest.raises(ConfigError):
        _base_config(trials=0)
    with pytest.raises(ConfigError):
        _base_config(eps=1.0)
    with pytest.raises(ConfigError):
        _base_config(workers=0)
    with pytest.raises(ConfigError):
        _base_config(seed=-1)


def test_config_kind_scheme_compatibility():
    with pytest.raises(ConfigError):
        _base_config(kind="graph")  # needs a graph scheme
    graph = GraphScheme(DensityRule(c=1.0, beta=0.3))
    with pytest.raises(ConfigError):
        _base_config(kind="graph", scheme=graph, eps=0.8)  # eps + beta >= 1
    _base_config(kind="graph", scheme=graph, eps=0.2)  # fine
    point = DiscreteDist.point(0)
    asym = TableScheme(((BERN, RAD), (point, BERN)))
    with pytest.raises(ConfigError):
        _base_config(kind="wigner", scheme=asym, ns=(2,))
    with pytest.raises(ConfigError):
        _base_config(kind="rank_process", scheme=asym, ns=(2,))


def test_config_from_json_error_paths():
    good = _base_config().to_json()
    with pytest.raises(ConfigError):
        config_from_json({**good, "mystery": 1})
    with pytest.raises(ConfigError):
        config_from_json({k: v for k, v in good.items() if k != "scheme"})
    with pytest.raises(ConfigError):
        config_from_json({**good, "ns": "2,4"})
    with pytest.raises(ConfigError):
        config_from_json({**good, "ns": [2, True]})
    with pytest.raises(ConfigError):
        config_from_json({**good, "trials": 2.5})
    with pytest.raises(ConfigError):
        config_from_json({**good, "classify": "yes"})
    with pytest.raises(ConfigError):
        config_from_json({**good, "out": 7})
    with pytest.raises(ConfigError):
        config_from_json([good])


# -- Monte Carlo singularity ------------------------------------------------------------


def test_mc_singularity_tracks_exact_probability():
    cfg = _base_config(ns=(2,), trials=2000, seed=5)
    report = mc_singularity(cfg)
    row = report.rows[0]
    exact = float(enumerate_singularity(IIDScheme(BERN), 2, "ginibre"))
    assert row.wilson99[0] <= exact <= row.wilson99[1]
    assert row.trials == 2000
    assert row.p_hat == row.singular_count / 2000
    assert row.extras["zero_row_violations"] == 0
    assert row.bound_value == pytest.approx(math.sqrt(2.0) / math.sqrt(2))


def test_mc_singularity_matches_manual_stream_replay():
    cfg = _base_config(ns=(3,), trials=25, seed=9)
    report = mc_singularity(cfg)
    spec = SeedSpec(9, "ginibre")
    manual = sum(
        rank(sample_ginibre(IIDScheme(BERN), 3, spec, trial=t)) < 3 for t in range(25)
    )
    assert report.rows[0].singular_count == manual


def test_mc_singularity_deterministic_and_worker_invariant():
    cfg = _base_config(ns=(2, 3), trials=120, seed=7)
    a = mc_singularity(cfg)
    b = mc_singularity(cfg)
    assert a.to_csv() == b.to_csv()
    c = mc_singularity(_base_config(ns=(2, 3), trials=120, seed=7, workers=4))
    assert a.to_csv() == c.to_csv()
    assert [r.singular_count for r in a.rows] == [r.singular_count for r in c.rows]


def test_mc_singularity_csv_layout():
    report = mc_singularity(_base_config(ns=(2,), trials=30))
    text = report.to_csv()
    parsed = list(csv.reader(io.StringIO(text)))
    assert parsed[0] == list(CSV_COLUMNS)
    assert len(parsed) == 2
    row = parsed[1]
    assert row[0] == "2" and row[1] == "30"
    assert float(row[3]) == report.rows[0].p_hat  # repr round-trips exactly
    assert float(row[8]) == report.rows[0].mean_deficiency


def test_mc_singularity_classification_partition():
    cfg = _base_config(kind="wigner", ns=(3,), trials=200, classify=True, seed=3)
    row = mc_singularity(cfg).rows[0]
    ex = row.extras
    assert ex["normal"] + ex["abnormal"] == row.singular_count
    assert ex["perfect"] + ex["imperfect"] == row.trials - row.singular_count


def test_mc_singularity_fit_note_when_too_few_positive_sizes():
    cfg = _base_config(scheme=IIDScheme(RAD), ns=(1, 2), trials=50, seed=2)
    report = mc_singularity(cfg)
    assert report.rows[0].singular_count == 0  # a +-1 scalar is never zero
    assert report.fit is None
    assert "need 3" in report.fit_note


def test_mc_singularity_rejects_rank_process_kind():
    with pytest.raises(ConfigError):
        mc_singularity(_base_config(kind="rank_process", ns=(2, 3)))


def test_mc_singularity_wigner_bound_column():
    from singlab import wigner_rate

    cfg = _base_config(kind="wigner", ns=(4,), trials=20, eps=0.5)
    row = mc_singularity(cfg).rows[0]
    assert row.bound_value == pytest.approx(wigner_rate(0.5, 4, 0.5)[1])


# -- graph experiments --------------------------------------------------------------


def test_graph_experiment_bookkeeping():
    scheme = GraphScheme(DensityRule(c=1.0, beta=0.3))
    cfg = ExperimentConfig(scheme=scheme, kind="graph", ns=(8,), trials=400, seed=11, eps=0.2)
    report = graph_experiment(cfg)
    row = report.rows[0]
    ex = row.extras
    assert ex["implication_violations"] == 0
    assert ex["zero_row_violations"] == 0
    assert sum(ex["isolated_hist"].values()) == row.trials
    from singlab import graph_rate

    assert row.bound_value == pytest.approx(graph_rate(1.0, 0.3, 0.2, 8))


def test_graph_experiment_fixed_density_bound_is_nan():
    scheme = GraphScheme(DensityRule(fixed=F(1, 2)))
    cfg = ExperimentConfig(scheme=scheme, kind="graph", ns=(4,), trials=50, seed=1)
    row = graph_experiment(cfg).rows[0]
    assert math.isnan(row.bound_value)


def test_graph_experiment_kind_guard():
    with pytest.raises(ConfigError):
        graph_experiment(_base_config(kind="ginibre"))


# -- rank process -------------------------------------------------------------------


def test_rank_process_matches_exact_expectations():
    cfg = _base_config(kind="rank_process", ns=(1, 2, 3), trials=4000, seed=13)
    report = run_rank_process(cfg)
    exact = exact_rank_process(IIDScheme(BERN), 3)
    for row, mean in zip(report.rows, exact):
        assert abs(row.extras["x_mean"] - mean) <= 2.0 * row.extras["x_half95"]
        assert row.extras["kappa"] == 0.5
    assert report.extras["bad_increments"] == 0
    hist_total = report.extras["increment_hist_total"]
    assert sum(hist_total.values()) == 2 * 4000  # one increment per growth step


def test_rank_process_increment_histograms():
    cfg = _base_config(kind="rank_process", ns=(2, 4), trials=300, seed=4)
    report = run_rank_process(cfg)
    for row in report.rows:
        hist = row.extras["increment_hist"]
        assert set(hist) <= {"0", "1", "2"}
        assert sum(hist.values()) == row.trials


def test_rank_process_worker_invariance():
    base = _base_config(kind="rank_process", ns=(2, 3), trials=90, seed=6)
    split = _base_config(kind="rank_process", ns=(2, 3), trials=90, seed=6, workers=3)
    assert run_rank_process(base).to_csv() == run_rank_process(split).to_csv()


def test_rank_process_kind_guard():
    with pytest.raises(ConfigError):
        run_rank_process(_base_config(kind="wigner", ns=(2,)))


# -- bound-check battery ---------------------------------------------------------------


def test_check_bounds_small_battery_all_hold():
    cfg = CheckBoundsConfig(
        trials=800,
        seed=0,
        pairs=((3, 2), (4, 2)),
        shape_ns=(4, 6),
        zero_ns=(3, 5),
    )
    report = check_bounds(cfg)
    assert report.all_hold
    experiments = [r.experiment for r in report.rows]
    assert experiments.count("fixed_corner_fill") == 2
    assert experiments.count("random_corner_deficit") == 2
    assert experiments.count("sparse_wigner_shape") == 2
    assert experiments.count("sparse_ginibre_growth") == 2
    assert experiments.count("first_row_zero") == 2
    text = report.to_text()
    assert "fixed_corner_fill" in text and "NO" not in text
    blob = report.to_json()
    assert blob["all_hold"] is True
    assert set(blob["rows"][0]) == {
        "experiment",
        "params",
        "n",
        "trials",
        "empirical",
        "reference",
        "holds",
        "note",
    }


def test_check_bounds_corner_rows_respect_closed_forms():
    cfg = CheckBoundsConfig(trials=600, pairs=((4, 2),), shape_ns=(4, 6), zero_ns=(3, 5))
    rows = {(r.experiment, r.n): r for r in check_bounds(cfg).rows}
    fill = rows[("fixed_corner_fill", 4)]
    assert fill.reference == pytest.approx(0.25)  # kappa^(m-k) at kappa=1/2
    deficit = rows[("random_corner_deficit", 4)]
    assert deficit.reference == pytest.approx(0.25)  # kappa/(1-kappa) = 1


def test_check_bounds_config_parsing():
    cfg = check_bounds_config_from_json(
        {"trials": 100, "kappa": "1/3", "pairs": [[3, 2]], "shape_ns": [4, 8]}
    )
    assert cfg.kappa == F(1, 3)
    assert cfg.pairs == ((3, 2),)
    with pytest.raises(ConfigError):
        check_bounds_config_from_json({"mystery": 1})
    with pytest.raises(ConfigError):
        CheckBoundsConfig(pairs=((2, 3),))
    with pytest.raises(ConfigError):
        CheckBoundsConfig(gamma=1.0)
    with pytest.raises(ConfigError):
        CheckBoundsConfig(shape_ns=(8, 4))


# -- report serialization ----------------------------------------------------------------


def test_report_files_round_trip(tmp_path):
    report = mc_singularity(_base_config(ns=(2,), trials=40))
    csv_path = tmp_path / "out.csv"
    json_path = tmp_path / "out.json"
    report.write_csv(str(csv_path))
    report.write_json(str(json_path))
    assert csv_path.read_text() == report.to_csv()
    import json as jsonlib

    blob = jsonlib.loads(json_path.read_text())
    assert blob["kind"] == "ginibre"
    assert blob["rows"][0]["n"] == 2
    assert blob["scheme"] == {"kind": "iid", "dist": {"atoms": [["0", "1/2"], ["1", "1/2"]]}}
