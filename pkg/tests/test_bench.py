import csv
import math
from dataclasses import replace

import numpy as np
import pytest

from medul import bench
from medul.bench import ExperimentConfig, MetricsRow, rate_study, run_experiment, run_trial, summarize, trial_seed
from medul.datasets import SyntheticConfig, irreducible_error


def _small(**kw):
    gen = SyntheticConfig(dim=2, n=80, n_prime=80, n_test=200)
    base = dict(generator=gen, dims=(1, 2), trials=2, f_features="rbf:15", h_features="rbf:15", g_features="rbf:15")
    base.update(kw)
    return ExperimentConfig(**base)


def test_seed_formula():
    assert trial_seed(3, 4, 5) == 3 * 10007 + 4 * 31 + 5


def test_run_trial_deterministic():
    cfg = _small()
    assert run_trial(cfg, 2, "joint", 1) == run_trial(cfg, 2, "joint", 1)
    row = run_trial(cfg, 2, "joint", 1)
    assert row.seed == trial_seed(0, 1, 2) and row.error == "" and row.test_mse >= 0 and row.wall_ms == 0
    assert run_trial(replace(cfg, timing=True), 2, "joint", 1).test_mse == row.test_mse


def test_noiseless_sanity():
    gen = SyntheticConfig(dim=1, n=4000, n_prime=4000, n_test=5000, noise_y_var=0.0)
    cfg = ExperimentConfig(generator=gen, dims=(1,), trials=1, f_features="poly:6", h_features="poly:6", lam=1e-8)
    row = run_trial(cfg, 1, "twostep", 0)
    assert row.test_mse - irreducible_error(gen) < 5e-3


def test_summarize_hand_rows():
    rows = [MetricsRow(2, "joint", t, 0, v, 0.0, 0) for t, v in enumerate([1.0, 2.0, 3.0])]
    (s,) = summarize(rows, 10, 20)
    assert s["mean_mse"] == 2.0 and s["median_mse"] == 2.0 and s["trials"] == 3
    assert s["se_mse"] == pytest.approx(1 / math.sqrt(3), abs=1e-12)
    assert (s["n"], s["n_prime"]) == (10, 20)
    (one,) = summarize(rows[:1])
    assert one["se_mse"] == 0.0


def test_failed_rows_recorded_not_aborted():
    rows = [MetricsRow(2, "joint", 0, 0, 1.0, 0.0, 0), MetricsRow(2, "joint", 1, 0, float("nan"), float("nan"), 0, "NotSPD: x")]
    assert summarize(rows)[0]["trials"] == 1
    # an impossible feature spec fails inside the trial and comes back as a row
    row = run_trial(_small(f_features="poly:0"), 2, "twostep", 0)
    assert row.error.startswith("ValueError") and math.isnan(row.test_mse)


def test_experiment_csvs_and_parallel_identity(tmp_path):
    cfg = _small()
    rows, summary = run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b", threads=4)
    run_experiment(cfg, tmp_path / "c")
    for name in ("metrics.csv", "summary.csv"):
        a = (tmp_path / "a" / name).read_bytes()
        assert a == (tmp_path / "b" / name).read_bytes() == (tmp_path / "c" / name).read_bytes()
    with open(tmp_path / "a" / "summary.csv") as fh:
        assert next(csv.reader(fh)) == bench.SUMMARY_COLUMNS
    keys = [(r.dim, r.method, r.trial) for r in rows]
    assert keys == sorted(keys) and len(rows) == 2 * 3 * 2
    assert len(summary) == 2 * 3


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv("MEDUL_THREADS", "3")
    assert bench._threads(None) == 3
    assert bench._threads(2) == 2


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(trials=0)
    with pytest.raises(ValueError):
        ExperimentConfig(dims=())
    with pytest.raises(ValueError):
        ExperimentConfig(methods=("mlp",))


def test_rate_single_n_and_validation(tmp_path):
    cfg = _small(trials=2)
    out = tmp_path / "rate.csv"
    recs = rate_study(cfg, [100], out_path=out)
    assert len(recs) == 1 and recs[0]["n"] == 100
    assert recs[0]["irreducible_mse"] == irreducible_error(cfg.generator)
    assert out.read_text().splitlines()[0] == ",".join(bench.RATE_COLUMNS)
    with pytest.raises(ValueError):
        rate_study(cfg, [500, 125])


def test_violated_excess_plateaus():
    gen = SyntheticConfig(dim=1, n_test=5000, setting="violated")
    cfg = ExperimentConfig(generator=gen, dims=(1,), trials=3, f_features="poly:4", h_features="poly:4")
    recs = rate_study(cfg, [500, 2000])
    assert all(r["median_excess_mse"] > 0.01 for r in recs)
