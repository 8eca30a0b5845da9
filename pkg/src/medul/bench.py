"""Seeded experiment harness for the synthetic study.

Every (dim, method, trial) cell derives its own seed from
``base_seed * 10007 + trial * 31 + dim``, so results do not depend on the
execution order or on how many threads run the trials. All methods of one
(dim, trial) cell see the same data.
"""
from __future__ import annotations

import csv
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from medul.datasets import SyntheticConfig, gen_synthetic, irreducible_error
from medul.errors import MedulError
from medul.estimators import DEFAULT_FOLDS, DEFAULT_W, METHODS, empirical_J, fit_method, mse

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = ["dim", "method", "n", "n_prime", "trials", "mean_mse", "median_mse", "se_mse"]
RATE_COLUMNS = ["n", "method", "trials", "irreducible_mse", "median_excess_mse", "mean_excess_mse"]


@dataclass(frozen=True)
class ExperimentConfig:
    generator: SyntheticConfig = field(default_factory=SyntheticConfig)
    dims: tuple = (2, 5, 10, 20)
    methods: tuple = METHODS
    trials: int = 20
    base_seed: int = 0
    f_features: str = "rbf:200"
    h_features: str = "rbf:200"
    g_features: str = "rbf:200"
    lam: object = "auto"
    w: float = DEFAULT_W
    folds: int = DEFAULT_FOLDS
    timing: bool = False
    out: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.dims:
            raise ValueError("dims must be non-empty")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ValueError(f"unknown methods {sorted(bad)}")


@dataclass(frozen=True)
class MetricsRow:
    dim: int
    method: str
    trial: int
    seed: int
    test_mse: float
    train_J: float
    wall_ms: int
    error: str = ""


def trial_seed(base_seed: int, trial_index: int, dim: int) -> int:
    return base_seed * 10007 + trial_index * 31 + dim


def run_trial(cfg: ExperimentConfig, dim: int, method: str, trial_index: int) -> MetricsRow:
    """Generate one dataset, fit one method, score it on the coupled test set.

    Fit failures become rows with NaN metrics and the error message.
    """
    seed = trial_seed(cfg.base_seed, trial_index, dim)
    gen = replace(cfg.generator, dim=dim, seed=seed)
    start = time.perf_counter()
    try:
        S_X, S_Y, test = gen_synthetic(gen)
        model = fit_method(
            method, S_X, S_Y, cfg.f_features, cfg.h_features, cfg.g_features,
            w=cfg.w, lam=cfg.lam, seed=seed, folds=cfg.folds,
        )
        test_mse = mse(model.predict(test.left), test.right)
        train_J = empirical_J(model.f, model.h, S_X, S_Y, 0.5)
        error = ""
    except (MedulError, ValueError) as exc:
        log.warning("trial dim=%d method=%s trial=%d failed: %s", dim, method, trial_index, exc)
        test_mse = train_J = float("nan")
        error = f"{type(exc).__name__}: {exc}"
    wall = int(round((time.perf_counter() - start) * 1000)) if cfg.timing else 0
    return MetricsRow(dim, method, trial_index, seed, float(test_mse), float(train_J), wall, error)


def _threads(threads):
    if threads is not None:
        return max(1, int(threads))
    return max(1, int(os.environ.get("MEDUL_THREADS", "1")))


def run_cells(cfg: ExperimentConfig, cells, threads=None) -> list[MetricsRow]:
    """Run ``(dim, method, trial)`` cells, serially or on a thread pool, sorted on return."""
    cells = list(cells)
    n = _threads(threads)
    if n == 1:
        rows = [run_trial(cfg, *c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            rows = list(pool.map(lambda c: run_trial(cfg, *c), cells))
    return sorted(rows, key=lambda r: (r.dim, r.method, r.trial))


def summarize(rows, n=None, n_prime=None) -> list[dict]:
    """Per (dim, method): mean, median and standard error (sample std / sqrt(trials)) of test MSE.

    Failed rows are left out; with a single successful trial the standard error is 0.
    """
    groups: dict = {}
    for r in rows:
        if not r.error and np.isfinite(r.test_mse):
            groups.setdefault((r.dim, r.method), []).append(r.test_mse)
    out = []
    for (dim, method), vals in sorted(groups.items()):
        v = np.array(vals)
        se = float(np.std(v, ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0
        out.append({
            "dim": dim, "method": method, "n": n, "n_prime": n_prime, "trials": int(v.size),
            "mean_mse": float(v.mean()), "median_mse": float(np.median(v)), "se_mse": se,
        })
    return out


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def write_rows_csv(rows, path) -> None:
    names = [f.name for f in fields(MetricsRow)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for r in rows:
            d = asdict(r)
            w.writerow([_fmt(d[k]) for k in names])


def write_dicts_csv(records, columns, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for rec in records:
            w.writerow([_fmt(rec[c]) for c in columns])


def run_experiment(cfg: ExperimentConfig, out_dir=None, threads=None):
    """Run the full grid; write ``metrics.csv`` and ``summary.csv`` into ``out_dir`` if given."""
    cells = [(d, m, t) for d in cfg.dims for m in cfg.methods for t in range(cfg.trials)]
    rows = run_cells(cfg, cells, threads)
    summary = summarize(rows, cfg.generator.n, cfg.generator.n_prime)
    out_dir = out_dir if out_dir is not None else cfg.out
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_rows_csv(rows, os.path.join(out_dir, "metrics.csv"))
        write_dicts_csv(summary, SUMMARY_COLUMNS, os.path.join(out_dir, "summary.csv"))
    return rows, summary


def rate_study(cfg: ExperimentConfig, n_list, methods=("twostep",), out_path=None, threads=None):
    """Median excess test MSE against sample size (n = n'), at ``cfg.generator.dim``.

    Excess is test MSE minus the generator's exact irreducible error
    (:func:`medul.datasets.irreducible_error`), which is only known for the
    synthetic generators.
    """
    n_list = [int(v) for v in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly increasing")
    dim = cfg.generator.dim
    records = []
    for n in n_list:
        sub = replace(cfg, generator=replace(cfg.generator, n=n, n_prime=n), dims=(dim,), methods=tuple(methods))
        rows = run_cells(sub, [(dim, m, t) for m in methods for t in range(cfg.trials)], threads)
        for m in methods:
            floor = irreducible_error(sub.generator)
            ex = np.array([r.test_mse for r in rows if r.method == m and not r.error]) - floor
            records.append({
                "n": n, "method": m, "trials": int(ex.size), "irreducible_mse": floor,
                "median_excess_mse": float(np.median(ex)) if ex.size else float("nan"),
                "mean_excess_mse": float(np.mean(ex)) if ex.size else float("nan"),
            })
    if out_path is not None:
        write_dicts_csv(records, RATE_COLUMNS, out_path)
    return records
