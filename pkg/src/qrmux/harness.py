"""Experiment runner: seeded parameter sweeps, ESN baselines, analysis.

Every trial's seeds are derived from the base seed and the coordinates of
its grid cell through a fixed cryptographic hash, so sweeps are reproducible
across runs and across worker counts. Results are written as one long-format
CSV of per-trial metrics, an aggregated mean/std CSV, and a JSON manifest of
the full configuration.
"""

from __future__ import annotations

import concurrent.futures
import csv
import hashlib
import json
import math
import multiprocessing
import os
import warnings
from dataclasses import asdict, dataclass
from itertools import product
from pathlib import Path

import numpy as np

from . import tasks
from .reservoir import ESNConfig, EnsembleConfig, QRSystemConfig, esn_run, run_ensemble
from .tasks import (
    NARMA_ORDERS,
    NarmaDivergenceError,
    NarmaSpec,
    PhaseProtocol,
    narma_targets,
)
from .theory import CombinationBounds, RegressionInstance, combination_bounds

WORKERS_ENV_VAR = "QRMUX_WORKERS"

TRIAL_COLUMNS = ("preset", "n_qubits", "tau", "V", "order", "trial", "metric", "value")
SUMMARY_COLUMNS = ("preset", "n_qubits", "tau", "V", "order", "metric",
                   "mean", "std", "count")
ESN_COLUMNS = ("mode", "n_nodes", "esn", "sigma", "radius", "trial", "metric", "value")

_TASK_KIND = {"narma": "narma_suite", "mc": "memory_capacity", "both": "both"}

PAPER_TRIALS = 100
DEFAULT_TRIALS = 20


def resolve_workers(explicit: int | None = None) -> int:
    """Worker count: explicit value, else the environment default, else 1."""
    if explicit is not None:
        if explicit < 1:
            raise ValueError("workers must be at least 1")
        return explicit
    env = os.environ.get(WORKERS_ENV_VAR)
    if env:
        return max(1, int(env))
    return 1


def derive_seed(base_seed: int, *parts) -> int:
    """Deterministic 64-bit seed from the base seed and coordinate parts.

    Published derivation: big-endian first 8 bytes of
    SHA-256("qrmux|<base>|<part>|...").
    """
    text = "|".join(["qrmux", str(int(base_seed))] + [str(p) for p in parts])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid sweep definition for quantum-reservoir trials."""

    preset: str = "custom"
    n_qubits: tuple[int, ...] = (5,)
    taus: tuple[float, ...] = (1.0,)
    virtual_nodes: tuple[int, ...] = (25,)
    orders: tuple[int, ...] = (1, 2, 3, 4, 5)
    trials: int = DEFAULT_TRIALS
    base_seed: int = 0
    protocol: PhaseProtocol = PhaseProtocol()
    task: str = "both"
    coupling_scale: float = 1.0
    field: float = 1.0
    workers: int = 1
    save_features: bool = False

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.task not in _TASK_KIND:
            raise ValueError(f"task must be one of {sorted(_TASK_KIND)}")
        if min(self.orders) < 1:
            raise ValueError("orders must be positive")

    def cells(self) -> list[tuple[int, float, int, int]]:
        return list(product(self.n_qubits, self.taus, self.virtual_nodes,
                            self.orders))


PRESETS: dict[str, dict] = {
    # Memory-capacity sweep: 5 qubits, tau = 1, orders 1..5, V in {1, 5, 25}.
    "fig3": dict(n_qubits=(5,), taus=(1.0,), virtual_nodes=(1, 5, 25),
                 orders=(1, 2, 3, 4, 5), task="mc"),
    # NARMA sweep: 5 qubits, tau = 2, orders 1..5, V in {1, 5, 25}.
    "fig5": dict(n_qubits=(5,), taus=(2.0,), virtual_nodes=(1, 5, 25),
                 orders=(1, 2, 3, 4, 5), task="narma"),
    # Full grid over qubit count and input interval, both tasks.
    "appendix": dict(n_qubits=(3, 4, 5), taus=(0.5, 1.0, 2.0, 3.0, 4.0, 8.0,
                                               16.0, 32.0),
                     virtual_nodes=(1, 5, 25), orders=(1, 2, 3, 4, 5),
                     task="both"),
    # Minutes-scale sanity run.
    "smoke": dict(n_qubits=(2,), taus=(1.0,), virtual_nodes=(2,), orders=(1, 2),
                  trials=2, protocol=PhaseProtocol(200, 200, 200), task="both"),
}


def config_from_preset(preset: str, **overrides) -> ExperimentConfig:
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    fields = dict(PRESETS[preset])
    fields.update(overrides)
    return ExperimentConfig(preset=preset, **fields)


@dataclass(frozen=True)
class _TrialJob:
    preset: str
    n_qubits: int
    tau: float
    virtual_nodes: int
    order: int
    trial: int
    task: str
    protocol: PhaseProtocol
    coupling_scale: float
    field: float
    input_seed: int
    coupling_seeds: tuple[int, ...]
    features_path: str | None = None
    targets_path: str | None = None


def _save_targets(path: str, inputs: np.ndarray) -> None:
    columns = ["input"]
    arrays = [inputs]
    for order in NARMA_ORDERS:
        try:
            arrays.append(narma_targets(NarmaSpec(order), inputs))
            columns.append(f"narma{order}")
        except NarmaDivergenceError:
            continue
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        np.savetxt(fh, np.column_stack(arrays), fmt="%.17g", delimiter=",",
                   newline="\n")


def _run_trial_job(job: _TrialJob) -> list[tuple]:
    base = QRSystemConfig(n_qubits=job.n_qubits, tau=job.tau,
                          virtual_nodes=job.virtual_nodes,
                          coupling_scale=job.coupling_scale, field=job.field)
    ensemble = EnsembleConfig.replicated(base, job.coupling_seeds)
    key = (job.preset, job.n_qubits, job.tau, job.virtual_nodes, job.order,
           job.trial)
    try:
        inputs = tasks.generate_input(job.protocol.total, job.input_seed)
        features = run_ensemble(ensemble, inputs)
        if job.features_path:
            features.to_csv(job.features_path)
        if job.targets_path:
            _save_targets(job.targets_path, inputs)
        with warnings.catch_warnings():
            warnings.filterwarnings("ignore", message=".*underdetermined.*",
                                    category=RuntimeWarning)
            result = tasks.evaluate_features(features, inputs,
                                             _TASK_KIND[job.task], job.protocol)
    except NarmaDivergenceError:
        # Flag the trial instead of aborting the sweep.
        return [key + ("failed", math.nan)]
    return [key + item for item in result.metric_items()]


def _execute(fn, jobs: list, workers: int) -> list:
    """Run jobs in order, optionally on a spawned process pool.

    Spawned (not forked) workers re-import numpy in a fresh interpreter, so
    a given job computes identical floats no matter which worker runs it.
    """
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    ctx = multiprocessing.get_context("spawn")
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers,
                                                mp_context=ctx) as pool:
        return list(pool.map(fn, jobs, chunksize=1))


def _format_value(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_csv(path: Path, header: tuple[str, ...], rows: list[tuple]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_value(v) for v in row])


def _summarize(rows: list[tuple], group_width: int) -> list[tuple]:
    """Mean/std/count of the last column per group key; NaN values excluded.

    Each row is a group key of group_width entries followed by the value.
    """
    groups: dict[tuple, list[float]] = {}
    order: list[tuple] = []
    for row in rows:
        key = row[:group_width]
        if key not in groups:
            groups[key] = []
            order.append(key)
        value = row[-1]
        if isinstance(value, float) and math.isnan(value):
            continue
        groups[key].append(float(value))
    out = []
    for key in order:
        values = groups[key]
        if values:
            mean = float(np.mean(values))
            std = float(np.std(values))
        else:
            mean = math.nan
            std = math.nan
        out.append(key + (mean, std, len(values)))
    return out


def run_experiment(config: ExperimentConfig, out_dir) -> dict[str, Path]:
    """Execute the sweep and write trials.csv, summary.csv, manifest.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    jobs: list[_TrialJob] = []
    for (n, tau, v, order) in config.cells():
        for trial in range(config.trials):
            cell = (n, tau, v, order, trial)
            features_path = targets_path = None
            if config.save_features:
                stem = f"n{n}_tau{tau:g}_V{v}_order{order}_trial{trial}"
                features_path = str(out / f"features_{stem}.csv")
                targets_path = str(out / f"targets_{stem}.csv")
            jobs.append(_TrialJob(
                preset=config.preset, n_qubits=n, tau=tau, virtual_nodes=v,
                order=order, trial=trial, task=config.task,
                protocol=config.protocol, coupling_scale=config.coupling_scale,
                field=config.field,
                input_seed=derive_seed(config.base_seed, "input", *cell),
                coupling_seeds=tuple(
                    derive_seed(config.base_seed, "coupling", *cell, c)
                    for c in range(order)),
                features_path=features_path, targets_path=targets_path))

    row_lists = _execute(_run_trial_job, jobs, config.workers)
    rows = [row for rows_one in row_lists for row in rows_one]

    # Cell key, trial, then the stable metric order emitted by the trial.
    trials_path = out / "trials.csv"
    _write_csv(trials_path, TRIAL_COLUMNS, rows)

    summary_rows = _summarize(
        [(r[0], r[1], r[2], r[3], r[4], r[6], r[7]) for r in rows], group_width=6)
    summary_path = out / "summary.csv"
    _write_csv(summary_path, SUMMARY_COLUMNS, summary_rows)

    manifest = {
        "config": _config_dict(config),
        "seed_derivation": "sha256('qrmux|<base>|<parts...>')[:8], big-endian",
        "jobs": [{
            "n_qubits": j.n_qubits, "tau": j.tau, "V": j.virtual_nodes,
            "order": j.order, "trial": j.trial, "input_seed": j.input_seed,
            "coupling_seeds": list(j.coupling_seeds),
        } for j in jobs],
        "files": {"trials": trials_path.name, "summary": summary_path.name},
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n",
                             encoding="utf-8")
    return {"trials": trials_path, "summary": summary_path,
            "manifest": manifest_path}


def _config_dict(config: ExperimentConfig) -> dict:
    data = asdict(config)
    data["protocol"] = [config.protocol.washout, config.protocol.train,
                        config.protocol.eval]
    return data


# ---------------------------------------------------------------------------
# ESN baselines
# ---------------------------------------------------------------------------

ESN_PAPER_NODES = (5, 10, 20, 30, 40, 50, 100, 150, 200, 250, 300)
ESN_PAPER_SIGMAS = (1.0, 0.5, 0.2, 0.1, 0.05, 0.01, 0.005, 0.001)
ESN_PAPER_RADII = tuple(round(0.1 * k, 1) for k in range(1, 21))
ESN_MC_RADIUS = 0.9
ESN_MC_SIGMA = 0.01

ESN_DESK_NODES = (5, 10, 20)
ESN_DESK_SIGMAS = (1.0, 0.1, 0.01)
ESN_DESK_RADII = (0.5, 0.9, 1.3)


@dataclass(frozen=True)
class _ESNJob:
    mode: str
    n_nodes: int
    esn_index: int
    sigma: float
    radius: float
    trial: int
    task: str
    protocol: PhaseProtocol
    weight_seed: int
    input_seed: int


def _run_esn_job(job: _ESNJob) -> list[tuple]:
    key = (job.mode, job.n_nodes, job.esn_index, job.sigma, job.radius, job.trial)
    config = ESNConfig(n_nodes=job.n_nodes, spectral_radius=job.radius,
                       input_scale=job.sigma, weight_seed=job.weight_seed)
    try:
        inputs = tasks.generate_input(job.protocol.total, job.input_seed)
        features = esn_run(config, inputs)
        with warnings.catch_warnings():
            warnings.filterwarnings("ignore", message=".*underdetermined.*",
                                    category=RuntimeWarning)
            result = tasks.evaluate_features(features, inputs, job.task,
                                             job.protocol)
    except NarmaDivergenceError:
        return [key + ("failed", math.nan)]
    rows = [key + item for item in result.metric_items()
            if not item[0].startswith("mf_")]
    return rows


def run_esn_baseline(mode: str, out_dir, nodes: tuple[int, ...] | None = None,
                     trials: int | None = None, n_esns: int | None = None,
                     sigmas: tuple[float, ...] | None = None,
                     radii: tuple[float, ...] | None = None,
                     base_seed: int = 0,
                     protocol: PhaseProtocol = PhaseProtocol(),
                     workers: int = 1, paper_scale: bool = False,
                     ) -> dict[str, Path]:
    """Echo-state-network reference sweeps.

    mode "mc_fixed": independent ESNs at spectral radius 0.9 and input scale
    0.01, each driven by its own random input, scored by memory capacity.

    mode "narma_sweep": for every node count, several ESNs are swept over an
    (input scale, spectral radius) grid with several trials each; each ESN's
    best trial-averaged NMSE per NARMA task is collected and those bests are
    averaged over the ESNs.
    """
    if mode not in ("mc_fixed", "narma_sweep"):
        raise ValueError(f"mode must be 'mc_fixed' or 'narma_sweep', got {mode!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    jobs: list[_ESNJob] = []
    if mode == "mc_fixed":
        nodes = nodes or (20, 100)
        trials = trials or (PAPER_TRIALS if paper_scale else DEFAULT_TRIALS)
        for n in nodes:
            for trial in range(trials):
                jobs.append(_ESNJob(
                    mode=mode, n_nodes=n, esn_index=trial, sigma=ESN_MC_SIGMA,
                    radius=ESN_MC_RADIUS, trial=trial, task="memory_capacity",
                    protocol=protocol,
                    weight_seed=derive_seed(base_seed, "esn-weights", n, trial),
                    input_seed=derive_seed(base_seed, "esn-input", n, trial)))
    else:
        nodes = nodes or (ESN_PAPER_NODES if paper_scale else ESN_DESK_NODES)
        sigmas = sigmas or (ESN_PAPER_SIGMAS if paper_scale else ESN_DESK_SIGMAS)
        radii = radii or (ESN_PAPER_RADII if paper_scale else ESN_DESK_RADII)
        n_esns = n_esns or (10 if paper_scale else 3)
        trials = trials or (10 if paper_scale else 3)
        for n in nodes:
            for esn_index in range(n_esns):
                weight_seed = derive_seed(base_seed, "esn-weights", n, esn_index)
                for sigma in sigmas:
                    for radius in radii:
                        for trial in range(trials):
                            jobs.append(_ESNJob(
                                mode=mode, n_nodes=n, esn_index=esn_index,
                                sigma=sigma, radius=radius, trial=trial,
                                task="narma_suite", protocol=protocol,
                                weight_seed=weight_seed,
                                input_seed=derive_seed(
                                    base_seed, "esn-input", n, esn_index,
                                    sigma, radius, trial)))

    row_lists = _execute(_run_esn_job, jobs, workers)
    rows = [row for rows_one in row_lists for row in rows_one]
    trials_path = out / "esn_trials.csv"
    _write_csv(trials_path, ESN_COLUMNS, rows)

    if mode == "mc_fixed":
        summary_rows = _summarize(
            [(r[0], r[1], r[6], r[7]) for r in rows], group_width=3)
        header = ("mode", "n_nodes", "metric", "mean", "std", "count")
    else:
        summary_rows = _esn_best_summary(rows)
        header = ("mode", "n_nodes", "metric", "mean", "std", "count")
    summary_path = out / "esn_summary.csv"
    _write_csv(summary_path, header, summary_rows)
    return {"trials": trials_path, "summary": summary_path}


def _esn_best_summary(rows: list[tuple]) -> list[tuple]:
    """Per node count and task: average over ESNs of each ESN's best setting."""
    by_setting: dict[tuple, list[float]] = {}
    for (mode, n, esn, sigma, radius, _trial, metric, value) in rows:
        if metric == "failed" or (isinstance(value, float) and math.isnan(value)):
            continue
        by_setting.setdefault((mode, n, esn, metric, sigma, radius), []).append(value)

    best_per_esn: dict[tuple, float] = {}
    for (mode, n, esn, metric, _sigma, _radius), values in by_setting.items():
        mean = float(np.mean(values))
        key = (mode, n, esn, metric)
        if key not in best_per_esn or mean < best_per_esn[key]:
            best_per_esn[key] = mean

    grouped: dict[tuple, list[float]] = {}
    for (mode, n, _esn, metric), best in sorted(best_per_esn.items()):
        grouped.setdefault((mode, n, metric), []).append(best)
    return [key + (float(np.mean(vals)), float(np.std(vals)), len(vals))
            for key, vals in grouped.items()]


# ---------------------------------------------------------------------------
# Analysis of saved results
# ---------------------------------------------------------------------------


def _read_trials_csv(path) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(TRIAL_COLUMNS) - set(reader.fieldnames):
            raise ValueError(f"{path}: expected columns {TRIAL_COLUMNS}")
        rows = []
        for raw in reader:
            rows.append({
                "preset": raw["preset"], "n_qubits": int(raw["n_qubits"]),
                "tau": float(raw["tau"]), "V": int(raw["V"]),
                "order": int(raw["order"]), "trial": int(raw["trial"]),
                "metric": raw["metric"], "value": float(raw["value"]),
            })
    return rows


def _cell_means(rows: list[dict]) -> dict[tuple, float]:
    acc: dict[tuple, list[float]] = {}
    for row in rows:
        metric = row["metric"]
        if metric != "mc" and not metric.startswith("nmse_"):
            continue
        if math.isnan(row["value"]):
            continue
        key = (row["preset"], row["n_qubits"], row["tau"], row["V"],
               row["order"], metric)
        acc.setdefault(key, []).append(row["value"])
    return {key: float(np.mean(vals)) for key, vals in acc.items()}


def improvement_ratios(trials_csv, out_dir) -> dict[str, Path]:
    """Ratio of each cell's mean metric to the order-1 cell of its series.

    Also emits the spatial-versus-temporal comparison pairs: the ratio from
    raising the multiplexing order 1 -> 5 at V = 1 against the ratios from
    raising V at order 1, wherever those cells exist in the results.
    """
    rows = _read_trials_csv(trials_csv)
    means = _cell_means(rows)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    ratio_rows = []
    for key in sorted(means):
        preset, n, tau, v, order, metric = key
        baseline = means.get((preset, n, tau, v, 1, metric))
        if baseline is None or baseline <= 0:
            continue
        kind = "mc" if metric == "mc" else "nmse"
        ratio_rows.append((preset, n, tau, v, order, metric, means[key],
                           tasks.improvement_ratio(baseline, means[key], kind)))
    ratios_path = out / "ratios.csv"
    _write_csv(ratios_path, ("preset", "n_qubits", "tau", "V", "order", "metric",
                             "mean", "ratio"), ratio_rows)

    pair_rows = []
    series = sorted({(p, n, t, m) for (p, n, t, _v, _o, m) in means})
    for preset, n, tau, metric in series:
        def mean_at(v, order):
            return means.get((preset, n, tau, v, order, metric))
        base = mean_at(1, 1)
        if base is None or base <= 0:
            continue

        def ratio(v, order):
            value = mean_at(v, order)
            return math.nan if value is None else value / base

        v5 = mean_at(5, 1)
        pair_rows.append((
            preset, n, tau, metric,
            ratio(1, 5),           # spatial: order 1 -> 5 at V = 1
            ratio(5, 1),           # temporal: V 1 -> 5 at order 1
            ratio(25, 1),          # temporal: V 1 -> 25 at order 1
            math.nan if (v5 is None or v5 <= 0 or mean_at(25, 1) is None)
            else mean_at(25, 1) / v5))
    pairs_path = out / "ratio_pairs.csv"
    _write_csv(pairs_path, ("preset", "n_qubits", "tau", "metric",
                            "spatial_order1to5_v1", "temporal_v1to5_order1",
                            "temporal_v1to25_order1", "temporal_v5to25_order1"),
               pair_rows)
    return {"ratios": ratios_path, "pairs": pairs_path}


def _read_target_column(path, column: str | None) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        values = np.loadtxt(fh, delimiter=",", ndmin=2)
    if column is None:
        index = 0
    else:
        if column not in header:
            raise ValueError(f"{path}: no column {column!r} in {header}")
        index = header.index(column)
    return values[:, index]


def theory_bounds_report(design_a_csv, design_b_csv, target_csv,
                         target_column: str | None = None,
                         out_path=None) -> CombinationBounds:
    """Residual bracket for combining two saved feature matrices.

    The designs are feature-matrix CSVs as written by the sweep runner with
    save_features enabled; the target is one column of a targets CSV.
    """
    from .reservoir import FeatureMatrix

    a = FeatureMatrix.from_csv(design_a_csv).values
    b = FeatureMatrix.from_csv(design_b_csv).values
    y = _read_target_column(target_csv, target_column)
    bounds = combination_bounds(RegressionInstance(a, y), b)
    if out_path is not None:
        contains = (bounds.residual_lower - 1e-9 <= bounds.residual_combined
                    <= bounds.residual_upper + 1e-9)
        _write_csv(Path(out_path),
                   ("residual_lower", "residual_upper", "lambda_gain",
                    "lambda_gain_partner", "residual_combined",
                    "bracket_contains_exact"),
                   [(bounds.residual_lower, bounds.residual_upper,
                     bounds.lambda_gain, bounds.lambda_gain_partner,
                     bounds.residual_combined, contains)])
    return bounds
