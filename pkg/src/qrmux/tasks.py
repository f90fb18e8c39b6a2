"""Benchmark tasks and the washout/train/evaluate protocol.

Targets come in two families: NARMA systems of order 2, 5, 10, 15, and 20
driven by the (rescaled) input stream, and delayed copies of the raw input
for the memory-capacity analysis. One reservoir run serves every readout of
a trial; the readouts are independent linear problems on a shared feature
matrix.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import readout
from .readout import MAX_DELAY
from .reservoir import EnsembleConfig, FeatureMatrix, run_ensemble

NARMA_ORDERS = (2, 5, 10, 15, 20)

# Coefficients (alpha, beta, gamma, delta) of the order-n recurrence, n >= 5.
NARMA_COEFFS = (0.3, 0.05, 1.5, 0.1)

# The reservoir sees raw inputs in [0, 1]; the NARMA recurrences consume the
# stream linearly rescaled to [0, 0.2] to keep the dynamics stable.
NARMA_INPUT_SCALE = 0.2

DIVERGENCE_LIMIT = 1e3

TASK_KINDS = ("narma_suite", "memory_capacity", "both")


class NarmaDivergenceError(RuntimeError):
    """A NARMA recurrence left the stable range."""


@dataclass(frozen=True)
class NarmaSpec:
    """One NARMA benchmark system."""

    order: int
    coefficients: tuple[float, float, float, float] = NARMA_COEFFS

    def __post_init__(self) -> None:
        if self.order not in NARMA_ORDERS:
            raise ValueError(f"order must be one of {NARMA_ORDERS}, got {self.order}")


@dataclass(frozen=True)
class PhaseProtocol:
    """Lengths of the washout, training, and evaluation phases."""

    washout: int = 2000
    train: int = 2000
    eval: int = 2000

    def __post_init__(self) -> None:
        if min(self.washout, self.train, self.eval) <= 0:
            raise ValueError("all phases must have positive length")

    @property
    def total(self) -> int:
        return self.washout + self.train + self.eval

    @property
    def train_slice(self) -> slice:
        return slice(self.washout, self.washout + self.train)

    @property
    def eval_slice(self) -> slice:
        return slice(self.washout + self.train, self.total)


@dataclass
class TaskResult:
    """Metrics of one trial; fields are None for tasks that were not run."""

    narma_nmse: dict[int, float] | None = None
    mf_profile: np.ndarray | None = None
    mc: float | None = None
    metadata: dict = field(default_factory=dict)

    def metric_items(self) -> list[tuple[str, float]]:
        """Flat (metric, value) pairs in a stable order, for CSV emission."""
        items: list[tuple[str, float]] = []
        if self.narma_nmse is not None:
            for order in sorted(self.narma_nmse):
                items.append((f"nmse_narma{order}", self.narma_nmse[order]))
        if self.mc is not None:
            items.append(("mc", self.mc))
        if self.mf_profile is not None:
            for d, value in enumerate(self.mf_profile):
                items.append((f"mf_{d}", float(value)))
        return items

    def to_json_dict(self) -> dict:
        out: dict = {"metadata": self.metadata}
        if self.narma_nmse is not None:
            out["narma_nmse"] = {str(k): v for k, v in sorted(self.narma_nmse.items())}
        if self.mc is not None:
            out["mc"] = self.mc
        if self.mf_profile is not None:
            out["mf_profile"] = [float(v) for v in self.mf_profile]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def generate_input(length: int, seed: int) -> np.ndarray:
    """I.i.d. uniform [0, 1) input stream, deterministic per seed."""
    if length <= 0:
        raise ValueError("length must be positive")
    return np.random.default_rng(seed).random(length)


def narma_targets(spec: NarmaSpec, inputs) -> np.ndarray:
    """Iterate a NARMA recurrence over the input stream.

    Pre-history values (outputs and inputs before the stream starts) are
    zero; the washout phase absorbs the transient. The returned sequence is
    aligned so entry k is the target for feature row k. Raises
    NarmaDivergenceError if the output leaves the stable range.
    """
    u = np.asarray(inputs, dtype=float)
    if u.ndim != 1 or len(u) == 0:
        raise ValueError("inputs must be a nonempty 1-D sequence")
    if np.min(u) < 0.0 or np.max(u) > 1.0:
        raise ValueError("inputs must lie in [0, 1]")
    s = NARMA_INPUT_SCALE * u
    length = len(s)
    y = np.zeros(length)

    if spec.order == 2:
        y_prev1 = 0.0
        y_prev2 = 0.0
        for k in range(length):
            value = 0.4 * y_prev1 + 0.4 * y_prev1 * y_prev2 + 0.6 * s[k] ** 3 + 0.1
            if not np.isfinite(value) or abs(value) > DIVERGENCE_LIMIT:
                raise NarmaDivergenceError(f"NARMA2 diverged at step {k}")
            y[k] = value
            y_prev2, y_prev1 = y_prev1, value
        return y

    alpha, beta, gamma, delta = spec.coefficients
    n = spec.order
    for k in range(length):
        y_prev = y[k - 1] if k >= 1 else 0.0
        window = y[max(0, k - n):k].sum()
        u_lag = s[k - n + 1] if k - n + 1 >= 0 else 0.0
        value = alpha * y_prev + beta * y_prev * window + gamma * u_lag * s[k] + delta
        if not np.isfinite(value) or abs(value) > DIVERGENCE_LIMIT:
            raise NarmaDivergenceError(f"NARMA{n} diverged at step {k}")
        y[k] = value
    return y


def delay_targets(inputs, delay: int) -> np.ndarray:
    """Delayed copy of the input; entries before the first valid index are NaN.

    The NaN head marks rows that must stay out of the regression windows;
    the readout fitter rejects non-finite targets, so including a masked row
    fails loudly instead of silently.
    """
    u = np.asarray(inputs, dtype=float)
    if u.ndim != 1:
        raise ValueError("inputs must be 1-D")
    if not 0 <= delay <= MAX_DELAY:
        raise ValueError(f"delay must lie in [0, {MAX_DELAY}], got {delay}")
    out = np.full(len(u), np.nan)
    out[delay:] = u[:len(u) - delay]
    return out


def improvement_ratio(baseline: float, value: float, kind: str) -> float:
    """Performance relative to a baseline cell.

    For memory capacity (kind "mc") a ratio above 1 is an improvement; for
    NMSE (kind "nmse") a ratio below 1 is.
    """
    if kind not in ("mc", "nmse"):
        raise ValueError(f"kind must be 'mc' or 'nmse', got {kind!r}")
    if baseline <= 0:
        raise ValueError("baseline must be positive")
    return float(value) / float(baseline)


def _ensemble_digest(ensemble: EnsembleConfig) -> str:
    text = repr([(c.n_qubits, c.tau, c.virtual_nodes, c.coupling_scale, c.field,
                  c.coupling_seed, c.input_qubit) for c in ensemble.systems])
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def _fit_predict(x: np.ndarray, targets: np.ndarray, protocol: PhaseProtocol,
                 ridge: float) -> tuple[np.ndarray, list[float]]:
    """Train on the training window, predict on the evaluation window.

    targets is (L, K); returns evaluation predictions (E, K) and the
    training residuals. Rows where a target is NaN (delay masking) are
    dropped per column, which only happens for washouts shorter than the
    longest delay.
    """
    tr = protocol.train_slice
    ev = protocol.eval_slice
    if np.all(np.isfinite(targets[tr])):
        fits = readout.fit_many(x[tr], targets[tr], ridge)
        coeffs = np.column_stack([w.as_vector() for w in fits])
        design_ev = np.hstack([np.ones((ev.stop - ev.start, 1)), x[ev]])
        return design_ev @ coeffs, [w.residual_sq for w in fits]

    preds = np.empty((ev.stop - ev.start, targets.shape[1]))
    residuals = []
    for k in range(targets.shape[1]):
        col = targets[tr, k]
        keep = np.isfinite(col)
        if not np.any(keep):
            raise ValueError("a target column has no valid training rows; "
                             "use a washout at least as long as the largest delay")
        w = readout.fit(x[tr][keep], col[keep], ridge)
        preds[:, k] = readout.predict(w, x[ev])
        residuals.append(w.residual_sq)
    return preds, residuals


def evaluate_features(features: FeatureMatrix, inputs, task: str,
                      protocol: PhaseProtocol, ridge: float = 0.0,
                      metadata: dict | None = None) -> TaskResult:
    """Train and score readouts for the requested task on existing signals."""
    if task not in TASK_KINDS:
        raise ValueError(f"task must be one of {TASK_KINDS}, got {task!r}")
    inputs = np.asarray(inputs, dtype=float)
    if features.n_rows != len(inputs) or len(inputs) != protocol.total:
        raise ValueError("features, inputs, and protocol lengths disagree")
    if protocol.train < features.n_cols + 1:
        warnings.warn(
            f"training window ({protocol.train}) is shorter than the node count "
            f"plus bias ({features.n_cols + 1}); the fit is underdetermined",
            RuntimeWarning, stacklevel=2)

    x = features.values
    ev = protocol.eval_slice
    result = TaskResult(metadata=dict(metadata or {}))
    result.metadata.setdefault("protocol",
                               (protocol.washout, protocol.train, protocol.eval))
    result.metadata.setdefault("ridge", ridge)

    want_narma = task in ("narma_suite", "both")
    want_mc = task in ("memory_capacity", "both")
    if want_mc and protocol.washout + protocol.train <= MAX_DELAY:
        raise ValueError("washout + train must exceed the largest delay")

    # All readouts of a trial share one decomposition of the design.
    blocks: list[np.ndarray] = []
    if want_narma:
        blocks.append(np.column_stack(
            [narma_targets(NarmaSpec(n), inputs) for n in NARMA_ORDERS]))
    if want_mc:
        blocks.append(np.column_stack(
            [delay_targets(inputs, d) for d in range(MAX_DELAY + 1)]))
    targets = np.hstack(blocks)
    preds, _ = _fit_predict(x, targets, protocol, ridge)

    offset = 0
    if want_narma:
        result.narma_nmse = {
            n: readout.nmse(preds[:, offset + i], targets[ev, offset + i])
            for i, n in enumerate(NARMA_ORDERS)}
        offset += len(NARMA_ORDERS)
    if want_mc:
        mf = np.empty(MAX_DELAY + 1)
        for d in range(MAX_DELAY + 1):
            col = targets[ev, offset + d]
            keep = np.isfinite(col)
            mf[d] = readout.memory_function(preds[keep, offset + d], col[keep])
        result.mf_profile = mf
        result.mc = readout.memory_capacity(mf)

    return result


def run_trial(ensemble: EnsembleConfig, task: str, protocol: PhaseProtocol,
              input_seed: int, ridge: float = 0.0) -> TaskResult:
    """One full experimental trial: drive the ensemble, train, evaluate.

    The feature matrix is built once over the whole input stream and shared
    by every readout (all five NARMA systems, or all delays of the
    memory-capacity analysis).
    """
    inputs = generate_input(protocol.total, input_seed)
    features = run_ensemble(ensemble, inputs)
    metadata = {
        "ensemble_digest": _ensemble_digest(ensemble),
        "order": ensemble.order,
        "n_total": ensemble.n_total,
        "coupling_seeds": [c.coupling_seed for c in ensemble.systems],
        "input_seed": input_seed,
        "task": task,
    }
    return evaluate_features(features, inputs, task, protocol, ridge, metadata)
