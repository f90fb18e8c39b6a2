"""Linear readout training and the scalar performance metrics.

Training solves the least-squares problem for a weight vector over the
reservoir signals plus a constant bias. The default solver is a
singular-value pseudoinverse with a relative cutoff, which returns the
minimum-norm solution on rank-deficient designs (synchronized or duplicated
reservoirs); an optional ridge penalty is available.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .reservoir import FeatureMatrix

RANK_CUTOFF = 1e-10

# The memory capacity sums the memory function over delays 0..MAX_DELAY.
MAX_DELAY = 150


@dataclass(frozen=True)
class ReadoutWeights:
    """Trained affine readout: bias plus one weight per signal column."""

    bias: float
    weights: np.ndarray
    residual_sq: float | None = None

    def __post_init__(self) -> None:
        weights = np.asarray(self.weights, dtype=float)
        if weights.ndim != 1:
            raise ValueError("weights must be 1-D")
        if not np.isfinite(self.bias) or not np.all(np.isfinite(weights)):
            raise ValueError("readout weights must be finite")
        object.__setattr__(self, "weights", weights)

    def as_vector(self) -> np.ndarray:
        return np.concatenate(([self.bias], self.weights))

    def to_json(self) -> str:
        return json.dumps({"bias": self.bias, "weights": self.weights.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "ReadoutWeights":
        data = json.loads(text)
        return cls(bias=float(data["bias"]), weights=np.asarray(data["weights"]))


def _as_matrix(features) -> np.ndarray:
    if isinstance(features, FeatureMatrix):
        return features.values
    arr = np.asarray(features, dtype=float)
    if arr.ndim != 2:
        raise ValueError("features must be 2-D")
    return arr


def _solve_design(design: np.ndarray, targets: np.ndarray, ridge: float,
                  ) -> np.ndarray:
    """SVD solve of the bias-augmented design for one or many targets.

    ridge == 0 keeps singular values above RANK_CUTOFF relative to the
    largest (minimum-norm pseudoinverse); ridge > 0 applies the Tikhonov
    filter s / (s^2 + ridge) to every singular value.
    """
    u, s, vt = np.linalg.svd(design, full_matrices=False)
    if ridge == 0.0:
        cutoff = RANK_CUTOFF * (s[0] if s.size else 0.0)
        factor = np.where(s > cutoff, np.divide(1.0, s, where=s > 0), 0.0)
    else:
        factor = s / (s * s + ridge)
    return vt.T @ (factor[:, None] * (u.T @ targets))


def fit_many(features, targets_matrix, ridge: float = 0.0) -> list[ReadoutWeights]:
    """Train one readout per target column on a shared feature matrix.

    All targets share one decomposition of the design, so this is the cheap
    way to train the 151 delay readouts or the five benchmark readouts of a
    multitask trial.
    """
    x = _as_matrix(features)
    t = np.asarray(targets_matrix, dtype=float)
    if t.ndim == 1:
        t = t[:, None]
    if x.shape[0] != t.shape[0]:
        raise ValueError(f"{x.shape[0]} feature rows vs {t.shape[0]} target rows")
    if x.shape[0] == 0:
        raise ValueError("empty training set")
    if not np.all(np.isfinite(x)):
        raise ValueError("features contain non-finite entries")
    if not np.all(np.isfinite(t)):
        raise ValueError("targets contain non-finite entries")
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")

    design = np.hstack([np.ones((x.shape[0], 1)), x])
    coeffs = _solve_design(design, t, float(ridge))
    residuals = np.sum((t - design @ coeffs) ** 2, axis=0)
    return [ReadoutWeights(bias=float(coeffs[0, k]), weights=coeffs[1:, k],
                           residual_sq=float(residuals[k]))
            for k in range(t.shape[1])]


def fit(features, targets, ridge: float = 0.0) -> ReadoutWeights:
    """Least-squares readout for a single target sequence."""
    targets = np.asarray(targets, dtype=float)
    if targets.ndim != 1:
        raise ValueError("targets must be 1-D; use fit_many for multiple targets")
    return fit_many(features, targets, ridge)[0]


def predict(weights: ReadoutWeights, features) -> np.ndarray:
    """Apply the affine readout row-wise."""
    x = _as_matrix(features)
    if x.shape[1] != len(weights.weights):
        raise ValueError(
            f"{x.shape[1]} feature columns vs {len(weights.weights)} weights")
    return x @ weights.weights + weights.bias


def nmse(predictions, targets) -> float:
    """Normalized mean squared error: sum (target - pred)^2 / sum target^2."""
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predictions.shape != targets.shape:
        raise ValueError("predictions and targets must have equal length")
    denom = float(targets @ targets)
    if denom <= 0.0:
        raise ValueError("targets are identically zero; NMSE is undefined")
    return float(np.sum((targets - predictions) ** 2) / denom)


def memory_function(predictions, targets) -> float:
    """Squared Pearson correlation in [0, 1]; 0 if either signal is constant."""
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predictions.shape != targets.shape or predictions.ndim != 1:
        raise ValueError("predictions and targets must be 1-D of equal length")
    if len(predictions) < 2:
        raise ValueError("need at least two samples")
    p = predictions - predictions.mean()
    t = targets - targets.mean()
    var_p = float(p @ p) / len(p)
    var_t = float(t @ t) / len(t)
    if var_p < 1e-14 or var_t < 1e-14:
        return 0.0
    cov = float(p @ t) / len(p)
    value = cov * cov / (var_p * var_t)
    return float(min(max(value, 0.0), 1.0))


def memory_capacity(mf_values) -> float:
    """Sum of the memory function over delays 0..MAX_DELAY."""
    mf_values = np.asarray(mf_values, dtype=float)
    if mf_values.shape != (MAX_DELAY + 1,):
        raise ValueError(f"expected {MAX_DELAY + 1} memory-function values, "
                         f"got shape {mf_values.shape}")
    if np.min(mf_values) < 0.0 or np.max(mf_values) > 1.0:
        raise ValueError("memory-function values must lie in [0, 1]")
    return float(np.sum(mf_values))
