"""Exact linear-algebra account of combining reservoirs.

Concatenating the signal matrices of two reservoirs can only shrink the
training residual, because the orthogonal projector onto the combined column
space dominates each individual projector. The largest eigenvalue of the
projector difference bounds how much the residual can shrink, which gives a
computable bracket on the combined residual and, when two candidate
brackets are disjoint, a partner choice that is safe without fitting the
combined model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .reservoir import FeatureMatrix

RANK_CUTOFF = 1e-10


@dataclass(frozen=True)
class RegressionInstance:
    """A design matrix with its target vector."""

    design: np.ndarray
    target: np.ndarray

    def __post_init__(self) -> None:
        design = np.asarray(self.design, dtype=float)
        target = np.asarray(self.target, dtype=float)
        if design.ndim == 1:
            design = design[:, None]
        if design.ndim != 2:
            raise ValueError("design must be a matrix")
        if target.ndim != 1 or target.shape[0] != design.shape[0]:
            raise ValueError("target must be a vector matching the design rows")
        if design.shape[0] < design.shape[1]:
            raise ValueError("need at least as many rows as columns")
        if not (np.all(np.isfinite(design)) and np.all(np.isfinite(target))):
            raise ValueError("design and target must be finite")
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "target", target)


@dataclass(frozen=True)
class CombinationBounds:
    """Bracket on the combined training residual, with its certificates.

    lambda_gain is the largest eigenvalue of (combined projector - first
    projector); lambda_gain_partner the same for the second design.
    residual_combined is the exactly computed combined residual, carried for
    verification only; the bracket itself never uses it.
    """

    residual_lower: float
    residual_upper: float
    lambda_gain: float
    lambda_gain_partner: float
    residual_combined: float


def _as_design(x) -> np.ndarray:
    if isinstance(x, FeatureMatrix):
        x = x.values
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError("design must be a nonempty matrix")
    return arr


def projector(x) -> np.ndarray:
    """Orthogonal projector onto the column space of x.

    The rank is decided by singular values above RANK_CUTOFF relative to the
    largest, so rank-deficient designs (synchronized reservoirs) yield the
    projector onto their actual column space instead of failing.
    """
    arr = _as_design(x)
    u, s, _ = np.linalg.svd(arr, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((arr.shape[0], arr.shape[0]))
    rank = int(np.sum(s > RANK_CUTOFF * s[0]))
    basis = u[:, :rank]
    return basis @ basis.T


def residual_sq(instance: RegressionInstance) -> float:
    """Squared norm of the least-squares residual, ||(I - P) y||^2."""
    p = projector(instance.design)
    r = instance.target - p @ instance.target
    return float(r @ r)


def _lambda_max(q: np.ndarray) -> float:
    lam = float(np.linalg.eigvalsh(q)[-1])
    return min(max(lam, 0.0), 1.0)


def combination_bounds(a: RegressionInstance, b_design) -> CombinationBounds:
    """Bracket the residual of the column-concatenated design [a.design, b].

    The exact combined residual always lies in
    [residual_lower, residual_upper]; the lower end is clamped at zero since
    a squared residual cannot be negative.
    """
    b = _as_design(b_design)
    if b.shape[0] != a.design.shape[0]:
        raise ValueError("row counts of the two designs must match")
    y = a.target
    p_a = projector(a.design)
    p_b = projector(b)
    combined = np.hstack([a.design, b])
    p_ab = projector(combined)

    r_a = float(y @ (y - p_a @ y))
    r_b = float(y @ (y - p_b @ y))
    r_ab = float(y @ (y - p_ab @ y))

    lam_a = _lambda_max(p_ab - p_a)
    lam_b = _lambda_max(p_ab - p_b)
    norm_y = float(y @ y)

    lower = max(r_a - lam_a * norm_y, r_b - lam_b * norm_y, 0.0)
    upper = min(r_a, r_b)
    return CombinationBounds(residual_lower=lower, residual_upper=upper,
                             lambda_gain=lam_a, lambda_gain_partner=lam_b,
                             residual_combined=max(r_ab, 0.0))


@dataclass(frozen=True)
class PartnerDecision:
    """Outcome of the partner-selection procedure with its certificates."""

    choice: str  # "B", "C", or "undecidable"
    residual_a: float
    residual_b: float
    residual_c: float
    bounds_with_b: CombinationBounds
    bounds_with_c: CombinationBounds


def select_partner(a: RegressionInstance, b_design, c_design) -> PartnerDecision:
    """Decide which of two candidate designs to concatenate with a.design.

    The better-performing candidate alone is not a safe guide; a candidate
    is chosen only when its residual bracket lies strictly below the
    other's, which guarantees the ordering of the combined residuals without
    fitting either combination. Overlapping brackets return "undecidable"
    and the caller must fit both.
    """
    b = _as_design(b_design)
    c = _as_design(c_design)
    if b.shape[1] != c.shape[1]:
        raise ValueError("candidate designs must have the same column count")
    bounds_b = combination_bounds(a, b)
    bounds_c = combination_bounds(a, c)
    r_a = residual_sq(a)
    r_b = residual_sq(RegressionInstance(b, a.target))
    r_c = residual_sq(RegressionInstance(c, a.target))

    if bounds_b.residual_upper < bounds_c.residual_lower:
        choice = "B"
    elif bounds_c.residual_upper < bounds_b.residual_lower:
        choice = "C"
    else:
        choice = "undecidable"
    return PartnerDecision(choice=choice, residual_a=r_a, residual_b=r_b,
                           residual_c=r_c, bounds_with_b=bounds_b,
                           bounds_with_c=bounds_c)


def load_design_csv(path) -> np.ndarray:
    """Read a design matrix from a feature-matrix CSV file."""
    return FeatureMatrix.from_csv(path).values
