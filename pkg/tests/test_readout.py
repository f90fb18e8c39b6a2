import json

import numpy as np
import pytest

from qrmux.readout import (
    MAX_DELAY,
    ReadoutWeights,
    fit,
    fit_many,
    memory_capacity,
    memory_function,
    nmse,
    predict,
)


def random_problem(rows, cols, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((rows, cols))
    y = rng.standard_normal(rows)
    return x, y


# ---------------------------------------------------------------------------
# fit / predict
# ---------------------------------------------------------------------------


def test_exact_interpolation_when_target_in_span():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((50, 4))
    w_true = rng.standard_normal(4)
    y = x @ w_true + 2.5
    w = fit(x, y)
    assert w.residual_sq <= 1e-9
    assert np.allclose(predict(w, x), y, atol=1e-8)


def test_rank_deficient_constant_columns_give_constant_prediction():
    x = np.ones((30, 2))  # duplicated all-ones columns
    y = np.full(30, 3.7)
    w = fit(x, y)
    assert np.allclose(predict(w, x), 3.7, atol=1e-10)


def test_full_rank_fit_matches_normal_equation_oracle():
    # independent oracle: solve the normal equations with a dense solver
    x, y = random_problem(200, 10, 3)
    design = np.hstack([np.ones((200, 1)), x])
    oracle = np.linalg.solve(design.T @ design, design.T @ y)
    w = fit(x, y)
    assert np.max(np.abs(w.as_vector() - oracle)) < 1e-8
    oracle_residual = float(np.sum((y - design @ oracle) ** 2))
    assert w.residual_sq == pytest.approx(oracle_residual, abs=1e-8)


def test_ridge_matches_regularized_normal_equation_oracle():
    x, y = random_problem(120, 8, 4)
    ridge = 0.37
    design = np.hstack([np.ones((120, 1)), x])
    oracle = np.linalg.solve(design.T @ design + ridge * np.eye(9), design.T @ y)
    w = fit(x, y, ridge=ridge)
    assert np.max(np.abs(w.as_vector() - oracle)) < 1e-8


def test_fit_many_equals_separate_fits():
    rng = np.random.default_rng(9)
    x = rng.standard_normal((60, 5))
    targets = rng.standard_normal((60, 3))
    joint = fit_many(x, targets)
    for k in range(3):
        single = fit(x, targets[:, k])
        assert np.allclose(joint[k].as_vector(), single.as_vector(), atol=1e-12)


def test_fit_rejects_bad_inputs():
    with pytest.raises(ValueError):
        fit(np.empty((0, 3)), np.empty(0))
    with pytest.raises(ValueError):
        fit(np.full((5, 2), np.nan), np.zeros(5))
    with pytest.raises(ValueError):
        fit(np.zeros((5, 2)), np.array([1.0, 2.0, np.nan, 0.0, 1.0]))
    with pytest.raises(ValueError):
        fit(np.zeros((5, 2)), np.zeros(4))
    with pytest.raises(ValueError):
        fit(np.zeros((5, 2)), np.zeros(5), ridge=-1.0)


def test_predict_trivial_cases():
    w = ReadoutWeights(bias=1.5, weights=np.zeros(3))
    x = np.random.default_rng(1).standard_normal((10, 3))
    assert np.allclose(predict(w, x), 1.5)
    w_id = ReadoutWeights(bias=0.0, weights=np.array([1.0]))
    col = np.linspace(-1, 1, 7)[:, None]
    assert np.allclose(predict(w_id, col), col[:, 0])


def test_predict_rejects_dimension_mismatch():
    w = ReadoutWeights(bias=0.0, weights=np.ones(3))
    with pytest.raises(ValueError):
        predict(w, np.zeros((4, 2)))


def test_training_predictions_reproduce_reported_residual():
    x, y = random_problem(80, 6, 7)
    w = fit(x, y)
    residual = float(np.sum((y - predict(w, x)) ** 2))
    assert residual == pytest.approx(w.residual_sq, rel=1e-10)


# ---------------------------------------------------------------------------
# invariants
# ---------------------------------------------------------------------------


def test_column_scaling_invariance():
    x, y = random_problem(100, 6, 11)
    base = predict(fit(x, y), x)
    scaled = x.copy()
    scaled[:, 2] *= 17.0
    rescaled_preds = predict(fit(scaled, y), scaled)
    assert np.max(np.abs(base - rescaled_preds)) < 1e-9


def test_appending_columns_never_raises_training_residual():
    rng = np.random.default_rng(13)
    x = rng.standard_normal((90, 4))
    y = rng.standard_normal(90)
    base = fit(x, y).residual_sq
    for extra_cols in (1, 3, 6):
        extended = np.hstack([x, rng.standard_normal((90, extra_cols))])
        assert fit(extended, y).residual_sq <= base + 1e-9


def test_duplicating_whole_block_keeps_residual():
    x, y = random_problem(70, 5, 17)
    base = fit(x, y).residual_sq
    doubled = fit(np.hstack([x, x]), y).residual_sq
    assert abs(base - doubled) < 1e-9


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def test_nmse_trivial_and_hand_computed_cases():
    t = np.array([0.4, 0.2, 0.9])
    assert nmse(t, t) == 0.0
    assert nmse(np.zeros(3), t) == pytest.approx(1.0)
    # hand evaluation: ((1-0)^2 + (1-2)^2) / (1^2 + 1^2) = 1
    assert nmse(np.array([0.0, 2.0]), np.array([1.0, 1.0])) == pytest.approx(1.0)


def test_nmse_rejects_zero_targets_and_mismatch():
    with pytest.raises(ValueError):
        nmse(np.ones(3), np.zeros(3))
    with pytest.raises(ValueError):
        nmse(np.ones(3), np.ones(4))


def test_memory_function_perfect_and_anticorrelated():
    t = np.array([0.1, 0.5, 0.3, 0.9, 0.2])
    assert memory_function(t, t) == pytest.approx(1.0)
    assert memory_function(-t, t) == pytest.approx(1.0)


def test_memory_function_constant_signal_convention():
    t = np.array([0.1, 0.5, 0.3])
    assert memory_function(np.full(3, 2.0), t) == 0.0
    assert memory_function(t, np.full(3, 1.0)) == 0.0


def test_memory_function_bounds_on_random_pairs():
    rng = np.random.default_rng(23)
    for _ in range(100):
        a = rng.standard_normal(40)
        b = rng.standard_normal(40)
        value = memory_function(a, b)
        assert 0.0 <= value <= 1.0


def test_memory_function_rejects_short_input():
    with pytest.raises(ValueError):
        memory_function(np.array([1.0]), np.array([1.0]))


def test_memory_capacity_trivial_cases():
    assert memory_capacity(np.zeros(MAX_DELAY + 1)) == 0.0
    assert memory_capacity(np.ones(MAX_DELAY + 1)) == float(MAX_DELAY + 1)
    one_hot = np.zeros(MAX_DELAY + 1)
    one_hot[0] = 1.0
    assert memory_capacity(one_hot) == 1.0


def test_memory_capacity_rejects_bad_input():
    with pytest.raises(ValueError):
        memory_capacity(np.zeros(10))
    bad = np.zeros(MAX_DELAY + 1)
    bad[3] = 1.5
    with pytest.raises(ValueError):
        memory_capacity(bad)


def test_weights_json_round_trip():
    w = ReadoutWeights(bias=0.25, weights=np.array([1.0, -2.0, 0.5]))
    loaded = ReadoutWeights.from_json(w.to_json())
    assert loaded.bias == w.bias
    assert np.array_equal(loaded.weights, w.weights)
    payload = json.loads(w.to_json())
    assert set(payload) == {"bias", "weights"}


def test_weights_reject_non_finite():
    with pytest.raises(ValueError):
        ReadoutWeights(bias=np.nan, weights=np.ones(2))
    with pytest.raises(ValueError):
        ReadoutWeights(bias=0.0, weights=np.array([1.0, np.inf]))
